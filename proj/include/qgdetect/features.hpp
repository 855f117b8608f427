#pragma once

#include "qgdetect/signal_io.hpp"

#include <array>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace qgd {

struct FeatureOptions {
    // Radius of the second-order difference-plot disc, as a fraction of the
    // standard deviation of the first differences.
    double ctm_radius_scale = 0.1;
};

// Summary statistics of one window, one value each:
//   avg_power    mean of x^2
//   mean         arithmetic mean
//   median_freq  lowest normalized frequency (cycles/sample, DC included)
//                where cumulative one-sided spectral energy reaches half
//                of the total
//   stddev       sample standard deviation (N-1)
//   skewness     adjusted Fisher-Pearson
//   kurtosis     unbiased estimator, normal distribution -> ~3
//   ctm          fraction of successive first-difference pairs inside the
//                disc of radius ctm_radius_scale * stddev(diffs)
//   corr         Pearson correlation of successive first differences
//   lzc          LZ76 phrase count of the median-binarized window, / N
// A constant window sets the degenerate flag and reports 0 for the
// moment-ratio features instead of NaN.
struct FeatureWindow {
    double avg_power = 0.0;
    double mean = 0.0;
    double median_freq = 0.0;
    double stddev = 0.0;
    double skewness = 0.0;
    double kurtosis = 0.0;
    double ctm = 0.0;
    double corr = 0.0;
    double lzc = 0.0;
    bool degenerate = false;

    static const std::array<const char*, 9>& names();
    std::array<double, 9> values() const;
};

// Requires window.size() >= 8.
FeatureWindow extract(std::span<const double> window, const FeatureOptions& opts = {});

// LZ76 phrase count of a binary sequence (not normalized).
std::size_t lz76_phrase_count(std::span<const int> bits);

struct FeatureMatrix {
    std::vector<std::string> column_names; // start, features..., degenerate
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
    std::string to_csv() const;
};

// Fixed-size windows over one channel, stepping by hop (hop == window gives
// non-overlapping tiling with floor(length / window) rows).
FeatureMatrix window_scan(const NormalizedSeries& series, std::size_t channel,
                          std::size_t window, std::size_t hop,
                          const FeatureOptions& opts = {});

void write_feature_csv(const std::filesystem::path& path, const FeatureMatrix& fm);

} // namespace qgd
