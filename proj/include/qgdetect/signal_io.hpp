#pragma once

#include "qgdetect/quantizer.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace qgd {

// Half-open sample index range [begin, end).
struct Interval {
    std::size_t begin = 0;
    std::size_t end = 0;

    std::size_t length() const { return end - begin; }
    bool overlaps(const Interval& o) const { return begin < o.end && o.begin < end; }
    bool operator==(const Interval&) const = default;
};

struct Bounds {
    double min = 0.0;
    double max = 0.0;
};

// Multichannel series in engineering units, equal channel lengths, intervals
// sorted, disjoint and inside the series.
struct RawSeries {
    std::string name;
    std::vector<std::string> channel_names;
    std::vector<std::vector<double>> channels;
    double sample_period = 1.0;
    std::vector<Interval> anomaly_intervals;

    std::size_t length() const { return channels.empty() ? 0 : channels[0].size(); }
    void validate() const;
};

// Same shape with every channel mapped into [0, 1]; keeps the bounds used so
// the mapping can be replayed on unseen data.
struct NormalizedSeries {
    std::string name;
    std::vector<std::string> channel_names;
    std::vector<std::vector<double>> channels;
    double sample_period = 1.0;
    std::vector<Bounds> norm_bounds;
    std::vector<Interval> anomaly_intervals;

    std::size_t length() const { return channels.empty() ? 0 : channels[0].size(); }
};

// Per-channel linear calibration applied before normalization.
struct ConversionSpec {
    double multiplier = 1.0;
};

// ADC counts -> volts for a front end with the given amplifier gain and
// per-bit step size.
ConversionSpec adc_scale(double gain, double lsb_volts);
// Transducer output volts -> physical units (e.g. a 2 kA/V current probe).
ConversionSpec transducer_scale(double units_per_volt);

struct PreprocessConfig {
    int look_back = 16;
    int look_ahead = 1;
    int in_grid = 16;
    int out_grid = 8;
    GridKind in_algorithm = GridKind::Adaptive;
    GridKind out_algorithm = GridKind::Adaptive;
    double samples_percentage = 1.0;
    int target_channel = 0;
    std::uint64_t seed = 0;
    int decimation = 1;

    void validate() const;
    bool operator==(const PreprocessConfig&) const = default;
};

// Supervised windows over a normalized series. Inputs hold input-grid class
// indices laid out (example, step, channel); the example targeting series
// index t covers history rows [t-look_ahead-look_back+1, t-look_ahead].
// Targets are output-grid class indices; one_hot() expands one on demand.
struct WindowedDataset {
    std::size_t num_examples = 0;
    std::size_t look_back = 0;
    std::size_t num_channels = 0;
    int in_grid = 0;
    int out_grid = 0;
    // Series index of example 0's target before any subsampling.
    std::size_t first_target_index = 0;
    std::vector<std::uint16_t> inputs;
    std::vector<std::uint16_t> targets;

    std::span<const std::uint16_t> window(std::size_t i) const {
        return {inputs.data() + i * look_back * num_channels, look_back * num_channels};
    }
    std::vector<double> one_hot(std::size_t i) const;
};

// CSV with a header row of channel names; a trailing "anomaly" column of 0/1
// labels becomes anomaly_intervals. `want` selects and reorders channels by
// name (null keeps all).
RawSeries load_csv(const std::filesystem::path& path,
                   const std::vector<std::string>* want = nullptr);
void write_csv(const std::filesystem::path& path, const RawSeries& series);

RawSeries convert_physical(const RawSeries& series,
                           std::span<const ConversionSpec> specs);

// bounds == nullptr: per-channel min/max from the series itself (a constant
// channel is an error). Caller-provided bounds are applied verbatim and the
// result is clipped into [0, 1].
NormalizedSeries normalize(const RawSeries& series,
                           const std::vector<Bounds>* bounds = nullptr);

std::pair<RawSeries, RawSeries> split_series(const RawSeries& series, std::size_t at);
std::pair<NormalizedSeries, NormalizedSeries> split_series(const NormalizedSeries& series,
                                                           std::size_t at);

RawSeries decimate(const RawSeries& series, std::size_t factor);
NormalizedSeries decimate(const NormalizedSeries& series, std::size_t factor);

WindowedDataset build_windows(const NormalizedSeries& series,
                              std::span<const QuantizationGrid> in_grids,
                              const QuantizationGrid& out_grid,
                              const PreprocessConfig& cfg);

// Selection without replacement in shuffled order; fraction 1.0 is a pure
// permutation. Deterministic under the seed.
WindowedDataset subsample(const WindowedDataset& ds, double fraction,
                          std::uint64_t seed);

// Merges datasets from multiple series; shapes and grids must agree.
WindowedDataset concat_windows(std::span<const WindowedDataset> parts);

} // namespace qgd
