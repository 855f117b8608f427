#include "qgdetect/features.hpp"
#include "qgdetect/errors.hpp"
#include "qgdetect/io_util.hpp"
#include "qgdetect/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace qgd {

namespace {

void fft_pow2(std::vector<std::complex<double>>& a) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = -2.0 * std::numbers::pi / static_cast<double>(len);
        const std::complex<double> wl(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const std::complex<double> u = a[i + k];
                const std::complex<double> v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wl;
            }
        }
    }
}

// One-sided energy spectrum |X_k|^2 for k = 0..N/2, DC included.
std::vector<double> energy_spectrum(std::span<const double> x) {
    const std::size_t n = x.size();
    std::vector<double> spec(n / 2 + 1);
    if ((n & (n - 1)) == 0) {
        std::vector<std::complex<double>> a(n);
        for (std::size_t i = 0; i < n; ++i) a[i] = {x[i], 0.0};
        fft_pow2(a);
        for (std::size_t k = 0; k < spec.size(); ++k) spec[k] = std::norm(a[k]);
    } else {
        for (std::size_t k = 0; k < spec.size(); ++k) {
            double re = 0.0, im = 0.0;
            const double w = -2.0 * std::numbers::pi * static_cast<double>(k) /
                             static_cast<double>(n);
            for (std::size_t t = 0; t < n; ++t) {
                re += x[t] * std::cos(w * static_cast<double>(t));
                im += x[t] * std::sin(w * static_cast<double>(t));
            }
            spec[k] = re * re + im * im;
        }
    }
    return spec;
}

double median_frequency(std::span<const double> x) {
    const std::vector<double> spec = energy_spectrum(x);
    const double total = kernels::active().sum(spec.data(), spec.size());
    if (total <= 0.0) return 0.0;
    const double half = 0.5 * total;
    double cum = 0.0;
    for (std::size_t k = 0; k < spec.size(); ++k) {
        cum += spec[k];
        if (cum >= half)
            return static_cast<double>(k) / static_cast<double>(x.size());
    }
    return 0.5;
}

double sample_std(std::span<const double> v) {
    const std::size_t n = v.size();
    const double mean = kernels::active().sum(v.data(), n) / static_cast<double>(n);
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(n - 1));
}

double median_of(std::span<const double> v) {
    std::vector<double> s(v.begin(), v.end());
    std::sort(s.begin(), s.end());
    const std::size_t h = s.size() / 2;
    return s.size() % 2 == 1 ? s[h] : 0.5 * (s[h - 1] + s[h]);
}

} // namespace

std::size_t lz76_phrase_count(std::span<const int> bits) {
    const std::size_t n = bits.size();
    if (n == 0) throw std::invalid_argument("lz76_phrase_count: empty sequence");
    if (n == 1) return 1;

    std::size_t c = 1, l = 1, i = 0, k = 1, kmax = 1;
    while (true) {
        if (bits[i + k - 1] == bits[l + k - 1]) {
            ++k;
            if (l + k > n) {
                ++c;
                break;
            }
        } else {
            kmax = std::max(kmax, k);
            ++i;
            if (i == l) {
                ++c;
                l += kmax;
                if (l + 1 > n) break;
                i = 0;
                k = 1;
                kmax = 1;
            } else {
                k = 1;
            }
        }
    }
    return c;
}

const std::array<const char*, 9>& FeatureWindow::names() {
    static const std::array<const char*, 9> n = {
        "avg_power", "mean",     "median_freq", "stddev", "skewness",
        "kurtosis",  "ctm",      "corr",        "lzc",
    };
    return n;
}

std::array<double, 9> FeatureWindow::values() const {
    return {avg_power, mean, median_freq, stddev, skewness, kurtosis, ctm, corr, lzc};
}

FeatureWindow extract(std::span<const double> window, const FeatureOptions& opts) {
    const std::size_t n = window.size();
    if (n < 8) throw std::invalid_argument("extract: window shorter than 8 samples");
    if (!(opts.ctm_radius_scale > 0.0))
        throw std::invalid_argument("extract: ctm_radius_scale must be > 0");

    const auto& K = kernels::active();
    const double dn = static_cast<double>(n);

    FeatureWindow f;
    f.avg_power = K.sumsq(window.data(), n) / dn;
    f.mean = K.sum(window.data(), n) / dn;
    f.median_freq = median_frequency(window);

    // central moments, single pass
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double x : window) {
        const double d = x - f.mean;
        const double d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    f.stddev = std::sqrt(m2 / (dn - 1.0));
    m2 /= dn;
    m3 /= dn;
    m4 /= dn;

    const bool constant = m2 == 0.0;
    if (constant) {
        f.degenerate = true; // moment ratios replaced by 0
    } else {
        f.skewness = std::sqrt(dn * (dn - 1.0)) / (dn - 2.0) * m3 / std::pow(m2, 1.5);
        const double k1 = m4 / (m2 * m2);
        f.kurtosis = (dn - 1.0) / ((dn - 2.0) * (dn - 3.0)) *
                         ((dn + 1.0) * k1 - 3.0 * (dn - 1.0)) +
                     3.0;
    }

    // first differences drive ctm and corr
    std::vector<double> d(n - 1);
    for (std::size_t t = 0; t + 1 < n; ++t) d[t] = window[t + 1] - window[t];
    const double sd = sample_std(d);

    if (sd > 0.0) {
        const double radius = opts.ctm_radius_scale * sd;
        std::size_t inside = 0;
        for (std::size_t t = 0; t + 1 < d.size(); ++t)
            if (std::hypot(d[t], d[t + 1]) < radius) ++inside;
        f.ctm = static_cast<double>(inside) / static_cast<double>(d.size() - 1);

        const std::size_t m = d.size() - 1; // pairs (d[t], d[t+1])
        double ma = 0.0, mb = 0.0;
        for (std::size_t t = 0; t < m; ++t) {
            ma += d[t];
            mb += d[t + 1];
        }
        ma /= static_cast<double>(m);
        mb /= static_cast<double>(m);
        double cov = 0.0, va = 0.0, vb = 0.0;
        for (std::size_t t = 0; t < m; ++t) {
            const double da = d[t] - ma;
            const double db = d[t + 1] - mb;
            cov += da * db;
            va += da * da;
            vb += db * db;
        }
        if (va > 0.0 && vb > 0.0) {
            f.corr = cov / std::sqrt(va * vb);
        } else {
            f.corr = 0.0;
            f.degenerate = true;
        }
    } else {
        f.ctm = 0.0;
        f.corr = 0.0;
        f.degenerate = true;
    }

    const double med = median_of(window);
    std::vector<int> bits(n);
    for (std::size_t t = 0; t < n; ++t) bits[t] = window[t] > med ? 1 : 0;
    f.lzc = static_cast<double>(lz76_phrase_count(bits)) / dn;

    return f;
}

FeatureMatrix window_scan(const NormalizedSeries& series, std::size_t channel,
                          std::size_t window, std::size_t hop,
                          const FeatureOptions& opts) {
    if (channel >= series.channels.size())
        throw std::invalid_argument("window_scan: channel out of range");
    if (hop == 0) throw std::invalid_argument("window_scan: hop must be >= 1");
    const auto& ch = series.channels[channel];
    if (window < 8 || window > ch.size())
        throw std::invalid_argument("window_scan: window does not fit the series");

    FeatureMatrix fm;
    fm.column_names.push_back("start");
    for (const char* n : FeatureWindow::names()) fm.column_names.push_back(n);
    fm.column_names.push_back("degenerate");
    fm.cols = fm.column_names.size();
    fm.rows = (ch.size() - window) / hop + 1;
    fm.data.reserve(fm.rows * fm.cols);

    for (std::size_t r = 0; r < fm.rows; ++r) {
        const std::size_t start = r * hop;
        const FeatureWindow f =
            extract(std::span<const double>(ch.data() + start, window), opts);
        fm.data.push_back(static_cast<double>(start));
        for (double v : f.values()) fm.data.push_back(v);
        fm.data.push_back(f.degenerate ? 1.0 : 0.0);
    }
    return fm;
}

std::string FeatureMatrix::to_csv() const {
    std::ostringstream out;
    for (std::size_t c = 0; c < column_names.size(); ++c) {
        if (c) out << ',';
        out << column_names[c];
    }
    out << '\n';
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            if (c) out << ',';
            out << format_double(at(r, c));
        }
        out << '\n';
    }
    return out.str();
}

void write_feature_csv(const std::filesystem::path& path, const FeatureMatrix& fm) {
    atomic_write_text(path, fm.to_csv());
}

} // namespace qgd
