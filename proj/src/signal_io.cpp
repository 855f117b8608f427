#include "qgdetect/signal_io.hpp"
#include "qgdetect/errors.hpp"
#include "qgdetect/io_util.hpp"
#include "qgdetect/rng.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

namespace qgd {

void RawSeries::validate() const {
    for (std::size_t c = 1; c < channels.size(); ++c)
        if (channels[c].size() != channels[0].size())
            throw std::invalid_argument("series '" + name + "': channel lengths differ");
    if (channel_names.size() != channels.size())
        throw std::invalid_argument("series '" + name + "': name/channel count mismatch");
    const std::size_t n = length();
    std::size_t prev_end = 0;
    for (std::size_t i = 0; i < anomaly_intervals.size(); ++i) {
        const Interval& iv = anomaly_intervals[i];
        if (iv.begin >= iv.end || iv.end > n)
            throw std::invalid_argument("series '" + name + "': malformed interval");
        if (i > 0 && iv.begin < prev_end)
            throw std::invalid_argument("series '" + name + "': overlapping intervals");
        prev_end = iv.end;
    }
}

std::vector<double> WindowedDataset::one_hot(std::size_t i) const {
    std::vector<double> v(out_grid, 0.0);
    v[targets[i]] = 1.0;
    return v;
}

ConversionSpec adc_scale(double gain, double lsb_volts) {
    return {gain * lsb_volts};
}

ConversionSpec transducer_scale(double units_per_volt) {
    return {units_per_volt};
}

namespace {

std::vector<std::string> split_csv_row(std::string_view line) {
    std::vector<std::string> cells;
    std::size_t pos = 0;
    while (true) {
        std::size_t comma = line.find(',', pos);
        std::string_view cell = (comma == std::string_view::npos)
                                    ? line.substr(pos)
                                    : line.substr(pos, comma - pos);
        std::size_t b = cell.find_first_not_of(" \t\r");
        if (b == std::string_view::npos) {
            cells.emplace_back();
        } else {
            std::size_t e = cell.find_last_not_of(" \t\r");
            cells.emplace_back(cell.substr(b, e - b + 1));
        }
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    return cells;
}

double parse_cell(const std::string& cell, const std::string& where) {
    double x = 0.0;
    auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), x);
    if (ec != std::errc() || p != cell.data() + cell.size())
        throw parse_error(where + ": bad numeric cell '" + cell + "'");
    return x;
}

std::vector<Interval> labels_to_intervals(const std::vector<int>& labels) {
    std::vector<Interval> out;
    std::size_t i = 0;
    while (i < labels.size()) {
        if (labels[i]) {
            std::size_t b = i;
            while (i < labels.size() && labels[i]) ++i;
            out.push_back({b, i});
        } else {
            ++i;
        }
    }
    return out;
}

} // namespace

RawSeries load_csv(const std::filesystem::path& path,
                   const std::vector<std::string>* want) {
    const std::string text = read_text(path);
    const std::string where = path.string();

    RawSeries s;
    s.name = path.stem().string();

    std::size_t pos = 0;
    std::size_t lineno = 0;
    bool have_header = false;
    bool has_label_col = false;
    std::size_t ncols = 0;
    std::vector<int> labels;

    while (pos < text.size()) {
        std::size_t nl = text.find('\n', pos);
        std::string_view line = (nl == std::string::npos)
                                    ? std::string_view(text).substr(pos)
                                    : std::string_view(text).substr(pos, nl - pos);
        pos = (nl == std::string::npos) ? text.size() : nl + 1;
        ++lineno;
        if (line.empty() || line == "\r") continue;

        std::vector<std::string> cells = split_csv_row(line);
        if (!have_header) {
            ncols = cells.size();
            if (ncols == 0) throw parse_error(where + ": empty header");
            has_label_col = (cells.back() == "anomaly");
            std::size_t nch = ncols - (has_label_col ? 1 : 0);
            if (nch == 0) throw parse_error(where + ": no data channels in header");
            s.channel_names.assign(cells.begin(), cells.begin() + nch);
            s.channels.assign(nch, {});
            have_header = true;
            continue;
        }
        if (cells.size() != ncols)
            throw parse_error(where + ":" + std::to_string(lineno) +
                              ": expected " + std::to_string(ncols) + " cells, got " +
                              std::to_string(cells.size()));
        const std::string rowwhere = where + ":" + std::to_string(lineno);
        for (std::size_t c = 0; c < s.channels.size(); ++c)
            s.channels[c].push_back(parse_cell(cells[c], rowwhere));
        if (has_label_col) {
            double v = parse_cell(cells.back(), rowwhere);
            if (v != 0.0 && v != 1.0)
                throw parse_error(rowwhere + ": anomaly label must be 0 or 1");
            labels.push_back(v != 0.0 ? 1 : 0);
        }
    }
    if (!have_header) throw parse_error(where + ": empty file");
    if (has_label_col) s.anomaly_intervals = labels_to_intervals(labels);

    if (want) {
        RawSeries sel;
        sel.name = s.name;
        sel.sample_period = s.sample_period;
        sel.anomaly_intervals = s.anomaly_intervals;
        for (const std::string& w : *want) {
            auto it = std::find(s.channel_names.begin(), s.channel_names.end(), w);
            if (it == s.channel_names.end())
                throw parse_error(where + ": no channel named '" + w + "'");
            std::size_t idx = static_cast<std::size_t>(it - s.channel_names.begin());
            sel.channel_names.push_back(w);
            sel.channels.push_back(std::move(s.channels[idx]));
        }
        sel.validate();
        return sel;
    }
    s.validate();
    return s;
}

void write_csv(const std::filesystem::path& path, const RawSeries& series) {
    series.validate();
    std::ostringstream out;
    const bool with_labels = !series.anomaly_intervals.empty();
    for (std::size_t c = 0; c < series.channel_names.size(); ++c) {
        if (c) out << ',';
        out << series.channel_names[c];
    }
    if (with_labels) out << ",anomaly";
    out << '\n';

    const std::size_t n = series.length();
    std::size_t iv = 0;
    for (std::size_t t = 0; t < n; ++t) {
        for (std::size_t c = 0; c < series.channels.size(); ++c) {
            if (c) out << ',';
            out << format_double(series.channels[c][t]);
        }
        if (with_labels) {
            while (iv < series.anomaly_intervals.size() &&
                   t >= series.anomaly_intervals[iv].end)
                ++iv;
            const bool inside = iv < series.anomaly_intervals.size() &&
                                t >= series.anomaly_intervals[iv].begin &&
                                t < series.anomaly_intervals[iv].end;
            out << ',' << (inside ? '1' : '0');
        }
        out << '\n';
    }
    atomic_write_text(path, out.str());
}

RawSeries convert_physical(const RawSeries& series,
                           std::span<const ConversionSpec> specs) {
    if (specs.size() != series.channels.size())
        throw std::invalid_argument("convert_physical: spec count != channel count");
    RawSeries out = series;
    for (std::size_t c = 0; c < out.channels.size(); ++c)
        for (double& x : out.channels[c]) x *= specs[c].multiplier;
    return out;
}

NormalizedSeries normalize(const RawSeries& series, const std::vector<Bounds>* bounds) {
    series.validate();
    if (bounds && bounds->size() != series.channels.size())
        throw std::invalid_argument("normalize: bounds count != channel count");
    NormalizedSeries out;
    out.name = series.name;
    out.channel_names = series.channel_names;
    out.sample_period = series.sample_period;
    out.anomaly_intervals = series.anomaly_intervals;
    out.channels.resize(series.channels.size());
    out.norm_bounds.resize(series.channels.size());

    for (std::size_t c = 0; c < series.channels.size(); ++c) {
        Bounds b;
        if (bounds) {
            b = (*bounds)[c];
        } else {
            auto [mn, mx] = std::minmax_element(series.channels[c].begin(),
                                                series.channels[c].end());
            b = {*mn, *mx};
        }
        if (!(b.max > b.min))
            throw degenerate_range_error("normalize: channel '" +
                                         series.channel_names[c] +
                                         "' has zero value range");
        out.norm_bounds[c] = b;
        const double span = b.max - b.min;
        out.channels[c].resize(series.channels[c].size());
        for (std::size_t t = 0; t < series.channels[c].size(); ++t) {
            double v = (series.channels[c][t] - b.min) / span;
            if (bounds) v = std::clamp(v, 0.0, 1.0);
            out.channels[c][t] = v;
        }
    }
    return out;
}

namespace {

void split_intervals(const std::vector<Interval>& src, std::size_t at,
                     std::vector<Interval>& left, std::vector<Interval>& right) {
    for (const Interval& iv : src) {
        if (iv.end <= at) {
            left.push_back(iv);
        } else if (iv.begin >= at) {
            right.push_back({iv.begin - at, iv.end - at});
        } else {
            left.push_back({iv.begin, at});
            right.push_back({0, iv.end - at});
        }
    }
}

template <class Series>
std::pair<Series, Series> split_impl(const Series& s, std::size_t at) {
    if (at == 0 || at >= s.length())
        throw invalid_split_error("split_series: index " + std::to_string(at) +
                                  " leaves an empty side (length " +
                                  std::to_string(s.length()) + ")");
    Series a = s, b = s;
    a.name = s.name + "/head";
    b.name = s.name + "/tail";
    for (std::size_t c = 0; c < s.channels.size(); ++c) {
        a.channels[c].assign(s.channels[c].begin(), s.channels[c].begin() + at);
        b.channels[c].assign(s.channels[c].begin() + at, s.channels[c].end());
    }
    a.anomaly_intervals.clear();
    b.anomaly_intervals.clear();
    split_intervals(s.anomaly_intervals, at, a.anomaly_intervals, b.anomaly_intervals);
    return {std::move(a), std::move(b)};
}

template <class Series>
Series decimate_impl(const Series& s, std::size_t factor) {
    if (factor == 0) throw std::invalid_argument("decimate: factor must be >= 1");
    if (factor == 1) return s;
    Series out = s;
    for (std::size_t c = 0; c < s.channels.size(); ++c) {
        out.channels[c].clear();
        for (std::size_t t = 0; t < s.channels[c].size(); t += factor)
            out.channels[c].push_back(s.channels[c][t]);
    }
    out.sample_period = s.sample_period * static_cast<double>(factor);
    out.anomaly_intervals.clear();
    for (const Interval& iv : s.anomaly_intervals) {
        std::size_t b = (iv.begin + factor - 1) / factor;
        std::size_t e = (iv.end + factor - 1) / factor;
        if (b < e) out.anomaly_intervals.push_back({b, e});
    }
    return out;
}

} // namespace

std::pair<RawSeries, RawSeries> split_series(const RawSeries& series, std::size_t at) {
    return split_impl(series, at);
}

std::pair<NormalizedSeries, NormalizedSeries> split_series(const NormalizedSeries& series,
                                                           std::size_t at) {
    return split_impl(series, at);
}

RawSeries decimate(const RawSeries& series, std::size_t factor) {
    return decimate_impl(series, factor);
}

NormalizedSeries decimate(const NormalizedSeries& series, std::size_t factor) {
    return decimate_impl(series, factor);
}

WindowedDataset build_windows(const NormalizedSeries& series,
                              std::span<const QuantizationGrid> in_grids,
                              const QuantizationGrid& out_grid,
                              const PreprocessConfig& cfg) {
    cfg.validate();
    if (in_grids.size() != series.channels.size())
        throw std::invalid_argument("build_windows: grid count != channel count");
    if (static_cast<std::size_t>(cfg.target_channel) >= series.channels.size())
        throw std::invalid_argument("build_windows: target_channel out of range");

    const std::size_t lb = cfg.look_back;
    const std::size_t la = cfg.look_ahead;
    const std::size_t len = series.length();
    if (len <= lb + la)
        throw std::invalid_argument("build_windows: series shorter than look_back + look_ahead");

    const std::size_t nch = series.channels.size();
    std::vector<std::vector<std::uint16_t>> q(nch);
    for (std::size_t c = 0; c < nch; ++c) {
        q[c].resize(len);
        for (std::size_t t = 0; t < len; ++t)
            q[c][t] = static_cast<std::uint16_t>(in_grids[c].quantize(series.channels[c][t]));
    }
    const auto& target_ch = series.channels[cfg.target_channel];
    std::vector<std::uint16_t> qt(len);
    for (std::size_t t = 0; t < len; ++t)
        qt[t] = static_cast<std::uint16_t>(out_grid.quantize(target_ch[t]));

    WindowedDataset ds;
    ds.num_examples = len - lb - la;
    ds.look_back = lb;
    ds.num_channels = nch;
    ds.in_grid = cfg.in_grid;
    ds.out_grid = cfg.out_grid;
    ds.first_target_index = lb + la;
    ds.inputs.resize(ds.num_examples * lb * nch);
    ds.targets.resize(ds.num_examples);

    std::size_t w = 0;
    for (std::size_t e = 0; e < ds.num_examples; ++e) {
        const std::size_t t = lb + la + e;
        const std::size_t row0 = t - la - lb + 1;
        for (std::size_t s = 0; s < lb; ++s)
            for (std::size_t c = 0; c < nch; ++c)
                ds.inputs[w++] = q[c][row0 + s];
        ds.targets[e] = qt[t];
    }
    return ds;
}

WindowedDataset subsample(const WindowedDataset& ds, double fraction,
                          std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction <= 1.0))
        throw std::invalid_argument("subsample: fraction outside (0, 1]");
    const std::size_t n = ds.num_examples;
    const std::size_t k =
        static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    rng::engine g(seed);
    rng::shuffle(order, g);

    WindowedDataset out = ds;
    out.num_examples = k;
    const std::size_t stride = ds.look_back * ds.num_channels;
    out.inputs.resize(k * stride);
    out.targets.resize(k);
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t src = order[i];
        std::copy_n(ds.inputs.data() + src * stride, stride, out.inputs.data() + i * stride);
        out.targets[i] = ds.targets[src];
    }
    return out;
}

WindowedDataset concat_windows(std::span<const WindowedDataset> parts) {
    if (parts.empty())
        throw std::invalid_argument("concat_windows: nothing to concatenate");
    WindowedDataset out = parts[0];
    for (std::size_t p = 1; p < parts.size(); ++p) {
        const WindowedDataset& d = parts[p];
        if (d.look_back != out.look_back || d.num_channels != out.num_channels ||
            d.in_grid != out.in_grid || d.out_grid != out.out_grid)
            throw std::invalid_argument("concat_windows: incompatible dataset shapes");
        out.inputs.insert(out.inputs.end(), d.inputs.begin(), d.inputs.end());
        out.targets.insert(out.targets.end(), d.targets.begin(), d.targets.end());
        out.num_examples += d.num_examples;
    }
    return out;
}

void PreprocessConfig::validate() const {
    if (look_back < 1) throw std::invalid_argument("look_back must be >= 1");
    if (look_ahead < 1) throw std::invalid_argument("look_ahead must be >= 1");
    if (in_grid < 2 || in_grid > 65535) throw std::invalid_argument("in_grid must be in [2, 65535]");
    if (out_grid < 2 || out_grid > 65535) throw std::invalid_argument("out_grid must be in [2, 65535]");
    if (!(samples_percentage > 0.0 && samples_percentage <= 1.0))
        throw std::invalid_argument("samples_percentage outside (0, 1]");
    if (target_channel < 0) throw std::invalid_argument("target_channel must be >= 0");
    if (decimation < 1) throw std::invalid_argument("decimation must be >= 1");
}

} // namespace qgd
