#include "qgdetect/signal_io.hpp"
#include "qgdetect/errors.hpp"

#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <stdexcept>

using namespace qgd;
namespace fs = std::filesystem;

namespace {

RawSeries three_channel_demo() {
    RawSeries s;
    s.name = "demo";
    s.channel_names = {"v0", "v1", "i0"};
    s.channels = {{0.1, 0.2, 0.30000000000000004, 0.4},
                  {1.5, -2.25, 0.125, 8.0},
                  {10.0, 20.0, 30.0, 40.0}};
    s.anomaly_intervals = {{1, 3}};
    return s;
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("qgd-test-" + std::to_string(std::rand()) + "-" +
                std::to_string(reinterpret_cast<std::uintptr_t>(this)));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

} // namespace

TEST_CASE("csv round-trip preserves values, names and labels exactly") {
    TempDir dir;
    const fs::path file = dir.path / "series.csv";
    const RawSeries orig = three_channel_demo();
    write_csv(file, orig);

    const RawSeries back = load_csv(file);
    CHECK(back.channel_names == orig.channel_names);
    REQUIRE(back.channels.size() == 3);
    for (std::size_t c = 0; c < 3; ++c)
        for (std::size_t t = 0; t < 4; ++t)
            CHECK(back.channels[c][t] == orig.channels[c][t]); // bit-exact
    CHECK(back.anomaly_intervals == orig.anomaly_intervals);
}

TEST_CASE("csv channel selection filters and reorders") {
    TempDir dir;
    const fs::path file = dir.path / "series.csv";
    write_csv(file, three_channel_demo());

    const std::vector<std::string> want{"i0", "v0"};
    const RawSeries got = load_csv(file, &want);
    CHECK(got.channel_names == want);
    CHECK(got.channels[0][0] == 10.0);
    CHECK(got.channels[1][0] == 0.1);

    const std::vector<std::string> missing{"nope"};
    CHECK_THROWS_AS((void)load_csv(file, &missing), parse_error);
}

TEST_CASE("csv loader rejects malformed files") {
    TempDir dir;
    auto write = [&](const char* name, const char* text) {
        std::ofstream(dir.path / name) << text;
        return dir.path / name;
    };
    CHECK_THROWS_AS((void)load_csv(write("empty.csv", "")), parse_error);
    CHECK_THROWS_AS((void)load_csv(write("ragged.csv", "a,b\n1,2\n3\n")), parse_error);
    CHECK_THROWS_AS((void)load_csv(write("text.csv", "a\n1\nponies\n")), parse_error);
    CHECK_THROWS_AS((void)load_csv(write("badlabel.csv", "a,anomaly\n1,2\n")),
                    parse_error);
    CHECK_THROWS_AS((void)load_csv(dir.path / "no-such-file.csv"), io_error);
}

TEST_CASE("physical conversion scales counts into engineering units") {
    // 16-bit ADC behind a gain-5 amplifier: 1000 counts -> 47.674 mV.
    const ConversionSpec adc = adc_scale(5.0, 9.5348e-6);
    CHECK(1000.0 * adc.multiplier == doctest::Approx(0.0476740).epsilon(1e-9));

    // 2 kA/V current transducer: 1.5 V -> 3 kA.
    const ConversionSpec probe = transducer_scale(2000.0);
    CHECK(1.5 * probe.multiplier == doctest::Approx(3000.0));

    RawSeries s;
    s.channel_names = {"u", "i"};
    s.channels = {{1000.0}, {1.5}};
    const RawSeries phys = convert_physical(s, std::vector<ConversionSpec>{adc, probe});
    CHECK(phys.channels[0][0] == doctest::Approx(0.0476740));
    CHECK(phys.channels[1][0] == doctest::Approx(3000.0));
}

TEST_CASE("normalization maps the observed range onto [0,1]") {
    RawSeries s;
    s.channel_names = {"a"};
    s.channels = {{2.0, 4.0, 6.0}};
    const NormalizedSeries n = normalize(s);
    CHECK(n.channels[0] == std::vector<double>{0.0, 0.5, 1.0});
    CHECK(n.norm_bounds[0].min == 2.0);
    CHECK(n.norm_bounds[0].max == 6.0);

    // Provided bounds are replayed verbatim and clipped.
    const std::vector<Bounds> bounds{{0.0, 4.0}};
    const NormalizedSeries c = normalize(s, &bounds);
    CHECK(c.channels[0][0] == doctest::Approx(0.5));
    CHECK(c.channels[0][2] == 1.0); // 6.0 clips to the top

    RawSeries flat;
    flat.channel_names = {"flat"};
    flat.channels = {{3.0, 3.0, 3.0}};
    CHECK_THROWS_AS((void)normalize(flat), degenerate_range_error);
}

TEST_CASE("split carries interval labels to the right side") {
    RawSeries s;
    s.channel_names = {"a"};
    s.channels = {std::vector<double>(100, 1.0)};
    s.channels[0][0] = 0.0;
    s.anomaly_intervals = {{10, 20}, {45, 55}, {80, 90}};

    const auto [head, tail] = split_series(s, 50);
    CHECK(head.length() == 50);
    CHECK(tail.length() == 50);
    CHECK(head.name == "/head");
    CHECK(head.anomaly_intervals == std::vector<Interval>{{10, 20}, {45, 50}});
    CHECK(tail.anomaly_intervals == std::vector<Interval>{{0, 5}, {30, 40}});

    CHECK_THROWS_AS((void)split_series(s, 0), invalid_split_error);
    CHECK_THROWS_AS((void)split_series(s, 100), invalid_split_error);
}

TEST_CASE("decimation keeps every factor-th sample and remaps intervals") {
    RawSeries s;
    s.channel_names = {"a"};
    s.channels = {{0, 1, 2, 3, 4, 5, 6, 7, 8, 9}};
    s.sample_period = 0.5;
    s.anomaly_intervals = {{3, 4}, {4, 8}};

    const RawSeries d = decimate(s, 2);
    CHECK(d.channels[0] == std::vector<double>{0, 2, 4, 6, 8});
    CHECK(d.sample_period == 1.0);
    // [3,4) -> [2,2) vanishes; [4,8) -> [2,4).
    CHECK(d.anomaly_intervals == std::vector<Interval>{{2, 4}});

    CHECK(decimate(s, 1).channels[0] == s.channels[0]);
    CHECK_THROWS_AS((void)decimate(s, 0), std::invalid_argument);
}

TEST_CASE("windowing walks the series with look-back history") {
    RawSeries raw;
    raw.channel_names = {"a", "b"};
    raw.channels = {{0, 1, 2, 3, 4, 5, 6, 7, 8, 9},
                    {9, 8, 7, 6, 5, 4, 3, 2, 1, 0}};
    const NormalizedSeries norm = normalize(raw);

    PreprocessConfig cfg;
    cfg.look_back = 4;
    cfg.look_ahead = 1;
    cfg.in_grid = 10;
    cfg.out_grid = 10;
    cfg.in_algorithm = GridKind::Static;
    cfg.out_algorithm = GridKind::Static;

    const std::vector<QuantizationGrid> in_grids{build_static_grid(10),
                                                 build_static_grid(10)};
    const WindowedDataset ds =
        build_windows(norm, in_grids, build_static_grid(10), cfg);

    // length 10, look_back 4, look_ahead 1 -> 5 examples targeting t = 5..9.
    CHECK(ds.num_examples == 5);
    CHECK(ds.first_target_index == 5);
    CHECK(ds.num_channels == 2);

    // Example 0 history rows are samples 1..4; channel a quantizes to its
    // own index on the static 10-grid.
    const auto w0 = ds.window(0);
    REQUIRE(w0.size() == 8);
    for (std::size_t step = 0; step < 4; ++step) {
        CHECK(w0[step * 2 + 0] == step + 1);      // channel a, rows 1..4
        CHECK(w0[step * 2 + 1] == 8 - step);      // channel b mirrors
    }
    CHECK(ds.targets[0] == 5);
    CHECK(ds.targets[4] == 9);

    const std::vector<double> oh = ds.one_hot(0);
    REQUIRE(oh.size() == 10);
    CHECK(oh[5] == 1.0);
    double sum = 0.0;
    for (double v : oh) sum += v;
    CHECK(sum == 1.0);

    // Too short to produce a single window.
    RawSeries tiny;
    tiny.channel_names = {"a"};
    tiny.channels = {{0, 1, 2, 3, 4}};
    const NormalizedSeries tiny_n = normalize(tiny);
    PreprocessConfig tight = cfg;
    tight.look_back = 5;
    const std::vector<QuantizationGrid> one{build_static_grid(10)};
    CHECK_THROWS_AS((void)build_windows(tiny_n, one, build_static_grid(10), tight),
                    std::invalid_argument);
}

TEST_CASE("subsampling draws a deterministic permutation slice") {
    RawSeries raw;
    raw.channel_names = {"a"};
    raw.channels = {{0, 1, 2, 3, 4, 5, 6, 7, 8, 9}};
    const NormalizedSeries norm = normalize(raw);

    PreprocessConfig cfg;
    cfg.look_back = 4;
    cfg.look_ahead = 1;
    cfg.in_grid = 10;
    cfg.out_grid = 10;
    const std::vector<QuantizationGrid> grids{build_static_grid(10)};
    const WindowedDataset ds = build_windows(norm, grids, build_static_grid(10), cfg);

    const WindowedDataset s1 = subsample(ds, 0.4, 99);
    CHECK(s1.num_examples == 2); // round(0.4 * 5)
    const WindowedDataset s2 = subsample(ds, 0.4, 99);
    CHECK(s1.inputs == s2.inputs);
    CHECK(s1.targets == s2.targets);

    // Full fraction is a permutation: same target multiset, usually new order.
    const WindowedDataset p = subsample(ds, 1.0, 123);
    CHECK(p.num_examples == 5);
    std::multiset<std::uint16_t> a(p.targets.begin(), p.targets.end());
    std::multiset<std::uint16_t> b(ds.targets.begin(), ds.targets.end());
    CHECK(a == b);

    CHECK_THROWS_AS((void)subsample(ds, 0.0, 1), std::invalid_argument);
    CHECK_THROWS_AS((void)subsample(ds, 1.5, 1), std::invalid_argument);
}

TEST_CASE("window concatenation requires matching shapes") {
    RawSeries raw;
    raw.channel_names = {"a"};
    raw.channels = {{0, 1, 2, 3, 4, 5, 6, 7, 8, 9}};
    const NormalizedSeries norm = normalize(raw);

    PreprocessConfig cfg;
    cfg.look_back = 3;
    cfg.look_ahead = 1;
    cfg.in_grid = 8;
    cfg.out_grid = 8;
    const std::vector<QuantizationGrid> grids{build_static_grid(8)};
    const WindowedDataset ds = build_windows(norm, grids, build_static_grid(8), cfg);

    const std::vector<WindowedDataset> parts{ds, ds};
    const WindowedDataset merged = concat_windows(parts);
    CHECK(merged.num_examples == 2 * ds.num_examples);
    CHECK(merged.targets.size() == 2 * ds.targets.size());

    WindowedDataset other = ds;
    other.in_grid = 16;
    const std::vector<WindowedDataset> bad{ds, other};
    CHECK_THROWS_AS((void)concat_windows(bad), std::invalid_argument);
}
