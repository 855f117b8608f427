// Acceptance gate: one line per criterion, nonzero exit when any fails.
// Every check runs the real library end to end; limits are wall-clock,
// single-threaded.

#include "qgdetect/analyzer.hpp"
#include "qgdetect/bundle.hpp"
#include "qgdetect/features.hpp"
#include "qgdetect/gru.hpp"
#include "qgdetect/io_util.hpp"
#include "qgdetect/metrics.hpp"
#include "qgdetect/pipeline.hpp"
#include "qgdetect/quantizer.hpp"
#include "qgdetect/rng.hpp"
#include "qgdetect/signal_io.hpp"
#include "qgdetect/synth.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <unistd.h>
#include <vector>

using namespace qgd;
namespace fs = std::filesystem;

namespace {

using clock_type = std::chrono::steady_clock;

double seconds_since(clock_type::time_point t0) {
    return std::chrono::duration<double>(clock_type::now() - t0).count();
}

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

// --------------------------------------------------------------- criterion 1

Outcome c1_f_measures() {
    const auto t0 = clock_type::now();
    const double f1 = f_beta(0.8685, 1.0, 1.0);
    const double f2 = f_beta(0.8685, 1.0, 2.0);
    const double elapsed = seconds_since(t0);
    const bool ok = std::fabs(f1 - 0.9296) <= 5e-5 &&
                    std::fabs(f2 - 0.8920) <= 5e-5 && elapsed < 1e-3;
    return {ok, "recall 0.8685, precision 1 -> F1 " + fmt(f1) + ", F2 " + fmt(f2)};
}

// --------------------------------------------------------------- criterion 2

Outcome c2_adaptive_balance() {
    const auto t0 = clock_type::now();
    rng::engine g(101);
    std::vector<double> samples(100000);
    for (double& s : samples) s = rng::uniform01(g);

    const QuantizationGrid grid = build_adaptive_grid(samples, 8);
    const GridDiagnostics d = diagnostics(grid, samples);
    const double elapsed = seconds_since(t0);

    double lo = 1.0, hi = 0.0;
    long worst_dev = 0;
    const long target = static_cast<long>(samples.size()) / 8;
    for (std::size_t c = 0; c < d.counts.size(); ++c) {
        lo = std::min(lo, d.fractions[c]);
        hi = std::max(hi, d.fractions[c]);
        worst_dev = std::max(worst_dev,
                             std::labs(static_cast<long>(d.counts[c]) - target));
    }
    const bool ok = lo >= 0.08 && hi <= 0.14 && worst_dev <= 2 && elapsed < 1.0;
    return {ok, "100k uniform samples, m=8: occupancy in [" + fmt(lo) + ", " +
                    fmt(hi) + "], worst count deviation " +
                    std::to_string(worst_dev) + ", " + fmt(elapsed) + "s"};
}

// --------------------------------------------------------------- criterion 3

Outcome c3_heavy_tail() {
    const auto t0 = clock_type::now();
    rng::engine g(103);
    std::vector<double> samples(100000);
    for (double& s : samples) {
        // 99.9% of the mass clusters inside the first static bin [0, 0.125),
        // the rest stretches out to 1.
        s = rng::uniform01(g) < 0.999 ? 0.12 * rng::uniform01(g)
                                      : 0.125 + 0.875 * rng::uniform01(g);
    }

    const QuantizationGrid stat = build_static_grid(8);
    const QuantizationGrid adap = build_adaptive_grid(samples, 8);
    const GridDiagnostics ds = diagnostics(stat, samples);
    const GridDiagnostics da = diagnostics(adap, samples);

    const double worst_static = *std::max_element(ds.fractions.begin(), ds.fractions.end());
    const double worst_adaptive =
        *std::max_element(da.fractions.begin(), da.fractions.end());
    const bool ok =
        worst_static >= 0.99 && worst_adaptive <= 0.2 && seconds_since(t0) < 1.0;
    return {ok, "heavy-tailed sample: static grid crams " + fmt(worst_static) +
                    " of the mass into one class, adaptive " + fmt(worst_adaptive)};
}

// --------------------------------------------------------------- criterion 4

Outcome c4_gradient_check() {
    const auto t0 = clock_type::now();
    PreprocessConfig cfg;
    cfg.look_back = 3;
    cfg.look_ahead = 1;
    cfg.in_grid = 4;
    cfg.out_grid = 3;
    const GruClassifier model = GruClassifier::create(cfg, 2, 4, 1, 19);
    const std::vector<std::uint16_t> window{0, 3, 1, 2, 2, 0};
    const double err = gradient_check(model, window, 1);
    const double elapsed = seconds_since(t0);
    const bool ok = err < 1e-4 && elapsed < 10.0;
    return {ok, "worst relative gradient error " + fmt(err) + ", " + fmt(elapsed) + "s"};
}

// --------------------------------------------------------------- criterion 5

Outcome c5_learn_periodic() {
    const auto t0 = clock_type::now();

    SynthSpec spec;
    spec.length = 20000;
    spec.seed = 105;
    ChannelSpec ch;
    ch.name = "v0";
    ch.base = 0.4;
    ch.periodic = PeriodicSpec{PeriodicSpec::Wave::Triangle, 0.3, 32, 0.0};
    spec.channels = {ch};
    const NormalizedSeries series = normalize(generate_normal(spec));

    PreprocessConfig pre;
    pre.look_back = 8;
    pre.look_ahead = 1;
    pre.in_grid = 8;
    pre.out_grid = 8;
    pre.seed = 105;

    const GridSet grids = build_grids(series, pre);
    const WindowedDataset ds = build_windows(series, grids.input, grids.output, pre);

    GruClassifier model = GruClassifier::create(pre, 1, 32, 1, rng::derive(105, 13));
    FitHyper hyper;
    hyper.epochs = 50;
    hyper.batch_size = 64;
    hyper.learning_rate = 0.1;
    hyper.validation_fraction = 0.1;
    hyper.seed = rng::derive(105, 17);
    const TrainReport rep = fit(model, ds, hyper);

    double best_val = 0.0;
    std::size_t best_epoch = 0;
    for (std::size_t e = 0; e < rep.val_accuracy.size(); ++e)
        if (rep.val_accuracy[e] > best_val) {
            best_val = rep.val_accuracy[e];
            best_epoch = e + 1;
        }
    const double elapsed = seconds_since(t0);
    const bool ok = best_val > 0.95 && elapsed < 300.0;
    return {ok, "period-32 signal: validation accuracy " + fmt(best_val) +
                    " by epoch " + std::to_string(best_epoch) + ", " + fmt(elapsed) +
                    "s"};
}

// ------------------------------------------------------- criteria 6 and 7

std::vector<AnomalyCandidate> random_candidates(rng::engine& g, std::size_t count,
                                                std::size_t max_len) {
    std::vector<AnomalyCandidate> out;
    out.reserve(count);
    std::size_t pos = 0;
    for (std::size_t i = 0; i < count; ++i) {
        AnomalyCandidate c;
        c.start = pos;
        const std::size_t len = 1 + rng::below(g, max_len);
        c.amplitudes.resize(len);
        for (double& a : c.amplitudes) a = rng::uniform(g, 0.0, 1.0);
        c.amplitudes.back() = rng::uniform(g, 0.05, 1.0); // runs end on a miss
        if (c.amplitudes.front() == 0.0) c.amplitudes.front() = 0.05;
        pos += len + 1 + rng::below(g, 50);
        out.push_back(std::move(c));
    }
    return out;
}

Outcome c6_thresholds_confirm_zero() {
    const auto t0 = clock_type::now();
    rng::engine g(106);
    std::size_t worst_pop = 0;
    for (int rep = 0; rep < 100; ++rep) {
        const std::size_t count = 1 + rng::below(g, 1000);
        const std::vector<AnomalyCandidate> cands = random_candidates(g, count, 30);
        const ThresholdSearchResult res = auto_thresholds(cands);
        const DetectionRun run = apply_rules(cands, res.best);
        if (!run.confirmed.empty())
            return {false, "population of " + std::to_string(count) + " leaked " +
                               std::to_string(run.confirmed.size()) + " confirmations"};
        worst_pop = std::max(worst_pop, count);
    }
    const double elapsed = seconds_since(t0);
    return {elapsed < 30.0, "100 random populations (up to " +
                                std::to_string(worst_pop) +
                                " candidates) all confirm zero, " + fmt(elapsed) + "s"};
}

Outcome c7_search_equals_brute_force() {
    const auto t0 = clock_type::now();
    rng::engine g(107);
    for (int rep = 0; rep < 40; ++rep) {
        const std::size_t count = 1 + rng::below(g, 40);
        const std::vector<AnomalyCandidate> cands = random_candidates(g, count, 100);
        const ThresholdSearchResult res = auto_thresholds(cands);

        std::array<std::vector<double>, 3> options;
        for (std::size_t a = 0; a < 3; ++a) {
            options[a] = res.boundaries[a];
            options[a].insert(options[a].begin(), 0.0);
            options[a].erase(std::unique(options[a].begin(), options[a].end()),
                             options[a].end());
        }

        double best_area = 0.0;
        RuleSet best;
        bool found = false;
        for (double li : options[0])
            for (double cj : options[1])
                for (double mk : options[2]) {
                    const RuleSet rules{li, cj, mk};
                    bool leaks = false;
                    for (const AnomalyCandidate& c : cands)
                        if (above_thresholds(c, rules)) {
                            leaks = true;
                            break;
                        }
                    if (leaks) continue;
                    double area = 1.0;
                    if (li != 0.0) area *= 1.0 - li / res.maxima[0];
                    if (cj != 0.0) area *= 1.0 - cj / res.maxima[1];
                    if (mk != 0.0) area *= 1.0 - mk / res.maxima[2];
                    if (li == 0.0 && cj == 0.0 && mk == 0.0) area = 0.0;
                    if (area > best_area) {
                        best_area = area;
                        best = rules;
                        found = true;
                    }
                }
        if (!found) {
            best = RuleSet{res.maxima[0], 0.0, 0.0};
            best_area = 0.0;
        }

        if (!(res.best == best) || res.saved_area != best_area ||
            res.fallback == found)
            return {false, "searched rules diverge from brute force at repetition " +
                               std::to_string(rep)};
    }
    const double elapsed = seconds_since(t0);
    return {elapsed < 60.0,
            "40 exhaustive cross-checks agree on rules, area and fallback, " +
                fmt(elapsed) + "s"};
}

// --------------------------------------------------------------- criterion 8

PipelineConfig e2e_config() {
    PipelineConfig cfg;
    cfg.pre.look_back = 16;
    cfg.pre.look_ahead = 1;
    cfg.pre.in_grid = 16;
    cfg.pre.out_grid = 8;
    cfg.pre.samples_percentage = 0.15;
    cfg.pre.target_channel = 0;
    cfg.pre.seed = 11;
    cfg.model.cells = 32;
    cfg.model.layers = 1;
    cfg.model.fit.epochs = 10;
    cfg.model.fit.batch_size = 64;
    cfg.model.fit.learning_rate = 0.08;
    cfg.model.fit.validation_fraction = 0.1;
    cfg.rejection.true_count = 8;
    return cfg;
}

Outcome c8_end_to_end() {
    const auto t0 = clock_type::now();

    const CorpusSpec base_spec = corpus_from_config(ConfigFile::parse_string(
        "[synth]\n"
        "length = 700000\n"
        "train_length = 500000\n"
        "seed = 11\n"
        "anomalies = 200\n"
        "duration = 100\n"
        "min_gap = 256\n",
        "acceptance-e2e"));

    const RawSeries whole = generate_normal(base_spec.base);
    auto [train, clean_tail] = split_series(whole, base_spec.train_length);
    train.name = "train";

    AnomalyPlan plan = base_spec.plan;
    const RawSeries test_long = inject_steps(clean_tail, plan, 0, base_spec.base.seed);
    plan.duration = 50;
    const RawSeries test_short = inject_steps(clean_tail, plan, 0, base_spec.base.seed);

    const PipelineConfig cfg = e2e_config();
    const DetectorSetup setup = run_setup(PipelineData{train, test_long}, cfg);
    const DetectionReport& r100 = setup.test_report;

    // same trained detector, second deployment scenario with shorter steps
    const std::size_t t0_idx =
        static_cast<std::size_t>(cfg.pre.look_back + cfg.pre.look_ahead);
    const NormalizedSeries short_norm = normalize(test_short, &setup.grids.norm_bounds);
    const std::vector<int> pred =
        predict_series(setup.model, short_norm, setup.grids.input, cfg.pre);
    std::vector<int> real = quantize_channel(short_norm, setup.grids.output, 0);
    real.erase(real.begin(), real.begin() + static_cast<long>(t0_idx));
    const std::vector<AnomalyCandidate> cands =
        collect_candidates(pred, real, setup.grids.output, cfg.rejection);
    const DetectionRun run = apply_rules(cands, setup.rules, t0_idx);
    const DetectionReport r50 =
        DetectionReport::build(run.anomalies, short_norm.anomaly_intervals);

    const double elapsed = seconds_since(t0);
    const bool ok = r100.f1 >= 0.95 && r100.recall >= 0.95 && r50.f1 >= 0.80 &&
                    elapsed < 1200.0;
    return {ok, "500k-sample training; 100-sample steps: F1 " + fmt(r100.f1) +
                    ", recall " + fmt(r100.recall) + "; 50-sample steps: F1 " +
                    fmt(r50.f1) + "; " + fmt(elapsed) + "s"};
}

// --------------------------------------------------------------- criterion 9

Outcome c9_overlap_cases() {
    const auto t0 = clock_type::now();
    struct Case {
        std::vector<Interval> detected, truth;
        std::size_t tp, fp, fn;
    };
    const std::vector<Case> cases{
        {{{15, 30}}, {{10, 20}}, 1, 0, 0},
        {{{10, 12}, {14, 16}}, {{5, 20}}, 2, 0, 0},
        {{{0, 100}}, {{10, 20}, {50, 60}}, 1, 0, 0},
    };
    for (std::size_t i = 0; i < cases.size(); ++i) {
        const MatchCounts m = match_intervals(cases[i].detected, cases[i].truth);
        if (m.tp != cases[i].tp || m.fp != cases[i].fp || m.fn != cases[i].fn)
            return {false, "case " + std::to_string(i + 1) + " counted " +
                               std::to_string(m.tp) + "/" + std::to_string(m.fp) +
                               "/" + std::to_string(m.fn)};
    }
    if (seconds_since(t0) >= 1e-3) return {false, "overlap counting too slow"};
    return {true, "single-overlap, split detection and one-covers-two all count right"};
}

// -------------------------------------------------------------- criterion 10

PipelineData small_corpus() {
    CorpusSpec spec;
    spec.base.length = 16000;
    spec.base.seed = 110;
    ChannelSpec target;
    target.name = "v0";
    target.base = 0.4;
    target.periodic = PeriodicSpec{PeriodicSpec::Wave::Triangle, 0.3, 48, 0.0};
    target.noise_sigma = 0.001;
    ChannelSpec shifted = target;
    shifted.name = "v1";
    shifted.periodic->phase = 0.25;
    spec.base.channels = {target, shifted};
    spec.train_length = 12000;
    spec.plan.count = 6;
    spec.plan.duration = 40;
    spec.plan.height = 0.4;
    spec.plan.min_gap = 100;
    const Corpus corpus = generate_corpus(spec);
    return PipelineData{corpus.train, corpus.test};
}

Outcome c10_determinism() {
    const PipelineData data = small_corpus();
    PipelineConfig cfg;
    cfg.pre.look_back = 8;
    cfg.pre.in_grid = 8;
    cfg.pre.out_grid = 8;
    cfg.pre.samples_percentage = 0.3;
    cfg.pre.seed = 3;
    cfg.model.cells = 12;
    cfg.model.fit.epochs = 6;
    cfg.model.fit.batch_size = 32;
    cfg.model.fit.learning_rate = 0.2;
    cfg.rejection.true_count = 8;

    const fs::path dir =
        fs::temp_directory_path() / ("qgd-accept-" + std::to_string(::getpid()));
    fs::create_directories(dir);

    std::array<std::string, 2> bundle_bytes, report_bytes;
    for (int round = 0; round < 2; ++round) {
        const DetectorSetup s = run_setup(data, cfg);
        ModelBundle b;
        b.config = cfg.pre;
        b.grids = s.grids;
        b.model = s.model;
        const fs::path file = dir / ("bundle" + std::to_string(round) + ".json");
        save_bundle(file, b);
        bundle_bytes[round] = read_text(file);
        report_bytes[round] = s.train_report.to_csv() + s.test_report.to_json() +
                              candidates_to_csv(s.test_candidates);
    }
    fs::remove_all(dir);

    const bool ok =
        bundle_bytes[0] == bundle_bytes[1] && report_bytes[0] == report_bytes[1];
    return {ok, ok ? "two identical-seed runs wrote byte-identical bundles and reports"
                   : "reruns differ"};
}

// -------------------------------------------------------------- criterion 11

Outcome c11_features() {
    const auto t0 = clock_type::now();
    // Power-of-two sample count keeps the spectral feature on the fast
    // transform path at this scale.
    rng::engine g(111);
    std::vector<double> x(131072);
    for (double& v : x) v = rng::normal(g);
    const FeatureWindow f = extract(x);
    const bool kurt_ok = f.kurtosis >= 2.8 && f.kurtosis <= 3.2;

    SynthSpec spec;
    spec.length = 131072;
    spec.seed = 111;
    ChannelSpec ch;
    ch.name = "v0";
    ch.base = 0.4;
    ch.periodic = PeriodicSpec{PeriodicSpec::Wave::Triangle, 0.3, 96, 0.0};
    ch.noise_sigma = 0.002;
    spec.channels = {ch};
    const NormalizedSeries series = normalize(generate_normal(spec));

    bool rows_ok = true;
    for (std::size_t n : {std::size_t{1024}, std::size_t{512}, std::size_t{128}})
        if (window_scan(series, 0, n, n).rows != spec.length / n) rows_ok = false;

    const double elapsed = seconds_since(t0);
    const bool ok = kurt_ok && rows_ok && elapsed < 5.0;
    return {ok, "kurtosis of 131072 normal draws " + fmt(f.kurtosis) +
                    ", tiled window counts exact, " + fmt(elapsed) + "s"};
}

} // namespace

int main() {
    struct Criterion {
        const char* name;
        Outcome (*run)();
    };
    const std::vector<Criterion> criteria{
        {"f-measures match hand-computed values", c1_f_measures},
        {"adaptive grid balances a uniform sample", c2_adaptive_balance},
        {"adaptive grid resists heavy-tailed collapse", c3_heavy_tail},
        {"analytic gradients match central differences", c4_gradient_check},
        {"classifier learns a periodic sequence", c5_learn_periodic},
        {"automatic thresholds confirm zero training candidates", c6_thresholds_confirm_zero},
        {"threshold search equals exhaustive enumeration", c7_search_equals_brute_force},
        {"end-to-end detection meets the quality bar", c8_end_to_end},
        {"interval overlap counting matches the contract", c9_overlap_cases},
        {"identical seeds reproduce artifacts byte for byte", c10_determinism},
        {"window features are sane at scale", c11_features},
    };

    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome out;
        try {
            out = criteria[i].run();
        } catch (const std::exception& e) {
            out = {false, std::string("exception: ") + e.what()};
        }
        if (!out.pass) ++failures;
        std::printf("%s  %2zu. %s  (%s)\n", out.pass ? "PASS" : "FAIL", i + 1,
                    criteria[i].name, out.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria failed\n", failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
