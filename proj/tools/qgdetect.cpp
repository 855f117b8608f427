#include "qgdetect/bundle.hpp"
#include "qgdetect/errors.hpp"
#include "qgdetect/features.hpp"
#include "qgdetect/io_util.hpp"
#include "qgdetect/log.hpp"
#include "qgdetect/pipeline.hpp"
#include "qgdetect/rng.hpp"
#include "qgdetect/synth.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace qgd;
using nlohmann::json;

namespace {

struct CommonArgs {
    std::string config;
    std::string out = ".";
    std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool config_required = true) {
    auto* c = cmd->add_option("--config", args.config, "Config file");
    if (config_required) c->required();
    cmd->add_option("--out", args.out, "Artifact directory");
    cmd->add_option("--seed", args.seed, "Seed override");
}

constexpr std::string_view top_level_keys[] = {
    "look_back",  "look_ahead",         "in_grid",        "out_grid",
    "in_algorithm", "out_algorithm",    "samples_percentage",
    "target_channel", "seed",           "decimation",     "norm_bounds",
    "train_csv",  "test_csv",           "channels",
};

ConfigFile load_config(const CommonArgs& args) {
    ConfigFile cfg = ConfigFile::parse_file(args.config);
    cfg.check_known_keys("", top_level_keys);
    if (args.seed) cfg.sections[""]["seed"] = std::to_string(*args.seed);
    return cfg;
}

// Channel selection from the config's `channels` list, when present.
RawSeries load_series(const ConfigFile& cfg, const fs::path& path) {
    if (cfg.has("", "channels")) {
        const std::vector<std::string> want = cfg.get_list("", "channels");
        return load_csv(path, &want);
    }
    return load_csv(path, nullptr);
}

fs::path config_path(const ConfigFile& cfg, const std::string& key) {
    if (!cfg.has("", key))
        throw parse_error(cfg.origin + ": missing required key '" + key + "'");
    fs::path p = cfg.get("", key);
    if (p.is_relative()) p = fs::path(cfg.origin).parent_path() / p;
    return p;
}

void ensure_outdir(const std::string& out) { fs::create_directories(out); }

// What `train` persists and the later stages replay: decimated, normalized
// training series under the bundle's stored bounds.
NormalizedSeries replay_normalization(const RawSeries& raw, const ModelBundle& bundle) {
    const RawSeries dec = decimate(raw, bundle.config.decimation);
    if (bundle.grids.norm_bounds.size() != dec.channels.size())
        throw config_mismatch_error("bundle stores " +
                                    std::to_string(bundle.grids.norm_bounds.size()) +
                                    " channel bounds, series has " +
                                    std::to_string(dec.channels.size()) + " channels");
    return normalize(dec, &bundle.grids.norm_bounds);
}

struct SeriesPredictions {
    std::vector<int> predicted;
    std::vector<int> real;            // aligned with predicted
    std::size_t first_index = 0;      // series index of prediction 0
    std::vector<AnomalyCandidate> candidates;
};

SeriesPredictions predict_and_collect(const ModelBundle& bundle,
                                      const NormalizedSeries& series,
                                      const RejectionPolicy& policy) {
    SeriesPredictions sp;
    sp.first_index = static_cast<std::size_t>(bundle.config.look_back) +
                     static_cast<std::size_t>(bundle.config.look_ahead);
    sp.predicted = predict_series(bundle.model, series, bundle.grids.input, bundle.config);
    sp.real = quantize_channel(series, bundle.grids.output,
                               static_cast<std::size_t>(bundle.config.target_channel));
    sp.real.erase(sp.real.begin(), sp.real.begin() + static_cast<long>(sp.first_index));
    sp.candidates = collect_candidates(sp.predicted, sp.real, bundle.grids.output, policy);
    return sp;
}

json grid_to_json(const QuantizationGrid& g, std::span<const double> samples) {
    const GridDiagnostics d = diagnostics(g, samples);
    json counts = json::array();
    for (std::size_t c : d.counts) counts.push_back(c);
    json fractions = json::array();
    for (double f : d.fractions) fractions.push_back(f);
    return json{{"kind", to_string(g.kind)},
                {"classes", g.m},
                {"edges", g.edges},
                {"counts", counts},
                {"fractions", fractions},
                {"median_bin_width", d.median_bin_width}};
}

int cmd_gen(const CommonArgs& args) {
    const ConfigFile cfg = load_config(args);
    CorpusSpec spec = corpus_from_config(cfg);
    if (args.seed) spec.base.seed = *args.seed;
    const Corpus corpus = generate_corpus(spec);
    ensure_outdir(args.out);
    write_csv(fs::path(args.out) / "train.csv", corpus.train);
    write_csv(fs::path(args.out) / "test.csv", corpus.test);
    std::cout << "train: " << corpus.train.length() << " samples, test: "
              << corpus.test.length() << " samples, "
              << corpus.test.anomaly_intervals.size() << " injected anomalies\n";
    return 0;
}

int cmd_preprocess(const CommonArgs& args) {
    const ConfigFile cfg = load_config(args);
    const PipelineConfig pc = pipeline_from_config(cfg);
    const RawSeries raw = load_series(cfg, config_path(cfg, "train_csv"));
    const RawSeries dec = decimate(raw, pc.pre.decimation);
    const NormalizedSeries norm = normalize(dec);
    const GridSet grids = build_grids(norm, pc.pre);
    const WindowedDataset all = build_windows(norm, grids.input, grids.output, pc.pre);
    const WindowedDataset sub =
        subsample(all, pc.pre.samples_percentage, rng::derive(pc.pre.seed, 11));

    json jgrids = json::array();
    for (std::size_t c = 0; c < grids.input.size(); ++c)
        jgrids.push_back(grid_to_json(grids.input[c], norm.channels[c]));
    json j{{"series",
            json{{"name", dec.name},
                 {"length", dec.length()},
                 {"channels", dec.channel_names},
                 {"sample_period", dec.sample_period}}},
           {"input_grids", jgrids},
           {"output_grid",
            grid_to_json(grids.output,
                         norm.channels[static_cast<std::size_t>(pc.pre.target_channel)])},
           {"windows", json{{"total", all.num_examples},
                            {"fitted", sub.num_examples},
                            {"look_back", all.look_back},
                            {"channels", all.num_channels}}}};
    ensure_outdir(args.out);
    atomic_write_text(fs::path(args.out) / "preprocess.json", j.dump(2) + "\n");
    std::cout << "windows: " << all.num_examples << " (" << sub.num_examples
              << " after subsampling)\n";
    return 0;
}

int cmd_train(const CommonArgs& args) {
    const ConfigFile cfg = load_config(args);
    const PipelineConfig pc = pipeline_from_config(cfg);

    const fs::path bundle_path = fs::path(args.out) / "bundle.json";
    if (fs::exists(bundle_path)) {
        const ModelBundle old = load_bundle(bundle_path);
        check_config_compatible(old.config, pc.pre);
    }

    const RawSeries train_raw_full = load_series(cfg, config_path(cfg, "train_csv"));
    if (!train_raw_full.anomaly_intervals.empty())
        log::info("training series carries " +
                  std::to_string(train_raw_full.anomaly_intervals.size()) +
                  " anomaly labels; the fit assumes it is clean");
    const RawSeries train_raw = decimate(train_raw_full, pc.pre.decimation);

    std::vector<Bounds> bounds(train_raw.channels.size());
    for (std::size_t c = 0; c < train_raw.channels.size(); ++c) {
        const auto [mn, mx] = std::minmax_element(train_raw.channels[c].begin(),
                                                  train_raw.channels[c].end());
        bounds[c] = {*mn, *mx};
    }
    if (pc.norm_bounds == NormBounds::All) {
        const RawSeries test_raw =
            decimate(load_series(cfg, config_path(cfg, "test_csv")), pc.pre.decimation);
        if (test_raw.channels.size() != bounds.size())
            throw config_mismatch_error("train/test channel count mismatch");
        for (std::size_t c = 0; c < bounds.size(); ++c) {
            const auto [mn, mx] = std::minmax_element(test_raw.channels[c].begin(),
                                                      test_raw.channels[c].end());
            bounds[c].min = std::min(bounds[c].min, *mn);
            bounds[c].max = std::max(bounds[c].max, *mx);
        }
    }

    const NormalizedSeries train = normalize(train_raw, &bounds);
    ModelBundle bundle;
    bundle.config = pc.pre;
    bundle.grids = build_grids(train, pc.pre);

    const WindowedDataset all = build_windows(train, bundle.grids.input,
                                              bundle.grids.output, pc.pre);
    const WindowedDataset fit_ds =
        subsample(all, pc.pre.samples_percentage, rng::derive(pc.pre.seed, 11));
    bundle.model = GruClassifier::create(pc.pre, train.channels.size(),
                                         static_cast<std::size_t>(pc.model.cells),
                                         static_cast<std::size_t>(pc.model.layers),
                                         rng::derive(pc.pre.seed, 13));
    FitHyper fh = pc.model.fit;
    fh.seed = rng::derive(pc.pre.seed, 17);
    log::info("fitting on " + std::to_string(fit_ds.num_examples) + " examples");
    const TrainReport report = fit(bundle.model, fit_ds, fh);

    ensure_outdir(args.out);
    save_bundle(bundle_path, bundle);
    atomic_write_text(fs::path(args.out) / "train_report.csv", report.to_csv());
    std::cout << "final train accuracy " << format_double(report.train_accuracy.back());
    if (!report.val_accuracy.empty())
        std::cout << ", val accuracy " << format_double(report.val_accuracy.back());
    std::cout << '\n';
    return 0;
}

int cmd_auto_thresholds(const CommonArgs& args) {
    const ConfigFile cfg = load_config(args);
    const PipelineConfig pc = pipeline_from_config(cfg);
    const ModelBundle bundle = load_bundle(fs::path(args.out) / "bundle.json");
    check_config_compatible(bundle.config, pc.pre);

    const RawSeries raw = load_series(cfg, config_path(cfg, "train_csv"));
    const NormalizedSeries train = replay_normalization(raw, bundle);
    const SeriesPredictions sp = predict_and_collect(bundle, train, pc.rejection);

    const ThresholdSearchResult ts = auto_thresholds(sp.candidates);
    const DetectionRun check = apply_rules(sp.candidates, ts.best);
    if (!check.confirmed.empty())
        throw error("internal: threshold search left " +
                    std::to_string(check.confirmed.size()) + " candidates confirmed");

    ensure_outdir(args.out);
    save_rules(fs::path(args.out) / "rules.json", ts.best);
    atomic_write_text(fs::path(args.out) / "thresholds.json", thresholds_to_json(ts));
    atomic_write_text(fs::path(args.out) / "candidates_train.csv",
                      candidates_to_csv(sp.candidates));
    std::cout << sp.candidates.size() << " candidates; rules: length > "
              << format_double(ts.best.length) << ", cum_amp > "
              << format_double(ts.best.cum_amp) << ", max_amp > "
              << format_double(ts.best.max_amp) << " (saved area "
              << format_double(ts.saved_area) << (ts.fallback ? ", fallback" : "")
              << ")\n";
    return 0;
}

int cmd_detect(const CommonArgs& args, const std::string& in_path) {
    const ConfigFile cfg = load_config(args);
    const PipelineConfig pc = pipeline_from_config(cfg);
    const ModelBundle bundle = load_bundle(fs::path(args.out) / "bundle.json");
    check_config_compatible(bundle.config, pc.pre);
    const RuleSet rules = load_rules(fs::path(args.out) / "rules.json");

    const fs::path input =
        in_path.empty() ? config_path(cfg, "test_csv") : fs::path(in_path);
    const RawSeries raw = load_series(cfg, input);
    const NormalizedSeries series = replay_normalization(raw, bundle);
    const SeriesPredictions sp = predict_and_collect(bundle, series, pc.rejection);
    const DetectionRun run = apply_rules(sp.candidates, rules, sp.first_index);

    std::ostringstream pred_csv;
    pred_csv << "t,real_class,predicted_class\n";
    for (std::size_t i = 0; i < sp.predicted.size(); ++i)
        pred_csv << sp.first_index + i << ',' << sp.real[i] << ',' << sp.predicted[i]
                 << '\n';

    ensure_outdir(args.out);
    atomic_write_text(fs::path(args.out) / "detection.json",
                      intervals_to_json(run.anomalies));
    atomic_write_text(fs::path(args.out) / "candidates_test.csv",
                      candidates_to_csv(sp.candidates));
    atomic_write_text(fs::path(args.out) / "predictions.csv", pred_csv.str());
    std::cout << sp.candidates.size() << " candidates, " << run.anomalies.size()
              << " confirmed anomalies\n";
    return 0;
}

int cmd_evaluate(const CommonArgs& args, const std::string& truth_path) {
    const ConfigFile cfg = load_config(args);
    const PipelineConfig pc = pipeline_from_config(cfg);
    const std::vector<Interval> detected =
        intervals_from_json(read_text(fs::path(args.out) / "detection.json"));

    const fs::path tpath =
        truth_path.empty() ? config_path(cfg, "test_csv") : fs::path(truth_path);
    const RawSeries truth_raw = decimate(load_series(cfg, tpath), pc.pre.decimation);

    const DetectionReport report =
        DetectionReport::build(detected, truth_raw.anomaly_intervals);
    ensure_outdir(args.out);
    atomic_write_text(fs::path(args.out) / "report.json", report.to_json());
    atomic_write_text(fs::path(args.out) / "report.csv",
                      DetectionReport::csv_header() + "\n" + report.csv_row() + "\n");
    std::cout << DetectionReport::csv_header() << '\n' << report.csv_row() << '\n';
    if (report.f1 < pc.min_f1 || report.f2 < pc.min_f2) {
        std::cerr << "quality requirements not met: F1 " << report.f1 << " (min "
                  << pc.min_f1 << "), F2 " << report.f2 << " (min " << pc.min_f2
                  << ")\n";
        return 3;
    }
    return 0;
}

int cmd_sweep(const CommonArgs& args, const std::string& criterion_flag) {
    const ConfigFile cfg = load_config(args);
    const PipelineConfig pc = pipeline_from_config(cfg);
    const SweepGrid grid = sweep_grid_from_config(cfg);
    const std::string crit_name =
        !criterion_flag.empty() ? criterion_flag
                                : cfg.get_or("sweep", "criterion", "balanced");
    const SweepCriterion crit = sweep_criterion_from_string(crit_name);

    PipelineData data;
    data.train = load_series(cfg, config_path(cfg, "train_csv"));
    data.test = load_series(cfg, config_path(cfg, "test_csv"));
    const SweepResult res = sweep(data, pc, grid, crit);

    ensure_outdir(args.out);
    atomic_write_text(fs::path(args.out) / "sweep.csv", res.to_csv());
    const SweepEntry& best = res.ranked.front();
    std::cout << res.ranked.size() << " candidates under " << to_string(crit)
              << "; best: in_grid=" << best.in_grid << " out_grid=" << best.out_grid
              << " look_back=" << best.look_back << " cells=" << best.cells << '\n';
    return 0;
}

int cmd_features(const CommonArgs& args, const std::string& in_path) {
    const ConfigFile cfg = load_config(args);
    static constexpr std::string_view feature_keys[] = {"channel", "window", "hop",
                                                        "ctm_radius_scale"};
    cfg.check_known_keys("features", feature_keys);
    const PreprocessConfig pre = preprocess_from_config(cfg);

    const fs::path input =
        in_path.empty() ? config_path(cfg, "train_csv") : fs::path(in_path);
    const RawSeries raw = decimate(load_series(cfg, input), pre.decimation);
    const NormalizedSeries norm = normalize(raw);

    const auto channel =
        static_cast<std::size_t>(cfg.get_int_or("features", "channel", pre.target_channel));
    const auto window =
        static_cast<std::size_t>(cfg.get_int_or("features", "window", 1024));
    const auto hop = static_cast<std::size_t>(
        cfg.get_int_or("features", "hop", static_cast<long long>(window)));
    FeatureOptions opts;
    opts.ctm_radius_scale = cfg.get_double_or("features", "ctm_radius_scale", 0.1);

    const FeatureMatrix fm = window_scan(norm, channel, window, hop, opts);
    ensure_outdir(args.out);
    write_feature_csv(fs::path(args.out) / "features.csv", fm);
    std::cout << fm.rows << " windows of " << window << " samples\n";
    return 0;
}

// --- report: plot-ready projections of existing artifacts ------------------

std::vector<std::vector<std::string>> read_csv_table(const fs::path& path,
                                                     std::vector<std::string>& header) {
    std::istringstream in(read_text(path));
    std::string line;
    if (!std::getline(in, line))
        throw parse_error(path.string() + ": empty file");
    auto split = [](const std::string& l) {
        std::vector<std::string> out;
        std::string cell;
        std::istringstream ls(l);
        while (std::getline(ls, cell, ',')) out.push_back(cell);
        return out;
    };
    header = split(line);
    std::vector<std::vector<std::string>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        rows.push_back(split(line));
        if (rows.back().size() != header.size())
            throw parse_error(path.string() + ": ragged row " +
                              std::to_string(rows.size()));
    }
    return rows;
}

std::size_t column_index(const std::vector<std::string>& header, const std::string& name,
                         const fs::path& path) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end())
        throw parse_error(path.string() + ": missing column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
}

// Same compartment scheme the threshold search uses: unit-wide bins for
// small integer ranges, ceil(log2 n) + 1 equal bins otherwise.
void append_histogram(std::ostringstream& out, const std::string& property,
                      std::vector<double> values, bool integral) {
    const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
    const double lo = *mn, hi = *mx;
    std::vector<double> edges;
    if (integral && hi - lo < 64.0) {
        for (double v = lo; v <= hi + 1.0; v += 1.0) edges.push_back(v);
    } else {
        const std::size_t bins =
            static_cast<std::size_t>(std::ceil(std::log2(
                static_cast<double>(std::max<std::size_t>(values.size(), 2))))) + 1;
        for (std::size_t i = 0; i <= bins; ++i)
            edges.push_back(lo + (hi - lo) * static_cast<double>(i) /
                                     static_cast<double>(bins));
    }
    std::vector<std::size_t> counts(edges.size() - 1, 0);
    for (double v : values) {
        std::size_t b = counts.size() - 1;
        for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
            if (v < edges[i + 1]) {
                b = i;
                break;
            }
        }
        ++counts[b];
    }
    for (std::size_t i = 0; i < counts.size(); ++i)
        out << property << ',' << format_double(edges[i]) << ','
            << format_double(edges[i + 1]) << ',' << counts[i] << '\n';
}

int cmd_report(const CommonArgs& args) {
    const fs::path dir(args.out);
    bool produced = false;

    const fs::path cand_path = dir / "candidates_train.csv";
    if (fs::exists(cand_path)) {
        std::vector<std::string> header;
        const auto rows = read_csv_table(cand_path, header);
        if (rows.empty())
            throw io_error(cand_path.string() + ": no candidates to histogram");
        std::ostringstream out;
        out << "property,bin_lo,bin_hi,count\n";
        for (const char* name : {"length", "cum_amp", "max_amp"}) {
            const std::size_t col = column_index(header, name, cand_path);
            std::vector<double> values;
            values.reserve(rows.size());
            for (const auto& r : rows) values.push_back(std::stod(r[col]));
            append_histogram(out, name, std::move(values),
                             std::string_view(name) == "length");
        }
        atomic_write_text(dir / "histograms.csv", out.str());
        std::cout << "histograms.csv from " << rows.size() << " candidates\n";
        produced = true;
    }

    const fs::path sweep_path = dir / "sweep.csv";
    if (fs::exists(sweep_path)) {
        std::vector<std::string> header;
        const auto rows = read_csv_table(sweep_path, header);
        if (rows.empty()) throw io_error(sweep_path.string() + ": empty sweep table");
        std::ostringstream out;
        out << "parameter,value,mean_series_accuracy,mean_val_accuracy,candidates\n";
        const std::size_t acc_col = column_index(header, "series_accuracy", sweep_path);
        const std::size_t val_col = column_index(header, "val_accuracy", sweep_path);
        for (const char* param : {"in_grid", "out_grid", "look_back", "cells"}) {
            const std::size_t pcol = column_index(header, param, sweep_path);
            std::map<long long, std::pair<std::array<double, 2>, std::size_t>> groups;
            for (const auto& r : rows) {
                auto& [sums, n] = groups[std::stoll(r[pcol])];
                sums[0] += std::stod(r[acc_col]);
                sums[1] += std::stod(r[val_col]);
                ++n;
            }
            for (const auto& [value, agg] : groups)
                out << param << ',' << value << ','
                    << format_double(agg.first[0] / static_cast<double>(agg.second))
                    << ','
                    << format_double(agg.first[1] / static_cast<double>(agg.second))
                    << ',' << agg.second << '\n';
        }
        atomic_write_text(dir / "accuracy_vs_params.csv", out.str());
        std::cout << "accuracy_vs_params.csv from " << rows.size() << " sweep rows\n";
        produced = true;
    }

    const fs::path pred_path = dir / "predictions.csv";
    const fs::path det_path = dir / "detection.json";
    if (fs::exists(pred_path) && fs::exists(det_path)) {
        std::vector<std::string> header;
        const auto rows = read_csv_table(pred_path, header);
        const std::vector<Interval> anomalies = intervals_from_json(read_text(det_path));
        const std::size_t tcol = column_index(header, "t", pred_path);
        const std::size_t rcol = column_index(header, "real_class", pred_path);
        const std::size_t pcol = column_index(header, "predicted_class", pred_path);
        std::ostringstream out;
        out << "t,real_class,predicted_class,in_anomaly\n";
        std::size_t iv = 0;
        for (const auto& r : rows) {
            const auto t = static_cast<std::size_t>(std::stoull(r[tcol]));
            while (iv < anomalies.size() && anomalies[iv].end <= t) ++iv;
            const bool inside =
                iv < anomalies.size() && anomalies[iv].begin <= t && t < anomalies[iv].end;
            out << t << ',' << r[rcol] << ',' << r[pcol] << ',' << (inside ? 1 : 0)
                << '\n';
        }
        atomic_write_text(dir / "detect_trace.csv", out.str());
        std::cout << "detect_trace.csv over " << rows.size() << " samples\n";
        produced = true;
    }

    if (!produced)
        throw io_error("no artifacts found in '" + args.out +
                       "' (expected candidates_train.csv, sweep.csv, or "
                       "predictions.csv + detection.json)");
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quantized-grid anomaly detection toolkit"};
    app.require_subcommand(1);

    CommonArgs gen_args, pre_args, train_args, thr_args, det_args, eval_args,
        sweep_args, feat_args, rep_args;
    std::string det_in, feat_in, eval_truth, sweep_criterion;

    add_common(app.add_subcommand("gen", "Generate a synthetic corpus"), gen_args);
    add_common(app.add_subcommand("preprocess",
                                  "Normalize, build grids and windows, report stats"),
               pre_args);
    add_common(app.add_subcommand("train", "Fit the classifier and save the bundle"),
               train_args);
    add_common(app.add_subcommand("auto-thresholds",
                                  "Derive rejection rules from the training series"),
               thr_args);
    auto* det = app.add_subcommand("detect", "Run detection with saved bundle + rules");
    add_common(det, det_args);
    det->add_option("--in", det_in, "Input CSV (default: test_csv from the config)");
    auto* ev = app.add_subcommand("evaluate", "Score detection.json against labels");
    add_common(ev, eval_args);
    ev->add_option("--truth", eval_truth, "Labeled CSV (default: test_csv)");
    auto* sw = app.add_subcommand("sweep", "Train one candidate per grid point and rank");
    add_common(sw, sweep_args);
    sw->add_option("--criterion", sweep_criterion,
                   "best_length|best_cum_amp|best_max_amp|best_accuracy|balanced");
    auto* ft = app.add_subcommand("features", "Window summary statistics to CSV");
    add_common(ft, feat_args);
    ft->add_option("--in", feat_in, "Input CSV (default: train_csv)");
    add_common(app.add_subcommand("report", "Project artifacts into plot-ready tables"),
               rep_args, false);

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand("gen")) return cmd_gen(gen_args);
        if (app.got_subcommand("preprocess")) return cmd_preprocess(pre_args);
        if (app.got_subcommand("train")) return cmd_train(train_args);
        if (app.got_subcommand("auto-thresholds")) return cmd_auto_thresholds(thr_args);
        if (app.got_subcommand("detect")) return cmd_detect(det_args, det_in);
        if (app.got_subcommand("evaluate")) return cmd_evaluate(eval_args, eval_truth);
        if (app.got_subcommand("sweep")) return cmd_sweep(sweep_args, sweep_criterion);
        if (app.got_subcommand("features")) return cmd_features(feat_args, feat_in);
        if (app.got_subcommand("report")) return cmd_report(rep_args);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
