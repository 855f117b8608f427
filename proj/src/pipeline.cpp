#include "qgdetect/pipeline.hpp"
#include "qgdetect/errors.hpp"
#include "qgdetect/io_util.hpp"
#include "qgdetect/log.hpp"
#include "qgdetect/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace qgd {

using nlohmann::json;

void ModelHyper::validate() const {
    if (cells < 1) throw std::invalid_argument("cells must be >= 1");
    if (layers < 1) throw std::invalid_argument("layers must be >= 1");
    fit.validate();
}

std::vector<int> quantize_channel(const NormalizedSeries& series,
                                  const QuantizationGrid& grid, std::size_t channel) {
    if (channel >= series.channels.size())
        throw std::invalid_argument("quantize_channel: channel out of range");
    const auto& ch = series.channels[channel];
    std::vector<int> out(ch.size());
    for (std::size_t t = 0; t < ch.size(); ++t) out[t] = grid.quantize(ch[t]);
    return out;
}

GridSet build_grids(const NormalizedSeries& train, const PreprocessConfig& cfg) {
    cfg.validate();
    if (static_cast<std::size_t>(cfg.target_channel) >= train.channels.size())
        throw std::invalid_argument("build_grids: target_channel out of range");

    GridSet g;
    for (std::size_t c = 0; c < train.channels.size(); ++c) {
        g.input.push_back(cfg.in_algorithm == GridKind::Static
                              ? build_static_grid(cfg.in_grid)
                              : build_adaptive_grid(train.channels[c], cfg.in_grid));
    }
    g.output = cfg.out_algorithm == GridKind::Static
                   ? build_static_grid(cfg.out_grid)
                   : build_adaptive_grid(train.channels[cfg.target_channel], cfg.out_grid);
    g.norm_bounds = train.norm_bounds;
    return g;
}

std::vector<int> predict_series(const GruClassifier& model,
                                const NormalizedSeries& series,
                                std::span<const QuantizationGrid> in_grids,
                                const PreprocessConfig& cfg) {
    cfg.validate();
    if (model.look_back != static_cast<std::size_t>(cfg.look_back) ||
        model.in_grid != cfg.in_grid || model.out_grid != cfg.out_grid)
        throw config_mismatch_error("predict_series: model was built under a different config");
    if (model.input_channels != series.channels.size() ||
        in_grids.size() != series.channels.size())
        throw std::invalid_argument("predict_series: channel count mismatch");

    const std::size_t lb = cfg.look_back;
    const std::size_t la = cfg.look_ahead;
    const std::size_t len = series.length();
    if (len <= lb + la)
        throw std::invalid_argument("predict_series: series shorter than look_back + look_ahead");

    const std::size_t nch = series.channels.size();
    std::vector<std::vector<std::uint16_t>> q(nch);
    for (std::size_t c = 0; c < nch; ++c) {
        q[c].resize(len);
        for (std::size_t t = 0; t < len; ++t)
            q[c][t] = static_cast<std::uint16_t>(in_grids[c].quantize(series.channels[c][t]));
    }

    GruEvaluator ev(model);
    std::vector<std::uint16_t> buf(lb * nch);
    std::vector<int> out;
    out.reserve(len - lb - la);
    for (std::size_t t = lb + la; t < len; ++t) {
        const std::size_t row0 = t - la - lb + 1;
        for (std::size_t s = 0; s < lb; ++s)
            for (std::size_t c = 0; c < nch; ++c) buf[s * nch + c] = q[c][row0 + s];
        out.push_back(ev.predict(buf));
    }
    return out;
}

namespace {

std::vector<Bounds> union_bounds(const RawSeries& a, const RawSeries* b) {
    std::vector<Bounds> out(a.channels.size());
    for (std::size_t c = 0; c < a.channels.size(); ++c) {
        auto [mn, mx] = std::minmax_element(a.channels[c].begin(), a.channels[c].end());
        Bounds bd{*mn, *mx};
        if (b) {
            auto [mn2, mx2] =
                std::minmax_element(b->channels[c].begin(), b->channels[c].end());
            bd.min = std::min(bd.min, *mn2);
            bd.max = std::max(bd.max, *mx2);
        }
        out[c] = bd;
    }
    return out;
}

std::size_t count_params(const GruClassifier& m) {
    std::size_t n = 0;
    for (const GruCell& c : m.layers)
        n += 3 * (c.hidden_size * c.input_size + c.hidden_size * c.hidden_size +
                  c.hidden_size);
    n += m.dense_w.rows * m.dense_w.cols + m.dense_b.size();
    return n;
}

} // namespace

DetectorSetup run_setup(const PipelineData& data, const PipelineConfig& cfg) {
    cfg.pre.validate();
    cfg.model.validate();
    cfg.rejection.validate();
    data.train.validate();
    data.test.validate();
    if (data.train.channels.size() != data.test.channels.size())
        throw std::invalid_argument("run_setup: train/test channel count mismatch");

    const RawSeries train_raw = decimate(data.train, cfg.pre.decimation);
    const RawSeries test_raw = decimate(data.test, cfg.pre.decimation);

    const std::vector<Bounds> bounds =
        cfg.norm_bounds == NormBounds::All ? union_bounds(train_raw, &test_raw)
                                           : union_bounds(train_raw, nullptr);
    const NormalizedSeries train = normalize(train_raw, &bounds);
    const NormalizedSeries test = normalize(test_raw, &bounds);

    DetectorSetup s;
    s.config = cfg;
    s.grids = build_grids(train, cfg.pre);

    log::info("building windows over " + std::to_string(train.length()) + " samples");
    const WindowedDataset all_windows =
        build_windows(train, s.grids.input, s.grids.output, cfg.pre);
    const WindowedDataset fit_ds =
        subsample(all_windows, cfg.pre.samples_percentage, rng::derive(cfg.pre.seed, 11));

    s.model = GruClassifier::create(cfg.pre, train.channels.size(), cfg.model.cells,
                                    cfg.model.layers, rng::derive(cfg.pre.seed, 13));
    FitHyper fh = cfg.model.fit;
    fh.seed = rng::derive(cfg.pre.seed, 17);
    log::info("fitting on " + std::to_string(fit_ds.num_examples) + " examples");
    s.train_report = fit(s.model, fit_ds, fh);

    const std::size_t t0 = cfg.pre.look_back + cfg.pre.look_ahead;

    log::info("collecting training-series candidates");
    const std::vector<int> train_pred =
        predict_series(s.model, train, s.grids.input, cfg.pre);
    std::vector<int> train_real = quantize_channel(train, s.grids.output,
                                                   cfg.pre.target_channel);
    train_real.erase(train_real.begin(), train_real.begin() + t0);
    s.train_series_accuracy = accuracy(train_pred, train_real);
    s.train_candidates =
        collect_candidates(train_pred, train_real, s.grids.output, cfg.rejection);

    s.thresholds = auto_thresholds(s.train_candidates);
    s.rules = s.thresholds.best;
    const DetectionRun check = apply_rules(s.train_candidates, s.rules);
    if (!check.confirmed.empty())
        throw error("internal: threshold search left " +
                    std::to_string(check.confirmed.size()) +
                    " training candidates confirmed");

    log::info("scoring the test series");
    const std::vector<int> test_pred =
        predict_series(s.model, test, s.grids.input, cfg.pre);
    std::vector<int> test_real =
        quantize_channel(test, s.grids.output, cfg.pre.target_channel);
    test_real.erase(test_real.begin(), test_real.begin() + t0);
    s.test_candidates =
        collect_candidates(test_pred, test_real, s.grids.output, cfg.rejection);
    s.test_run = apply_rules(s.test_candidates, s.rules, t0);
    s.test_truth = test.anomaly_intervals;
    s.test_report = DetectionReport::build(s.test_run.anomalies, s.test_truth);
    return s;
}

// ---------------------------------------------------------------------------
// Sweep

void SweepGrid::validate() const {
    auto check = [](const std::vector<int>& v, const char* what) {
        if (v.empty())
            throw std::invalid_argument(std::string("sweep grid: empty ") + what);
        for (int x : v)
            if (x < 1)
                throw std::invalid_argument(std::string("sweep grid: bad ") + what);
    };
    check(in_grid, "in_grid");
    check(out_grid, "out_grid");
    check(look_back, "look_back");
    check(cells, "cells");
}

SweepCriterion sweep_criterion_from_string(const std::string& s) {
    if (s == "best_length") return SweepCriterion::BestLength;
    if (s == "best_cum_amp") return SweepCriterion::BestCumAmp;
    if (s == "best_max_amp") return SweepCriterion::BestMaxAmp;
    if (s == "best_accuracy") return SweepCriterion::BestAccuracy;
    if (s == "balanced") return SweepCriterion::Balanced;
    throw std::invalid_argument("unknown sweep criterion '" + s + "'");
}

const char* to_string(SweepCriterion c) {
    switch (c) {
        case SweepCriterion::BestLength: return "best_length";
        case SweepCriterion::BestCumAmp: return "best_cum_amp";
        case SweepCriterion::BestMaxAmp: return "best_max_amp";
        case SweepCriterion::BestAccuracy: return "best_accuracy";
        case SweepCriterion::Balanced: return "balanced";
    }
    return "?";
}

namespace {

// Primary sort key, smaller is better.
double criterion_value(const SweepEntry& e, SweepCriterion c) {
    switch (c) {
        case SweepCriterion::BestLength: return e.false_maxima[0];
        case SweepCriterion::BestCumAmp: return e.false_maxima[1];
        case SweepCriterion::BestMaxAmp: return e.false_maxima[2];
        case SweepCriterion::BestAccuracy: return -e.train_accuracy;
        case SweepCriterion::Balanced: return 0.0; // handled by rank sum
    }
    return 0.0;
}

} // namespace

SweepResult sweep(const PipelineData& data, const PipelineConfig& base,
                  const SweepGrid& grid, SweepCriterion criterion) {
    grid.validate();

    SweepResult res;
    res.criterion = criterion;
    for (int ig : grid.in_grid)
        for (int og : grid.out_grid)
            for (int lb : grid.look_back)
                for (int cells : grid.cells) {
                    PipelineConfig cfg = base;
                    cfg.pre.in_grid = ig;
                    cfg.pre.out_grid = og;
                    cfg.pre.look_back = lb;
                    cfg.model.cells = cells;
                    log::info("sweep: in_grid=" + std::to_string(ig) +
                              " out_grid=" + std::to_string(og) +
                              " look_back=" + std::to_string(lb) +
                              " cells=" + std::to_string(cells));
                    DetectorSetup s = run_setup(data, cfg);

                    SweepEntry e;
                    e.in_grid = ig;
                    e.out_grid = og;
                    e.look_back = lb;
                    e.cells = cells;
                    e.param_count = count_params(s.model);
                    e.train_accuracy = s.train_report.train_accuracy.back();
                    e.val_accuracy = s.train_report.val_accuracy.empty()
                                         ? 0.0
                                         : s.train_report.val_accuracy.back();
                    e.series_accuracy = s.train_series_accuracy;
                    e.false_maxima = s.thresholds.maxima;
                    e.rules = s.rules;
                    e.saved_area = s.thresholds.saved_area;
                    e.test_report = s.test_report;
                    res.ranked.push_back(e);
                }

    std::vector<double> primary(res.ranked.size(), 0.0);
    if (criterion == SweepCriterion::Balanced) {
        // Rank sum over the four single criteria; ties share a rank.
        for (std::size_t i = 0; i < res.ranked.size(); ++i) {
            double ranksum = 0.0;
            for (SweepCriterion c : {SweepCriterion::BestLength, SweepCriterion::BestCumAmp,
                                     SweepCriterion::BestMaxAmp, SweepCriterion::BestAccuracy}) {
                const double vi = criterion_value(res.ranked[i], c);
                std::size_t better = 0;
                for (const SweepEntry& other : res.ranked)
                    if (criterion_value(other, c) < vi) ++better;
                ranksum += static_cast<double>(better);
            }
            primary[i] = ranksum;
        }
    } else {
        for (std::size_t i = 0; i < res.ranked.size(); ++i)
            primary[i] = criterion_value(res.ranked[i], criterion);
    }

    std::vector<std::size_t> order(res.ranked.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (primary[a] != primary[b]) return primary[a] < primary[b];
        return res.ranked[a].param_count < res.ranked[b].param_count;
    });
    std::vector<SweepEntry> ranked;
    ranked.reserve(order.size());
    for (std::size_t i : order) ranked.push_back(std::move(res.ranked[i]));
    res.ranked = std::move(ranked);
    return res;
}

std::string SweepResult::to_csv() const {
    std::ostringstream out;
    out << "in_grid,out_grid,look_back,cells,params,train_accuracy,val_accuracy,"
           "series_accuracy,false_max_length,false_max_cum_amp,false_max_max_amp,"
           "rule_length,rule_cum_amp,rule_max_amp,saved_area,"
        << DetectionReport::csv_header() << '\n';
    for (const SweepEntry& e : ranked) {
        out << e.in_grid << ',' << e.out_grid << ',' << e.look_back << ',' << e.cells
            << ',' << e.param_count << ',' << format_double(e.train_accuracy) << ','
            << format_double(e.val_accuracy) << ',' << format_double(e.series_accuracy)
            << ',' << format_double(e.false_maxima[0]) << ','
            << format_double(e.false_maxima[1]) << ','
            << format_double(e.false_maxima[2]) << ',' << format_double(e.rules.length)
            << ',' << format_double(e.rules.cum_amp) << ','
            << format_double(e.rules.max_amp) << ',' << format_double(e.saved_area)
            << ',' << e.test_report.csv_row() << '\n';
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// Oversensitivity

OversensitivityOutcome handle_oversensitivity(const DetectorSetup& setup) {
    OversensitivityOutcome out;
    out.rules = setup.rules;

    // Split confirmed detections into false and true positives by overlap.
    std::vector<const AnomalyCandidate*> fps, tps;
    for (std::size_t i = 0; i < setup.test_run.anomalies.size(); ++i) {
        const Interval& iv = setup.test_run.anomalies[i];
        const bool hit = std::any_of(setup.test_truth.begin(), setup.test_truth.end(),
                                     [&](const Interval& t) { return t.overlaps(iv); });
        (hit ? tps : fps).push_back(&setup.test_run.confirmed[i]);
    }
    if (fps.empty()) return out; // nothing to do

    double best_gap = 0.0;
    bool separable = false;
    Property best_prop = Property::Length;
    double best_max_fp = 0.0, best_min_tp = 0.0;

    for (std::size_t a = 0; a < 3; ++a) {
        const Property p = all_properties[a];
        double max_fp = 0.0;
        for (const AnomalyCandidate* c : fps)
            max_fp = std::max(max_fp, candidate_property(*c, p));
        double min_tp = std::numeric_limits<double>::infinity();
        for (const AnomalyCandidate* c : tps)
            min_tp = std::min(min_tp, candidate_property(*c, p));
        if (!(min_tp > max_fp)) continue;

        const double norm = setup.thresholds.maxima[a] > 0.0
                                ? setup.thresholds.maxima[a]
                                : 1.0;
        const double gap = std::isinf(min_tp)
                               ? std::numeric_limits<double>::infinity()
                               : (min_tp - max_fp) / norm;
        if (!separable || gap > best_gap) {
            separable = true;
            best_gap = gap;
            best_prop = p;
            best_max_fp = max_fp;
            best_min_tp = min_tp;
        }
    }

    if (!separable) {
        out.action = OversensitivityOutcome::Action::Escalate;
        return out;
    }

    // Lowest histogram boundary inside the gap keeps every true positive.
    double thr = best_max_fp;
    const auto& bounds = setup.thresholds.boundaries[static_cast<std::size_t>(best_prop)];
    for (double b : bounds) {
        if (b >= best_max_fp && b < best_min_tp) {
            thr = b;
            break;
        }
    }

    out.action = OversensitivityOutcome::Action::Adjusted;
    out.adjusted = best_prop;
    out.old_threshold = setup.rules.get(best_prop);
    out.new_threshold = thr;
    out.rules.set(best_prop, thr);
    return out;
}

// ---------------------------------------------------------------------------
// Config plumbing

PreprocessConfig preprocess_from_config(const ConfigFile& cfg) {
    PreprocessConfig p;
    p.look_back = static_cast<int>(cfg.get_int_or("", "look_back", p.look_back));
    p.look_ahead = static_cast<int>(cfg.get_int_or("", "look_ahead", p.look_ahead));
    p.in_grid = static_cast<int>(cfg.get_int_or("", "in_grid", p.in_grid));
    p.out_grid = static_cast<int>(cfg.get_int_or("", "out_grid", p.out_grid));
    p.in_algorithm = grid_kind_from_string(cfg.get_or("", "in_algorithm", "adaptive"));
    p.out_algorithm = grid_kind_from_string(cfg.get_or("", "out_algorithm", "adaptive"));
    p.samples_percentage =
        cfg.get_double_or("", "samples_percentage", p.samples_percentage);
    p.target_channel = static_cast<int>(cfg.get_int_or("", "target_channel", 0));
    p.seed = cfg.get_u64_or("", "seed", 0);
    p.decimation = static_cast<int>(cfg.get_int_or("", "decimation", 1));
    p.validate();
    return p;
}

namespace {

RejectionPolicy rejection_from_string(const std::string& s) {
    RejectionPolicy pol;
    if (s == "first_true") return pol;
    if (s.rfind("true_count:", 0) == 0) {
        pol.true_count = std::stoi(s.substr(11));
    } else if (s.rfind("true_ratio:", 0) == 0) {
        pol.true_ratio = std::stod(s.substr(11));
    } else {
        throw parse_error("unknown rejection policy '" + s + "'");
    }
    pol.validate();
    return pol;
}

} // namespace

PipelineConfig pipeline_from_config(const ConfigFile& cfg) {
    static constexpr std::string_view model_keys[] = {
        "cells", "layers", "epochs", "batch_size", "learning_rate",
        "validation_fraction", "optimizer",
    };
    static constexpr std::string_view analyzer_keys[] = {
        "rejection", "min_f1", "min_f2",
    };
    cfg.check_known_keys("model", model_keys);
    cfg.check_known_keys("analyzer", analyzer_keys);

    PipelineConfig pc;
    pc.pre = preprocess_from_config(cfg);

    pc.model.cells = static_cast<int>(cfg.get_int_or("model", "cells", 32));
    pc.model.layers = static_cast<int>(cfg.get_int_or("model", "layers", 1));
    pc.model.fit.epochs = static_cast<int>(cfg.get_int_or("model", "epochs", 50));
    pc.model.fit.batch_size = static_cast<int>(cfg.get_int_or("model", "batch_size", 64));
    pc.model.fit.learning_rate = cfg.get_double_or("model", "learning_rate", 0.05);
    pc.model.fit.validation_fraction =
        cfg.get_double_or("model", "validation_fraction", 0.1);
    const std::string opt = cfg.get_or("model", "optimizer", "sgd");
    if (opt == "sgd") {
        pc.model.fit.optimizer = FitHyper::Opt::Sgd;
    } else if (opt == "adam") {
        pc.model.fit.optimizer = FitHyper::Opt::Adam;
    } else {
        throw parse_error("unknown optimizer '" + opt + "'");
    }
    pc.model.fit.seed = pc.pre.seed;
    pc.model.validate();

    const std::string nb = cfg.get_or("", "norm_bounds", "all");
    if (nb == "all") {
        pc.norm_bounds = NormBounds::All;
    } else if (nb == "train_only") {
        pc.norm_bounds = NormBounds::TrainOnly;
    } else {
        throw parse_error("norm_bounds must be 'all' or 'train_only', got '" + nb + "'");
    }

    pc.rejection = rejection_from_string(cfg.get_or("analyzer", "rejection", "first_true"));
    pc.min_f1 = cfg.get_double_or("analyzer", "min_f1", 0.0);
    pc.min_f2 = cfg.get_double_or("analyzer", "min_f2", 0.0);
    return pc;
}

SweepGrid sweep_grid_from_config(const ConfigFile& cfg) {
    static constexpr std::string_view sweep_keys[] = {
        "in_grid", "out_grid", "look_back", "cells", "criterion",
    };
    cfg.check_known_keys("sweep", sweep_keys);

    auto ints = [&](const char* key) {
        std::vector<int> out;
        for (long long v : cfg.get_int_list("sweep", key)) out.push_back(static_cast<int>(v));
        return out;
    };
    SweepGrid g;
    g.in_grid = ints("in_grid");
    g.out_grid = ints("out_grid");
    g.look_back = ints("look_back");
    g.cells = ints("cells");
    g.validate();
    return g;
}

// ---------------------------------------------------------------------------
// Artifacts

void save_rules(const std::filesystem::path& path, const RuleSet& rules) {
    json j{{"length", rules.length},
           {"cum_amp", rules.cum_amp},
           {"max_amp", rules.max_amp}};
    atomic_write_text(path, j.dump(2) + "\n");
}

RuleSet load_rules(const std::filesystem::path& path) {
    const std::string text = read_text(path);
    try {
        json j = json::parse(text);
        RuleSet r;
        r.length = j.at("length").get<double>();
        r.cum_amp = j.at("cum_amp").get<double>();
        r.max_amp = j.at("max_amp").get<double>();
        return r;
    } catch (const json::exception& e) {
        throw parse_error("rules " + path.string() + ": " + e.what());
    }
}

std::string thresholds_to_json(const ThresholdSearchResult& r) {
    json j{{"maxima", json{{"length", r.maxima[0]},
                           {"cum_amp", r.maxima[1]},
                           {"max_amp", r.maxima[2]}}},
           {"boundaries", json{{"length", r.boundaries[0]},
                               {"cum_amp", r.boundaries[1]},
                               {"max_amp", r.boundaries[2]}}},
           {"rules", json{{"length", r.best.length},
                          {"cum_amp", r.best.cum_amp},
                          {"max_amp", r.best.max_amp}}},
           {"saved_area", r.saved_area},
           {"fallback", r.fallback}};
    return j.dump(2) + "\n";
}

std::string candidates_to_csv(std::span<const AnomalyCandidate> candidates) {
    std::ostringstream out;
    out << "start,length,cum_amp,max_amp\n";
    for (const AnomalyCandidate& c : candidates)
        out << c.start << ',' << c.length() << ',' << format_double(c.cum_amp()) << ','
            << format_double(c.max_amp()) << '\n';
    return out.str();
}

std::string intervals_to_json(std::span<const Interval> intervals) {
    json arr = json::array();
    for (const Interval& iv : intervals)
        arr.push_back(json{{"begin", iv.begin}, {"end", iv.end}});
    json j{{"anomalies", arr}};
    return j.dump(2) + "\n";
}

std::vector<Interval> intervals_from_json(const std::string& text) {
    try {
        json j = json::parse(text);
        std::vector<Interval> out;
        for (const json& iv : j.at("anomalies"))
            out.push_back({iv.at("begin").get<std::size_t>(),
                           iv.at("end").get<std::size_t>()});
        return out;
    } catch (const json::exception& e) {
        throw parse_error(std::string("anomaly intervals: ") + e.what());
    }
}

} // namespace qgd
