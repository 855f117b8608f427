#pragma once

#include "qgdetect/analyzer.hpp"
#include "qgdetect/bundle.hpp"
#include "qgdetect/config.hpp"
#include "qgdetect/gru.hpp"
#include "qgdetect/metrics.hpp"

#include <array>
#include <filesystem>
#include <optional>

namespace qgd {

struct ModelHyper {
    int cells = 32;
    int layers = 1;
    FitHyper fit;

    void validate() const;
};

// Whether normalization bounds come from the whole corpus or the training
// part only (the latter avoids leaking test extremes into the mapping; the
// grids themselves are always built from training data).
enum class NormBounds { All, TrainOnly };

struct PipelineConfig {
    PreprocessConfig pre;
    ModelHyper model;
    NormBounds norm_bounds = NormBounds::All;
    RejectionPolicy rejection;
    // Application quality gates consulted by handle_oversensitivity.
    double min_f1 = 0.0;
    double min_f2 = 0.0;
};

struct PipelineData {
    RawSeries train;
    RawSeries test;
};

// Everything the initial setup run produces.
struct DetectorSetup {
    PipelineConfig config;
    GridSet grids;
    GruClassifier model;
    TrainReport train_report;
    double train_series_accuracy = 0.0; // next-sample accuracy over the whole train series
    std::vector<AnomalyCandidate> train_candidates;
    ThresholdSearchResult thresholds;
    RuleSet rules;
    std::vector<AnomalyCandidate> test_candidates;
    DetectionRun test_run;
    std::vector<Interval> test_truth; // after decimation
    DetectionReport test_report;
};

// Train -> thresholds -> detect in one pass: normalizes, builds grids and
// windows from the training series, fits the model, runs the automatic
// threshold search on training-series candidates (verifying it confirms
// zero of them), then scores detection on the test series.
DetectorSetup run_setup(const PipelineData& data, const PipelineConfig& cfg);

// Next-sample class predictions for t in [look_back + look_ahead, length).
std::vector<int> predict_series(const GruClassifier& model,
                                const NormalizedSeries& series,
                                std::span<const QuantizationGrid> in_grids,
                                const PreprocessConfig& cfg);

std::vector<int> quantize_channel(const NormalizedSeries& series,
                                  const QuantizationGrid& grid, std::size_t channel);

// Grid construction from a normalized training series: adaptive grids are
// fitted per channel, static grids are shared.
GridSet build_grids(const NormalizedSeries& train, const PreprocessConfig& cfg);

struct SweepGrid {
    std::vector<int> in_grid;
    std::vector<int> out_grid;
    std::vector<int> look_back;
    std::vector<int> cells;

    void validate() const;
};

enum class SweepCriterion {
    BestLength,   // smallest false-candidate length maximum
    BestCumAmp,   // smallest false-candidate cum_amp maximum
    BestMaxAmp,   // smallest false-candidate max_amp maximum
    BestAccuracy, // highest training accuracy
    Balanced,     // smallest rank sum over the four above
};

SweepCriterion sweep_criterion_from_string(const std::string& s);
const char* to_string(SweepCriterion c);

struct SweepEntry {
    int in_grid = 0, out_grid = 0, look_back = 0, cells = 0;
    std::size_t param_count = 0;
    double train_accuracy = 0.0; // final-epoch fit accuracy
    double val_accuracy = 0.0;
    double series_accuracy = 0.0;
    std::array<double, 3> false_maxima{};
    RuleSet rules;
    double saved_area = 0.0;
    DetectionReport test_report;
};

struct SweepResult {
    std::vector<SweepEntry> ranked; // best first
    SweepCriterion criterion = SweepCriterion::Balanced;

    std::string to_csv() const;
};

// Full grid sweep; every combination gets its own setup run. Ties resolve
// to the model with fewer parameters, then enumeration order.
SweepResult sweep(const PipelineData& data, const PipelineConfig& base,
                  const SweepGrid& grid, SweepCriterion criterion);

struct OversensitivityOutcome {
    enum class Action { Unchanged, Adjusted, Escalate };
    Action action = Action::Unchanged;
    RuleSet rules;
    Property adjusted = Property::Length;
    double old_threshold = 0.0;
    double new_threshold = 0.0;
};

// Reacts to false positives after deployment-style evaluation: when some
// property cleanly separates false from true confirmed anomalies, its
// threshold is raised to the lowest histogram boundary inside the gap
// (falling back to the highest false-positive value). When nothing
// separates, escalation is signalled instead of silently degrading recall.
OversensitivityOutcome handle_oversensitivity(const DetectorSetup& setup);

// Config plumbing.
PreprocessConfig preprocess_from_config(const ConfigFile& cfg);
PipelineConfig pipeline_from_config(const ConfigFile& cfg);
SweepGrid sweep_grid_from_config(const ConfigFile& cfg);

// Rule set artifacts.
void save_rules(const std::filesystem::path& path, const RuleSet& rules);
RuleSet load_rules(const std::filesystem::path& path);

std::string thresholds_to_json(const ThresholdSearchResult& r);
std::string candidates_to_csv(std::span<const AnomalyCandidate> candidates);
std::string intervals_to_json(std::span<const Interval> intervals);
std::vector<Interval> intervals_from_json(const std::string& text);

} // namespace qgd
