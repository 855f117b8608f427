#pragma once

#include "qgdetect/quantizer.hpp"
#include "qgdetect/signal_io.hpp"

#include <array>
#include <span>
#include <vector>

namespace qgd {

// A run of samples where the classifier's prediction disagreed with the
// real signal. Amplitudes live on the output grid: per sample,
// |bin_midpoint(real) - bin_midpoint(predicted)|. Runs produced by a
// rejection policy with true_count > 1 may contain interior samples that
// were predicted correctly; those carry amplitude 0.
struct AnomalyCandidate {
    std::size_t start = 0; // index within the prediction sequence
    std::vector<double> amplitudes;

    std::size_t length() const { return amplitudes.size(); }
    double max_amp() const;
    double cum_amp() const;
};

enum class Property { Length = 0, CumAmp = 1, MaxAmp = 2 };
inline constexpr std::array<Property, 3> all_properties{Property::Length,
                                                        Property::CumAmp,
                                                        Property::MaxAmp};
const char* to_string(Property p);

double candidate_property(const AnomalyCandidate& c, Property p);

// One threshold per candidate property; 0 disables a property. A candidate
// counts as anomalous when it strictly exceeds every enabled threshold
// (an all-disabled rule set confirms everything).
struct RuleSet {
    double length = 0.0;
    double cum_amp = 0.0;
    double max_amp = 0.0;

    double get(Property p) const;
    void set(Property p, double v);
    std::vector<Property> active() const;
    bool operator==(const RuleSet&) const = default;
};

bool above_thresholds(const AnomalyCandidate& c, const RuleSet& rules);

// Controls when a candidate run ends. true_count consecutive correct
// predictions close the run (1 = close on the first correct sample).
// true_ratio > 0 additionally closes it once the correct fraction within
// the run's span exceeds the ratio. Trailing correct samples are trimmed;
// a candidate always ends on a misprediction.
struct RejectionPolicy {
    int true_count = 1;
    double true_ratio = 0.0;

    void validate() const;
};

std::vector<AnomalyCandidate> collect_candidates(std::span<const int> predicted,
                                                 std::span<const int> real,
                                                 const QuantizationGrid& out_grid,
                                                 const RejectionPolicy& policy = {});

struct DetectionRun {
    std::vector<AnomalyCandidate> confirmed;
    std::vector<Interval> anomalies; // confirmed spans, shifted by index_offset
};

// index_offset translates candidate starts (prediction-sequence indices)
// into series sample indices.
DetectionRun apply_rules(std::span<const AnomalyCandidate> candidates,
                         const RuleSet& rules, std::size_t index_offset = 0);

struct ThresholdSearchResult {
    std::array<double, 3> maxima{};                 // per property
    std::array<std::vector<double>, 3> boundaries;  // histogram boundaries per property
    RuleSet best;
    double saved_area = 0.0;
    // No combination with positive area filtered every candidate; length
    // got pinned to its maximum instead.
    bool fallback = false;
};

// Picks the threshold combination that maximally relaxes the rules while
// still confirming zero candidates from the (training) population it was
// given. Thresholds are drawn from {0} plus per-property histogram
// boundaries; the objective is the normalized hypervolume between the
// chosen thresholds and the per-property maxima over the enabled
// properties. Ties resolve to the lexicographically smallest combination
// in (length, cum_amp, max_amp) order.
ThresholdSearchResult auto_thresholds(std::span<const AnomalyCandidate> candidates);

} // namespace qgd
