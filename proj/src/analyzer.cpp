#include "qgdetect/analyzer.hpp"
#include "qgdetect/errors.hpp"
#include "qgdetect/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace qgd {

double AnomalyCandidate::max_amp() const {
    double m = 0.0;
    for (double a : amplitudes) m = std::max(m, a);
    return m;
}

double AnomalyCandidate::cum_amp() const {
    return kernels::active().sum(amplitudes.data(), amplitudes.size());
}

const char* to_string(Property p) {
    switch (p) {
        case Property::Length: return "length";
        case Property::CumAmp: return "cum_amp";
        case Property::MaxAmp: return "max_amp";
    }
    return "?";
}

double candidate_property(const AnomalyCandidate& c, Property p) {
    switch (p) {
        case Property::Length: return static_cast<double>(c.length());
        case Property::CumAmp: return c.cum_amp();
        case Property::MaxAmp: return c.max_amp();
    }
    return 0.0;
}

double RuleSet::get(Property p) const {
    switch (p) {
        case Property::Length: return length;
        case Property::CumAmp: return cum_amp;
        case Property::MaxAmp: return max_amp;
    }
    return 0.0;
}

void RuleSet::set(Property p, double v) {
    switch (p) {
        case Property::Length: length = v; break;
        case Property::CumAmp: cum_amp = v; break;
        case Property::MaxAmp: max_amp = v; break;
    }
}

std::vector<Property> RuleSet::active() const {
    std::vector<Property> out;
    for (Property p : all_properties)
        if (get(p) != 0.0) out.push_back(p);
    return out;
}

bool above_thresholds(const AnomalyCandidate& c, const RuleSet& rules) {
    for (Property p : all_properties) {
        const double thr = rules.get(p);
        if (thr != 0.0 && !(candidate_property(c, p) > thr)) return false;
    }
    return true;
}

void RejectionPolicy::validate() const {
    if (true_count < 1)
        throw std::invalid_argument("rejection policy: true_count must be >= 1");
    if (!(true_ratio >= 0.0 && true_ratio < 1.0))
        throw std::invalid_argument("rejection policy: true_ratio outside [0, 1)");
}

std::vector<AnomalyCandidate> collect_candidates(std::span<const int> predicted,
                                                 std::span<const int> real,
                                                 const QuantizationGrid& out_grid,
                                                 const RejectionPolicy& policy) {
    policy.validate();
    if (predicted.size() != real.size())
        throw std::invalid_argument("collect_candidates: sequence length mismatch");
    for (std::size_t i = 0; i < predicted.size(); ++i)
        if (predicted[i] < 0 || predicted[i] >= out_grid.m || real[i] < 0 ||
            real[i] >= out_grid.m)
            throw std::invalid_argument("collect_candidates: class outside output grid");

    std::vector<AnomalyCandidate> out;
    const std::size_t n = predicted.size();
    std::size_t i = 0;
    while (i < n) {
        if (predicted[i] == real[i]) {
            ++i;
            continue;
        }
        const std::size_t start = i;
        std::size_t last_mismatch = i;
        int consec_true = 0;
        std::size_t correct_in_span = 0;
        std::size_t j = i + 1;
        for (; j < n; ++j) {
            if (predicted[j] != real[j]) {
                last_mismatch = j;
                consec_true = 0;
                continue;
            }
            ++consec_true;
            ++correct_in_span;
            if (consec_true >= policy.true_count) break;
            if (policy.true_ratio > 0.0) {
                const double frac = static_cast<double>(correct_in_span) /
                                    static_cast<double>(j - start + 1);
                if (frac > policy.true_ratio) break;
            }
        }

        AnomalyCandidate c;
        c.start = start;
        c.amplitudes.reserve(last_mismatch - start + 1);
        for (std::size_t t = start; t <= last_mismatch; ++t)
            c.amplitudes.push_back(std::abs(out_grid.bin_midpoint(real[t]) -
                                            out_grid.bin_midpoint(predicted[t])));
        out.push_back(std::move(c));
        i = last_mismatch + 1;
    }
    return out;
}

DetectionRun apply_rules(std::span<const AnomalyCandidate> candidates,
                         const RuleSet& rules, std::size_t index_offset) {
    DetectionRun run;
    for (const AnomalyCandidate& c : candidates) {
        if (above_thresholds(c, rules)) {
            run.confirmed.push_back(c);
            run.anomalies.push_back(
                {index_offset + c.start, index_offset + c.start + c.length()});
        }
    }
    return run;
}

namespace {

// Histogram boundaries: integer-valued properties with a small range get
// unit-wide compartments; everything else gets ceil(log2(n)) + 1 equal
// compartments over [lo, hi].
std::vector<double> property_boundaries(std::span<const double> values, bool integral) {
    const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
    const double lo = *mn, hi = *mx;

    std::vector<double> bounds;
    if (integral && hi - lo < 64.0) {
        for (double v = lo; v <= hi; v += 1.0) bounds.push_back(v);
    } else {
        const std::size_t bins =
            static_cast<std::size_t>(std::ceil(std::log2(
                static_cast<double>(std::max<std::size_t>(values.size(), 2))))) + 1;
        for (std::size_t i = 0; i <= bins; ++i)
            bounds.push_back(lo + (hi - lo) * static_cast<double>(i) /
                                      static_cast<double>(bins));
    }
    std::sort(bounds.begin(), bounds.end());
    bounds.erase(std::unique(bounds.begin(), bounds.end()), bounds.end());
    return bounds;
}

} // namespace

ThresholdSearchResult auto_thresholds(std::span<const AnomalyCandidate> candidates) {
    ThresholdSearchResult res;
    if (candidates.empty()) {
        for (std::size_t a = 0; a < 3; ++a) res.boundaries[a] = {0.0};
        return res;
    }

    const std::size_t n = candidates.size();
    std::array<std::vector<double>, 3> values;
    for (auto& v : values) v.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t a = 0; a < 3; ++a)
            values[a][i] = candidate_property(candidates[i], all_properties[a]);

    // Threshold options per axis: 0 (disabled) plus the histogram boundaries.
    std::array<std::vector<double>, 3> thr;
    for (std::size_t a = 0; a < 3; ++a) {
        res.maxima[a] = *std::max_element(values[a].begin(), values[a].end());
        res.boundaries[a] =
            property_boundaries(values[a], all_properties[a] == Property::Length);
        thr[a] = res.boundaries[a];
        thr[a].insert(thr[a].begin(), 0.0);
        thr[a].erase(std::unique(thr[a].begin(), thr[a].end()), thr[a].end());
    }

    const std::size_t A = thr[0].size(), B = thr[1].size(), C = thr[2].size();

    // occupancy[i][j][k] = how many candidates strictly exceed thresholds
    // (thr0[i], thr1[j], thr2[k]) on all three axes at once. Candidate
    // properties are strictly positive, so exceeding a disabled (0)
    // threshold is automatic and the conjunction needs no active-set
    // special case. Built as a 3-D suffix count.
    std::vector<std::uint32_t> occ(A * B * C, 0);
    auto at = [&](std::size_t i, std::size_t j, std::size_t k) -> std::uint32_t& {
        return occ[(i * B + j) * C + k];
    };
    auto last_below = [](const std::vector<double>& t, double v) {
        // index of the last threshold strictly below v; t[0] == 0 < v always
        std::size_t idx = 0;
        for (std::size_t i = t.size(); i-- > 0;)
            if (t[i] < v) { idx = i; break; }
        return idx;
    };
    for (std::size_t c = 0; c < n; ++c) {
        const std::size_t i = last_below(thr[0], values[0][c]);
        const std::size_t j = last_below(thr[1], values[1][c]);
        const std::size_t k = last_below(thr[2], values[2][c]);
        ++at(i, j, k);
    }
    // suffix-sum one axis at a time
    for (std::size_t i = A; i-- > 0;)
        for (std::size_t j = 0; j < B; ++j)
            for (std::size_t k = 0; k < C; ++k)
                if (i + 1 < A) at(i, j, k) += at(i + 1, j, k);
    for (std::size_t i = 0; i < A; ++i)
        for (std::size_t j = B; j-- > 0;)
            for (std::size_t k = 0; k < C; ++k)
                if (j + 1 < B) at(i, j, k) += at(i, j + 1, k);
    for (std::size_t i = 0; i < A; ++i)
        for (std::size_t j = 0; j < B; ++j)
            for (std::size_t k = C; k-- > 0;)
                if (k + 1 < C) at(i, j, k) += at(i, j, k + 1);

    double best_area = 0.0;
    bool found = false;
    RuleSet best;
    for (std::size_t i = 0; i < A; ++i)
        for (std::size_t j = 0; j < B; ++j)
            for (std::size_t k = 0; k < C; ++k) {
                if (at(i, j, k) != 0) continue; // combination confirms candidates
                double area = 1.0;
                if (thr[0][i] != 0.0) area *= 1.0 - thr[0][i] / res.maxima[0];
                if (thr[1][j] != 0.0) area *= 1.0 - thr[1][j] / res.maxima[1];
                if (thr[2][k] != 0.0) area *= 1.0 - thr[2][k] / res.maxima[2];
                if (thr[0][i] == 0.0 && thr[1][j] == 0.0 && thr[2][k] == 0.0)
                    area = 0.0; // nothing enabled saves nothing
                if (area > best_area) {
                    best_area = area;
                    best = RuleSet{thr[0][i], thr[1][j], thr[2][k]};
                    found = true;
                }
            }

    if (!found) {
        res.best = RuleSet{res.maxima[0], 0.0, 0.0};
        res.saved_area = 0.0;
        res.fallback = true;
    } else {
        res.best = best;
        res.saved_area = best_area;
    }
    return res;
}

} // namespace qgd
