#include "qgdetect/metrics.hpp"
#include "qgdetect/errors.hpp"
#include "qgdetect/io_util.hpp"

#include <json.hpp>

#include <sstream>
#include <stdexcept>

namespace qgd {

namespace {

void check_sorted(std::span<const Interval> ivs, const char* what) {
    std::size_t prev_end = 0;
    for (std::size_t i = 0; i < ivs.size(); ++i) {
        if (ivs[i].begin >= ivs[i].end)
            throw std::invalid_argument(std::string("match_intervals: empty ") + what +
                                        " interval");
        if (i > 0 && ivs[i].begin < prev_end)
            throw std::invalid_argument(std::string("match_intervals: ") + what +
                                        " intervals overlap or are unsorted");
        prev_end = ivs[i].end;
    }
}

// Counts entries of `left` that overlap at least one entry of `right`;
// both sides sorted and disjoint.
std::size_t count_overlapping(std::span<const Interval> left,
                              std::span<const Interval> right) {
    std::size_t hits = 0;
    std::size_t k = 0;
    for (const Interval& l : left) {
        while (k < right.size() && right[k].end <= l.begin) ++k;
        if (k < right.size() && right[k].begin < l.end) ++hits;
    }
    return hits;
}

} // namespace

MatchCounts match_intervals(std::span<const Interval> detected,
                            std::span<const Interval> truth) {
    check_sorted(detected, "detected");
    check_sorted(truth, "truth");

    MatchCounts m;
    m.tp = count_overlapping(detected, truth);
    m.fp = detected.size() - m.tp;
    m.fn = truth.size() - count_overlapping(truth, detected);
    return m;
}

double f_beta(double recall, double precision, double beta) {
    if (!(beta > 0.0)) throw std::invalid_argument("f_beta: beta must be > 0");
    const double b2 = beta * beta;
    const double denom = b2 * precision + recall;
    if (denom == 0.0) return 0.0;
    return (1.0 + b2) * precision * recall / denom;
}

Score score(std::size_t tp, std::size_t fp, std::size_t fn, double beta) {
    if (!(beta > 0.0)) throw std::invalid_argument("score: beta must be > 0");
    Score s;
    if (tp + fn == 0) {
        s.degenerate = true;
    } else {
        s.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
    }
    if (tp + fp == 0) {
        s.degenerate = true;
    } else {
        s.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    }
    if (s.recall == 0.0 && s.precision == 0.0) s.degenerate = true;
    s.f_beta = f_beta(s.recall, s.precision, beta);
    return s;
}

DetectionReport DetectionReport::build(std::span<const Interval> detected,
                                       std::span<const Interval> truth) {
    const MatchCounts m = match_intervals(detected, truth);
    const Score s1 = score(m.tp, m.fp, m.fn, 1.0);
    const Score s2 = score(m.tp, m.fp, m.fn, 2.0);

    DetectionReport r;
    r.tp = m.tp;
    r.fp = m.fp;
    r.fn = m.fn;
    r.recall = s1.recall;
    r.precision = s1.precision;
    r.f1 = s1.f_beta;
    r.f2 = s2.f_beta;
    r.degenerate = s1.degenerate;
    return r;
}

std::string DetectionReport::to_json() const {
    nlohmann::json j{{"tp", tp},         {"fp", fp},
                     {"fn", fn},         {"recall", recall},
                     {"precision", precision}, {"f1", f1},
                     {"f2", f2},         {"degenerate", degenerate}};
    return j.dump(2) + "\n";
}

std::string DetectionReport::csv_header() {
    return "tp,fp,fn,recall,precision,f1,f2,degenerate";
}

std::string DetectionReport::csv_row() const {
    std::ostringstream out;
    out << tp << ',' << fp << ',' << fn << ',' << format_double(recall) << ','
        << format_double(precision) << ',' << format_double(f1) << ','
        << format_double(f2) << ',' << (degenerate ? 1 : 0);
    return out.str();
}

} // namespace qgd
