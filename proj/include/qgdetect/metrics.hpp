#pragma once

#include "qgdetect/signal_io.hpp"

#include <span>
#include <string>

namespace qgd {

// Interval-overlap counting. An anomaly counts as found when any detected
// interval overlaps it; a detected interval is a true positive when it
// overlaps any real anomaly. Several detections on one anomaly are all true
// positives, and one detection spanning several anomalies marks them all
// found. There are no true negatives in this accounting.
struct MatchCounts {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
};

MatchCounts match_intervals(std::span<const Interval> detected,
                            std::span<const Interval> truth);

struct Score {
    double recall = 0.0;
    double precision = 0.0;
    double f_beta = 0.0;
    // Some ratio hit 0/0 and was reported as 0.
    bool degenerate = false;
};

Score score(std::size_t tp, std::size_t fp, std::size_t fn, double beta);

// F-measure from rates; 0 when both rates are 0.
double f_beta(double recall, double precision, double beta);

struct DetectionReport {
    std::size_t tp = 0, fp = 0, fn = 0;
    double recall = 0.0, precision = 0.0, f1 = 0.0, f2 = 0.0;
    bool degenerate = false;

    static DetectionReport build(std::span<const Interval> detected,
                                 std::span<const Interval> truth);

    std::string to_json() const;
    static std::string csv_header();
    std::string csv_row() const;
};

} // namespace qgd
