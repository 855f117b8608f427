#pragma once

#include <stdexcept>
#include <string>

namespace qgd {

// Base class for all library errors. Precondition violations on individual
// arguments throw std::invalid_argument instead; everything that depends on
// external input (files, configs, data shapes) derives from qgd::error so
// callers can catch the whole family at the CLI boundary.
class error : public std::runtime_error {
public:
    explicit error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed file content: CSV cells that do not parse, bad config syntax,
// truncated or unreadable model bundles.
class parse_error : public error {
public:
    explicit parse_error(const std::string& msg) : error(msg) {}
};

// Config values that are individually valid but inconsistent with each other
// or with a stored artifact (e.g. a bundle trained under a different grid).
class config_mismatch_error : public error {
public:
    explicit config_mismatch_error(const std::string& msg) : error(msg) {}
};

// A value range collapsed to a point where a nonzero span is required
// (normalizing a constant channel, feature extraction windows are handled
// separately via degenerate flags).
class degenerate_range_error : public error {
public:
    explicit degenerate_range_error(const std::string& msg) : error(msg) {}
};

// Split index outside the series, or a split that leaves one side empty.
class invalid_split_error : public error {
public:
    explicit invalid_split_error(const std::string& msg) : error(msg) {}
};

// Loss became non-finite during training.
class training_diverged_error : public error {
public:
    training_diverged_error(const std::string& msg, int epoch_)
        : error(msg), epoch(epoch_) {}
    int epoch;
};

// Filesystem failures on read or write.
class io_error : public error {
public:
    explicit io_error(const std::string& msg) : error(msg) {}
};

} // namespace qgd
