#pragma once

#include "qgdetect/gru.hpp"
#include "qgdetect/quantizer.hpp"
#include "qgdetect/signal_io.hpp"

#include <filesystem>

namespace qgd {

// Everything preprocessing produced that detection must replay: the
// per-channel input grids, the target-channel output grid and the
// normalization bounds the grids were built under.
struct GridSet {
    std::vector<QuantizationGrid> input;
    QuantizationGrid output;
    std::vector<Bounds> norm_bounds;
};

// Self-contained detector state: config, grids and trained weights. The
// JSON encoding stores doubles in shortest round-trip decimal form, so a
// load-save cycle reproduces the file byte for byte and a loaded model
// predicts bit-identically.
struct ModelBundle {
    PreprocessConfig config;
    GridSet grids;
    GruClassifier model;
};

inline constexpr int bundle_format_version = 1;

void save_bundle(const std::filesystem::path& path, const ModelBundle& bundle);
ModelBundle load_bundle(const std::filesystem::path& path);

// Throws config_mismatch_error naming every differing key.
void check_config_compatible(const PreprocessConfig& stored,
                             const PreprocessConfig& requested);

} // namespace qgd
