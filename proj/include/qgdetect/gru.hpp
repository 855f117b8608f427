#pragma once

#include "qgdetect/signal_io.hpp"

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace qgd {

// Row-major dense matrix.
struct Matrix {
    std::size_t rows = 0, cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

// Gated recurrent cell. Weight naming follows the update/reset/candidate
// structure: W_*x maps the step input, W_*h the previous hidden state.
//   z  = sigmoid(W_zx x + W_zh h_prev + b_z)
//   r  = sigmoid(W_rx x + W_rh h_prev + b_r)
//   hc = tanh(W_hx x + W_hh (r*h_prev) + b_h)
//   h  = (1 - z)*h_prev + z*hc
struct GruCell {
    std::size_t input_size = 0, hidden_size = 0;
    Matrix W_zx, W_zh, W_rx, W_rh, W_hx, W_hh;
    std::vector<double> b_z, b_r, b_h;

    static GruCell create(std::size_t input_size, std::size_t hidden_size,
                          std::uint64_t seed);
};

// Intermediates one step of backprop needs.
struct CellCache {
    std::vector<double> x, h_prev, z, r, rh, hc;
};

// Single recurrence step; writes the cache when given one.
std::vector<double> cell_step(const GruCell& cell, std::span<const double> x,
                              std::span<const double> h_prev,
                              CellCache* cache = nullptr);

// Stacked GRU layers plus a dense softmax head on the final hidden state.
// Consumes quantized windows: class indices scaled by 1/(in_grid - 1) form
// the per-step input vector (one value per channel). Hidden state starts at
// zero for every window; windows are treated as independent.
struct GruClassifier {
    std::size_t input_channels = 0;
    std::size_t look_back = 0;
    int in_grid = 0;
    int out_grid = 0;
    std::vector<GruCell> layers;
    Matrix dense_w; // out_grid x hidden
    std::vector<double> dense_b;

    static GruClassifier create(const PreprocessConfig& cfg,
                                std::size_t input_channels, std::size_t cells,
                                std::size_t num_layers, std::uint64_t seed);

    std::size_t hidden_size() const { return layers.empty() ? 0 : layers.back().hidden_size; }

    // Class probabilities for one window (allocates; see GruEvaluator for
    // the repeated-call path).
    std::vector<double> forward(std::span<const std::uint16_t> window) const;
    int predict_class(std::span<const std::uint16_t> window) const;
};

// Reusable forward-pass state; avoids per-window allocation on hot paths.
class GruEvaluator {
public:
    explicit GruEvaluator(const GruClassifier& model);
    ~GruEvaluator();
    GruEvaluator(GruEvaluator&&) noexcept;
    GruEvaluator& operator=(GruEvaluator&&) = delete;

    const std::vector<double>& probs(std::span<const std::uint16_t> window);
    int predict(std::span<const std::uint16_t> window);

private:
    struct Impl;
    const GruClassifier* model_;
    std::unique_ptr<Impl> impl_;
};

struct FitHyper {
    int epochs = 50;
    int batch_size = 64;
    double learning_rate = 0.05;
    double validation_fraction = 0.1;
    enum class Opt { Sgd, Adam };
    Opt optimizer = Opt::Sgd;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    std::uint64_t seed = 0;

    void validate() const;
};

struct TrainReport {
    std::vector<double> train_loss;     // mean cross-entropy per epoch
    std::vector<double> train_accuracy; // measured on the fly, pre-update
    std::vector<double> val_accuracy;   // empty when there are no val examples
    std::size_t train_examples = 0;
    std::size_t val_examples = 0;
    int epochs = 0;
    std::uint64_t seed = 0;

    std::string to_csv() const;
};

// Mini-batch gradient descent through time over the full window. The last
// validation_fraction of the dataset is held out; the rest is reshuffled
// every epoch. Throws training_diverged_error when the loss leaves the
// finite range.
TrainReport fit(GruClassifier& model, const WindowedDataset& ds, const FitHyper& hyper);

double accuracy(std::span<const int> predicted, std::span<const int> truth);

// Central-difference check of the analytic gradient on one example; returns
// the worst relative error over every parameter. Intended for small models.
double gradient_check(const GruClassifier& model, std::span<const std::uint16_t> window,
                      int target, double epsilon = 1e-5);

} // namespace qgd
