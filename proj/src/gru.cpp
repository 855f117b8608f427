#include "qgdetect/gru.hpp"
#include "qgdetect/errors.hpp"
#include "qgdetect/io_util.hpp"
#include "qgdetect/kernels.hpp"
#include "qgdetect/rng.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qgd {

namespace {

const kernels::Kernels& K() { return kernels::active(); }

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void softmax_inplace(std::vector<double>& v) {
    double mx = *std::max_element(v.begin(), v.end());
    double total = 0.0;
    for (double& x : v) {
        x = std::exp(x - mx);
        total += x;
    }
    for (double& x : v) x /= total;
}

void fill_uniform(std::vector<double>& v, double scale, rng::engine& g) {
    for (double& x : v) x = rng::uniform(g, -scale, scale);
}

void init_matrix(Matrix& m, std::size_t rows, std::size_t cols, rng::engine& g) {
    m = Matrix(rows, cols);
    const double scale = 1.0 / std::sqrt(static_cast<double>(cols));
    fill_uniform(m.data, scale, g);
}

// h_out = (1 - z)*h_prev + z*hc, gates written into the provided buffers.
void cell_step_into(const GruCell& cell, const double* x, const double* h_prev,
                    std::vector<double>& z, std::vector<double>& r,
                    std::vector<double>& rh, std::vector<double>& hc,
                    double* h_out) {
    const std::size_t H = cell.hidden_size;
    const std::size_t I = cell.input_size;

    std::copy(cell.b_z.begin(), cell.b_z.end(), z.begin());
    K().matvec_add(cell.W_zx.data.data(), x, z.data(), H, I);
    K().matvec_add(cell.W_zh.data.data(), h_prev, z.data(), H, H);
    for (std::size_t i = 0; i < H; ++i) z[i] = sigmoid(z[i]);

    std::copy(cell.b_r.begin(), cell.b_r.end(), r.begin());
    K().matvec_add(cell.W_rx.data.data(), x, r.data(), H, I);
    K().matvec_add(cell.W_rh.data.data(), h_prev, r.data(), H, H);
    for (std::size_t i = 0; i < H; ++i) r[i] = sigmoid(r[i]);

    for (std::size_t i = 0; i < H; ++i) rh[i] = r[i] * h_prev[i];

    std::copy(cell.b_h.begin(), cell.b_h.end(), hc.begin());
    K().matvec_add(cell.W_hx.data.data(), x, hc.data(), H, I);
    K().matvec_add(cell.W_hh.data.data(), rh.data(), hc.data(), H, H);
    for (std::size_t i = 0; i < H; ++i) hc[i] = std::tanh(hc[i]);

    for (std::size_t i = 0; i < H; ++i)
        h_out[i] = (1.0 - z[i]) * h_prev[i] + z[i] * hc[i];
}

} // namespace

GruCell GruCell::create(std::size_t input_size, std::size_t hidden_size,
                        std::uint64_t seed) {
    if (input_size == 0 || hidden_size == 0)
        throw std::invalid_argument("GruCell::create: zero dimension");
    GruCell c;
    c.input_size = input_size;
    c.hidden_size = hidden_size;
    rng::engine g(seed);
    init_matrix(c.W_zx, hidden_size, input_size, g);
    init_matrix(c.W_zh, hidden_size, hidden_size, g);
    init_matrix(c.W_rx, hidden_size, input_size, g);
    init_matrix(c.W_rh, hidden_size, hidden_size, g);
    init_matrix(c.W_hx, hidden_size, input_size, g);
    init_matrix(c.W_hh, hidden_size, hidden_size, g);
    c.b_z.assign(hidden_size, 0.0);
    c.b_r.assign(hidden_size, 0.0);
    c.b_h.assign(hidden_size, 0.0);
    return c;
}

std::vector<double> cell_step(const GruCell& cell, std::span<const double> x,
                              std::span<const double> h_prev, CellCache* cache) {
    if (x.size() != cell.input_size || h_prev.size() != cell.hidden_size)
        throw std::invalid_argument("cell_step: input/state size mismatch");
    const std::size_t H = cell.hidden_size;
    std::vector<double> z(H), r(H), rh(H), hc(H), h(H);
    cell_step_into(cell, x.data(), h_prev.data(), z, r, rh, hc, h.data());
    if (cache) {
        cache->x.assign(x.begin(), x.end());
        cache->h_prev.assign(h_prev.begin(), h_prev.end());
        cache->z = z;
        cache->r = r;
        cache->rh = rh;
        cache->hc = hc;
    }
    return h;
}

GruClassifier GruClassifier::create(const PreprocessConfig& cfg,
                                    std::size_t input_channels, std::size_t cells,
                                    std::size_t num_layers, std::uint64_t seed) {
    cfg.validate();
    if (input_channels == 0)
        throw std::invalid_argument("GruClassifier::create: no input channels");
    if (cells == 0 || num_layers == 0)
        throw std::invalid_argument("GruClassifier::create: zero cells or layers");

    GruClassifier m;
    m.input_channels = input_channels;
    m.look_back = cfg.look_back;
    m.in_grid = cfg.in_grid;
    m.out_grid = cfg.out_grid;
    for (std::size_t l = 0; l < num_layers; ++l) {
        std::size_t in = (l == 0) ? input_channels : cells;
        m.layers.push_back(GruCell::create(in, cells, rng::derive(seed, 100 + l)));
    }
    rng::engine g(rng::derive(seed, 99));
    init_matrix(m.dense_w, cfg.out_grid, cells, g);
    m.dense_b.assign(cfg.out_grid, 0.0);
    return m;
}

// ---------------------------------------------------------------------------
// Forward-pass state

struct GruEvaluator::Impl {
    std::vector<std::vector<double>> h;
    std::vector<double> xbuf, z, r, rh, hc, hnew;
    std::vector<double> logits;
    double xscale = 1.0;

    explicit Impl(const GruClassifier& m) {
        const std::size_t H = m.hidden_size();
        h.assign(m.layers.size(), std::vector<double>(H, 0.0));
        xbuf.resize(m.input_channels);
        z.resize(H);
        r.resize(H);
        rh.resize(H);
        hc.resize(H);
        hnew.resize(H);
        logits.resize(m.out_grid);
        xscale = 1.0 / static_cast<double>(m.in_grid - 1);
    }
};

GruEvaluator::GruEvaluator(const GruClassifier& model)
    : model_(&model), impl_(std::make_unique<Impl>(model)) {}

GruEvaluator::~GruEvaluator() = default;
GruEvaluator::GruEvaluator(GruEvaluator&&) noexcept = default;

const std::vector<double>& GruEvaluator::probs(std::span<const std::uint16_t> window) {
    const GruClassifier& m = *model_;
    Impl& s = *impl_;
    const std::size_t C = m.input_channels;
    if (window.size() != m.look_back * C)
        throw std::invalid_argument("forward: window shape mismatch");

    for (auto& hv : s.h) std::fill(hv.begin(), hv.end(), 0.0);

    for (std::size_t t = 0; t < m.look_back; ++t) {
        for (std::size_t c = 0; c < C; ++c) {
            const std::uint16_t cls = window[t * C + c];
            if (cls >= static_cast<std::uint16_t>(m.in_grid))
                throw std::invalid_argument("forward: class index outside input grid");
            s.xbuf[c] = static_cast<double>(cls) * s.xscale;
        }
        const double* input = s.xbuf.data();
        for (std::size_t l = 0; l < m.layers.size(); ++l) {
            cell_step_into(m.layers[l], input, s.h[l].data(), s.z, s.r, s.rh, s.hc,
                           s.hnew.data());
            std::swap(s.h[l], s.hnew);
            input = s.h[l].data();
        }
    }

    std::copy(m.dense_b.begin(), m.dense_b.end(), s.logits.begin());
    K().matvec_add(m.dense_w.data.data(), s.h.back().data(), s.logits.data(),
                   m.out_grid, m.hidden_size());
    softmax_inplace(s.logits);
    return s.logits;
}

int GruEvaluator::predict(std::span<const std::uint16_t> window) {
    const std::vector<double>& p = probs(window);
    return static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
}

std::vector<double> GruClassifier::forward(std::span<const std::uint16_t> window) const {
    GruEvaluator ev(*this);
    return ev.probs(window);
}

int GruClassifier::predict_class(std::span<const std::uint16_t> window) const {
    GruEvaluator ev(*this);
    return ev.predict(window);
}

// ---------------------------------------------------------------------------
// Training

namespace {

struct LayerGrads {
    Matrix W_zx, W_zh, W_rx, W_rh, W_hx, W_hh;
    std::vector<double> b_z, b_r, b_h;
};

struct Grads {
    std::vector<LayerGrads> layers;
    Matrix dense_w;
    std::vector<double> dense_b;

    explicit Grads(const GruClassifier& m) {
        for (const GruCell& c : m.layers) {
            LayerGrads g;
            g.W_zx = Matrix(c.hidden_size, c.input_size);
            g.W_zh = Matrix(c.hidden_size, c.hidden_size);
            g.W_rx = Matrix(c.hidden_size, c.input_size);
            g.W_rh = Matrix(c.hidden_size, c.hidden_size);
            g.W_hx = Matrix(c.hidden_size, c.input_size);
            g.W_hh = Matrix(c.hidden_size, c.hidden_size);
            g.b_z.assign(c.hidden_size, 0.0);
            g.b_r.assign(c.hidden_size, 0.0);
            g.b_h.assign(c.hidden_size, 0.0);
            layers.push_back(std::move(g));
        }
        dense_w = Matrix(m.dense_w.rows, m.dense_w.cols);
        dense_b.assign(m.dense_b.size(), 0.0);
    }

    void zero() {
        for (LayerGrads& g : layers) {
            auto clear = [](Matrix& mm) { std::fill(mm.data.begin(), mm.data.end(), 0.0); };
            clear(g.W_zx); clear(g.W_zh); clear(g.W_rx);
            clear(g.W_rh); clear(g.W_hx); clear(g.W_hh);
            std::fill(g.b_z.begin(), g.b_z.end(), 0.0);
            std::fill(g.b_r.begin(), g.b_r.end(), 0.0);
            std::fill(g.b_h.begin(), g.b_h.end(), 0.0);
        }
        std::fill(dense_w.data.begin(), dense_w.data.end(), 0.0);
        std::fill(dense_b.begin(), dense_b.end(), 0.0);
    }
};

// Parameter and gradient views in one fixed traversal order, so the
// optimizer and the finite-difference check walk identical sequences.
template <class ModelLike, class Fn>
void visit_layer_fields(ModelLike& layers, Fn&& fn) {
    for (auto& l : layers) {
        fn(l.W_zx.data); fn(l.W_zh.data);
        fn(l.W_rx.data); fn(l.W_rh.data);
        fn(l.W_hx.data); fn(l.W_hh.data);
        fn(l.b_z); fn(l.b_r); fn(l.b_h);
    }
}

std::vector<double*> param_ptrs(GruClassifier& m) {
    std::vector<double*> out;
    visit_layer_fields(m.layers, [&](std::vector<double>& v) {
        for (double& x : v) out.push_back(&x);
    });
    for (double& x : m.dense_w.data) out.push_back(&x);
    for (double& x : m.dense_b) out.push_back(&x);
    return out;
}

std::vector<double*> grad_ptrs(Grads& g) {
    std::vector<double*> out;
    visit_layer_fields(g.layers, [&](std::vector<double>& v) {
        for (double& x : v) out.push_back(&x);
    });
    for (double& x : g.dense_w.data) out.push_back(&x);
    for (double& x : g.dense_b) out.push_back(&x);
    return out;
}

struct TrainCtx {
    // caches[t][l]
    std::vector<std::vector<CellCache>> caches;
    std::vector<std::vector<double>> h;  // running hidden per layer
    std::vector<std::vector<double>> gh; // grad wrt h_t per layer
    std::vector<double> xbuf, hnew;
    std::vector<double> logits;
    std::vector<double> dz, dhc, dah, daz, dar, dr, drh, newgh, dx;
    double xscale = 1.0;

    TrainCtx(const GruClassifier& m) {
        const std::size_t H = m.hidden_size();
        const std::size_t L = m.layers.size();
        caches.assign(m.look_back, std::vector<CellCache>(L));
        for (auto& step : caches)
            for (std::size_t l = 0; l < L; ++l) {
                CellCache& c = step[l];
                c.x.resize(m.layers[l].input_size);
                c.h_prev.resize(H);
                c.z.resize(H);
                c.r.resize(H);
                c.rh.resize(H);
                c.hc.resize(H);
            }
        h.assign(L, std::vector<double>(H, 0.0));
        gh.assign(L, std::vector<double>(H, 0.0));
        xbuf.resize(m.input_channels);
        hnew.resize(H);
        logits.resize(m.out_grid);
        dz.resize(H); dhc.resize(H); dah.resize(H); daz.resize(H);
        dar.resize(H); dr.resize(H); drh.resize(H); newgh.resize(H);
        dx.resize(std::max(H, m.input_channels));
        xscale = 1.0 / static_cast<double>(m.in_grid - 1);
    }
};

// Forward pass keeping every step's intermediates; leaves softmax output in
// ctx.logits and returns the cross-entropy loss of `target`.
double forward_cached(const GruClassifier& m, TrainCtx& ctx,
                      const std::uint16_t* window, int target) {
    const std::size_t C = m.input_channels;
    for (auto& hv : ctx.h) std::fill(hv.begin(), hv.end(), 0.0);

    for (std::size_t t = 0; t < m.look_back; ++t) {
        for (std::size_t c = 0; c < C; ++c)
            ctx.xbuf[c] = static_cast<double>(window[t * C + c]) * ctx.xscale;
        const double* input = ctx.xbuf.data();
        std::size_t in_size = C;
        for (std::size_t l = 0; l < m.layers.size(); ++l) {
            CellCache& cc = ctx.caches[t][l];
            std::copy(input, input + in_size, cc.x.begin());
            std::copy(ctx.h[l].begin(), ctx.h[l].end(), cc.h_prev.begin());
            cell_step_into(m.layers[l], input, cc.h_prev.data(), cc.z, cc.r, cc.rh,
                           cc.hc, ctx.hnew.data());
            std::swap(ctx.h[l], ctx.hnew);
            input = ctx.h[l].data();
            in_size = m.layers[l].hidden_size;
        }
    }

    std::copy(m.dense_b.begin(), m.dense_b.end(), ctx.logits.begin());
    K().matvec_add(m.dense_w.data.data(), ctx.h.back().data(), ctx.logits.data(),
                   m.out_grid, m.hidden_size());
    softmax_inplace(ctx.logits);
    const double p = std::max(ctx.logits[target], 1e-300);
    return -std::log(p);
}

// Backprop through time for the example last run through forward_cached.
// ctx.logits still holds the softmax output.
void backward(const GruClassifier& m, TrainCtx& ctx, int target, Grads& g) {
    const std::size_t H = m.hidden_size();
    const std::size_t L = m.layers.size();

    // dlogits = probs - onehot, reuse ctx.logits in place
    ctx.logits[target] -= 1.0;
    const std::vector<double>& dlogits = ctx.logits;

    K().ger(g.dense_w.data.data(), 1.0, dlogits.data(), ctx.h.back().data(),
            m.out_grid, H);
    for (std::size_t i = 0; i < dlogits.size(); ++i) g.dense_b[i] += dlogits[i];

    for (auto& v : ctx.gh) std::fill(v.begin(), v.end(), 0.0);
    K().matvec_t_add(m.dense_w.data.data(), dlogits.data(), ctx.gh[L - 1].data(),
                     m.out_grid, H);

    for (std::size_t ti = m.look_back; ti-- > 0;) {
        for (std::size_t li = L; li-- > 0;) {
            const GruCell& cell = m.layers[li];
            LayerGrads& gl = g.layers[li];
            const CellCache& cc = ctx.caches[ti][li];
            const std::vector<double>& gh = ctx.gh[li];
            const std::size_t I = cell.input_size;

            for (std::size_t i = 0; i < H; ++i) {
                ctx.dz[i] = gh[i] * (cc.hc[i] - cc.h_prev[i]);
                ctx.dhc[i] = gh[i] * cc.z[i];
                ctx.newgh[i] = gh[i] * (1.0 - cc.z[i]);
                ctx.dah[i] = ctx.dhc[i] * (1.0 - cc.hc[i] * cc.hc[i]);
            }

            K().ger(gl.W_hx.data.data(), 1.0, ctx.dah.data(), cc.x.data(), H, I);
            K().ger(gl.W_hh.data.data(), 1.0, ctx.dah.data(), cc.rh.data(), H, H);
            K().axpy(1.0, ctx.dah.data(), gl.b_h.data(), H);

            std::fill(ctx.drh.begin(), ctx.drh.end(), 0.0);
            K().matvec_t_add(cell.W_hh.data.data(), ctx.dah.data(), ctx.drh.data(), H, H);
            for (std::size_t i = 0; i < H; ++i) {
                ctx.dr[i] = ctx.drh[i] * cc.h_prev[i];
                ctx.newgh[i] += ctx.drh[i] * cc.r[i];
                ctx.daz[i] = ctx.dz[i] * cc.z[i] * (1.0 - cc.z[i]);
                ctx.dar[i] = ctx.dr[i] * cc.r[i] * (1.0 - cc.r[i]);
            }

            K().ger(gl.W_zx.data.data(), 1.0, ctx.daz.data(), cc.x.data(), H, I);
            K().ger(gl.W_zh.data.data(), 1.0, ctx.daz.data(), cc.h_prev.data(), H, H);
            K().axpy(1.0, ctx.daz.data(), gl.b_z.data(), H);
            K().ger(gl.W_rx.data.data(), 1.0, ctx.dar.data(), cc.x.data(), H, I);
            K().ger(gl.W_rh.data.data(), 1.0, ctx.dar.data(), cc.h_prev.data(), H, H);
            K().axpy(1.0, ctx.dar.data(), gl.b_r.data(), H);

            K().matvec_t_add(cell.W_zh.data.data(), ctx.daz.data(), ctx.newgh.data(), H, H);
            K().matvec_t_add(cell.W_rh.data.data(), ctx.dar.data(), ctx.newgh.data(), H, H);

            if (li > 0) {
                std::fill(ctx.dx.begin(), ctx.dx.begin() + I, 0.0);
                K().matvec_t_add(cell.W_zx.data.data(), ctx.daz.data(), ctx.dx.data(), H, I);
                K().matvec_t_add(cell.W_rx.data.data(), ctx.dar.data(), ctx.dx.data(), H, I);
                K().matvec_t_add(cell.W_hx.data.data(), ctx.dah.data(), ctx.dx.data(), H, I);
                for (std::size_t i = 0; i < I; ++i) ctx.gh[li - 1][i] += ctx.dx[i];
            }

            std::copy(ctx.newgh.begin(), ctx.newgh.end(), ctx.gh[li].begin());
        }
    }
}

void check_dataset_matches(const GruClassifier& m, const WindowedDataset& ds) {
    if (ds.num_examples == 0)
        throw std::invalid_argument("fit: empty dataset");
    if (ds.look_back != m.look_back || ds.num_channels != m.input_channels ||
        ds.in_grid != m.in_grid || ds.out_grid != m.out_grid)
        throw std::invalid_argument("fit: dataset shape does not match model");
}

} // namespace

void FitHyper::validate() const {
    if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
    if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
    if (!(learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be > 0");
    if (!(validation_fraction >= 0.0 && validation_fraction < 1.0))
        throw std::invalid_argument("validation_fraction outside [0, 1)");
}

TrainReport fit(GruClassifier& model, const WindowedDataset& ds, const FitHyper& hyper) {
    hyper.validate();
    check_dataset_matches(model, ds);

    const std::size_t n = ds.num_examples;
    const std::size_t n_val =
        static_cast<std::size_t>(hyper.validation_fraction * static_cast<double>(n));
    const std::size_t n_train = n - n_val;
    if (n_train == 0) throw std::invalid_argument("fit: no training examples left");

    TrainCtx ctx(model);
    Grads grads(model);
    std::vector<double*> params = param_ptrs(model);
    std::vector<double*> gptrs = grad_ptrs(grads);

    // Adam state (allocated only when used)
    std::vector<double> adam_m, adam_v;
    long long adam_t = 0;
    if (hyper.optimizer == FitHyper::Opt::Adam) {
        adam_m.assign(params.size(), 0.0);
        adam_v.assign(params.size(), 0.0);
    }

    std::vector<std::size_t> order(n_train);
    for (std::size_t i = 0; i < n_train; ++i) order[i] = i;

    GruEvaluator ev(model);
    TrainReport report;
    report.train_examples = n_train;
    report.val_examples = n_val;
    report.epochs = hyper.epochs;
    report.seed = hyper.seed;

    for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
        rng::engine g(rng::derive(hyper.seed, 7000 + static_cast<std::uint64_t>(epoch)));
        rng::shuffle(order, g);

        double loss_total = 0.0;
        std::size_t correct = 0;

        std::size_t done = 0;
        while (done < n_train) {
            const std::size_t bsz =
                std::min<std::size_t>(hyper.batch_size, n_train - done);
            grads.zero();
            for (std::size_t b = 0; b < bsz; ++b) {
                const std::size_t ex = order[done + b];
                const int target = ds.targets[ex];
                double loss =
                    forward_cached(model, ctx, ds.window(ex).data(), target);
                if (!std::isfinite(loss))
                    throw training_diverged_error(
                        "loss became non-finite at epoch " + std::to_string(epoch),
                        epoch);
                loss_total += loss;
                const auto& p = ctx.logits;
                const int pred = static_cast<int>(
                    std::max_element(p.begin(), p.end()) - p.begin());
                if (pred == target) ++correct;
                backward(model, ctx, target, grads);
            }
            const double inv = 1.0 / static_cast<double>(bsz);
            if (hyper.optimizer == FitHyper::Opt::Sgd) {
                const double step = hyper.learning_rate * inv;
                for (std::size_t i = 0; i < params.size(); ++i)
                    *params[i] -= step * *gptrs[i];
            } else {
                ++adam_t;
                const double b1 = hyper.adam_beta1, b2 = hyper.adam_beta2;
                const double corr1 = 1.0 - std::pow(b1, static_cast<double>(adam_t));
                const double corr2 = 1.0 - std::pow(b2, static_cast<double>(adam_t));
                for (std::size_t i = 0; i < params.size(); ++i) {
                    const double gi = *gptrs[i] * inv;
                    adam_m[i] = b1 * adam_m[i] + (1.0 - b1) * gi;
                    adam_v[i] = b2 * adam_v[i] + (1.0 - b2) * gi * gi;
                    const double mhat = adam_m[i] / corr1;
                    const double vhat = adam_v[i] / corr2;
                    *params[i] -= hyper.learning_rate * mhat /
                                  (std::sqrt(vhat) + hyper.adam_eps);
                }
            }
            done += bsz;
        }

        const double mean_loss = loss_total / static_cast<double>(n_train);
        if (!std::isfinite(mean_loss))
            throw training_diverged_error(
                "mean loss became non-finite at epoch " + std::to_string(epoch), epoch);
        report.train_loss.push_back(mean_loss);
        report.train_accuracy.push_back(static_cast<double>(correct) /
                                        static_cast<double>(n_train));

        if (n_val > 0) {
            std::size_t vcorrect = 0;
            for (std::size_t i = n_train; i < n; ++i)
                if (ev.predict(ds.window(i)) == ds.targets[i]) ++vcorrect;
            report.val_accuracy.push_back(static_cast<double>(vcorrect) /
                                          static_cast<double>(n_val));
        }
    }
    return report;
}

double accuracy(std::span<const int> predicted, std::span<const int> truth) {
    if (predicted.size() != truth.size())
        throw std::invalid_argument("accuracy: length mismatch");
    if (predicted.empty())
        throw std::invalid_argument("accuracy: empty sequences");
    std::size_t same = 0;
    for (std::size_t i = 0; i < predicted.size(); ++i)
        if (predicted[i] == truth[i]) ++same;
    return static_cast<double>(same) / static_cast<double>(predicted.size());
}

double gradient_check(const GruClassifier& model, std::span<const std::uint16_t> window,
                      int target, double epsilon) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("gradient_check: epsilon <= 0");
    if (target < 0 || target >= model.out_grid)
        throw std::invalid_argument("gradient_check: target class out of range");
    if (window.size() != model.look_back * model.input_channels)
        throw std::invalid_argument("gradient_check: window shape mismatch");

    GruClassifier work = model;
    TrainCtx ctx(work);
    Grads grads(work);
    forward_cached(work, ctx, window.data(), target);
    backward(work, ctx, target, grads);

    std::vector<double*> params = param_ptrs(work);
    std::vector<double*> analytic = grad_ptrs(grads);

    double worst = 0.0;
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double saved = *params[i];
        *params[i] = saved + epsilon;
        const double lp = forward_cached(work, ctx, window.data(), target);
        *params[i] = saved - epsilon;
        const double lm = forward_cached(work, ctx, window.data(), target);
        *params[i] = saved;
        const double numeric = (lp - lm) / (2.0 * epsilon);
        const double a = *analytic[i];
        const double rel =
            std::abs(a - numeric) / std::max(1e-6, std::abs(a) + std::abs(numeric));
        worst = std::max(worst, rel);
    }
    return worst;
}

std::string TrainReport::to_csv() const {
    std::ostringstream out;
    out << "epoch,train_loss,train_accuracy,val_accuracy\n";
    for (std::size_t e = 0; e < train_loss.size(); ++e) {
        out << (e + 1) << ',' << format_double(train_loss[e]) << ','
            << format_double(train_accuracy[e]) << ',';
        if (e < val_accuracy.size()) out << format_double(val_accuracy[e]);
        out << '\n';
    }
    return out.str();
}

} // namespace qgd
