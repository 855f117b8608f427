#include "qgdetect/kernels.hpp"

namespace qgd::kernels {

namespace {

double dot_ref(const double* x, const double* y, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
    return acc;
}

void axpy_ref(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void matvec_add_ref(const double* W, const double* x, double* y,
                    std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r)
        y[r] += dot_ref(W + r * cols, x, cols);
}

void matvec_t_add_ref(const double* W, const double* x, double* y,
                      std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r)
        axpy_ref(x[r], W + r * cols, y, cols);
}

void ger_ref(double* W, double a, const double* u, const double* v,
             std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r)
        axpy_ref(a * u[r], v, W + r * cols, cols);
}

void hadamard_add_ref(const double* a, const double* b, double* y,
                      std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a[i] * b[i];
}

double sum_ref(const double* x, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i];
    return acc;
}

double sumsq_ref(const double* x, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i] * x[i];
    return acc;
}

} // namespace

const Kernels& scalar() {
    static const Kernels k = {
        "scalar",     dot_ref, axpy_ref, matvec_add_ref, matvec_t_add_ref,
        ger_ref, hadamard_add_ref, sum_ref, sumsq_ref,
    };
    return k;
}

} // namespace qgd::kernels
