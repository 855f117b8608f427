#pragma once

#include <cstddef>

// Double-precision kernels behind the recurrent model and the feature
// extractors. Two lanes: a scalar reference implementation and an AVX2+FMA
// variant, selected once at startup from CPUID. QG_KERNELS=scalar|avx2
// overrides the choice (requesting avx2 on a machine without it falls back
// to scalar). Both lanes are exported so tests can compare them directly.
//
// Matrices are row-major, rows x cols, no padding.

namespace qgd::kernels {

struct Kernels {
    const char* name;

    // sum_i x[i]*y[i]
    double (*dot)(const double* x, const double* y, std::size_t n);
    // y[i] += a * x[i]
    void (*axpy)(double a, const double* x, double* y, std::size_t n);
    // y[r] += sum_c W[r,c] * x[c]
    void (*matvec_add)(const double* W, const double* x, double* y,
                       std::size_t rows, std::size_t cols);
    // y[c] += sum_r W[r,c] * x[r]   (transposed product, W stays row-major)
    void (*matvec_t_add)(const double* W, const double* x, double* y,
                         std::size_t rows, std::size_t cols);
    // W[r,c] += a * u[r] * v[c]     (rank-1 update)
    void (*ger)(double* W, double a, const double* u, const double* v,
                std::size_t rows, std::size_t cols);
    // y[i] += a[i] * b[i]
    void (*hadamard_add)(const double* a, const double* b, double* y,
                         std::size_t n);
    double (*sum)(const double* x, std::size_t n);
    double (*sumsq)(const double* x, std::size_t n);
};

const Kernels& scalar();

bool avx2_available();
// Only valid to call through when avx2_available() is true.
const Kernels& avx2();

// Lane picked at startup (env override included). Stable for process life.
const Kernels& active();

} // namespace qgd::kernels
