#include "qgdetect/kernels.hpp"

// AVX2+FMA lane. Compiled in a plain TU via per-function target attributes
// so the rest of the binary carries no AVX2 instructions; dispatch decides
// at runtime whether any of this executes.

#if defined(__x86_64__) || defined(__i386__)

#include <immintrin.h>

namespace qgd::kernels {

namespace {

#define QGD_AVX2 __attribute__((target("avx2,fma")))

QGD_AVX2 inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d odd = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, odd));
}

QGD_AVX2 double dot_avx2(const double* x, const double* y, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), acc1);
    }
    if (i + 4 <= n) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
        i += 4;
    }
    double acc = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) acc += x[i] * y[i];
    return acc;
}

QGD_AVX2 void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
    __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vy = _mm256_loadu_pd(y + i);
        vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), vy);
        _mm256_storeu_pd(y + i, vy);
    }
    for (; i < n; ++i) y[i] += a * x[i];
}

QGD_AVX2 void matvec_add_avx2(const double* W, const double* x, double* y,
                              std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r)
        y[r] += dot_avx2(W + r * cols, x, cols);
}

QGD_AVX2 void matvec_t_add_avx2(const double* W, const double* x, double* y,
                                std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r)
        axpy_avx2(x[r], W + r * cols, y, cols);
}

QGD_AVX2 void ger_avx2(double* W, double a, const double* u, const double* v,
                       std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r)
        axpy_avx2(a * u[r], v, W + r * cols, cols);
}

QGD_AVX2 void hadamard_add_avx2(const double* a, const double* b, double* y,
                                std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vy = _mm256_loadu_pd(y + i);
        vy = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), vy);
        _mm256_storeu_pd(y + i, vy);
    }
    for (; i < n; ++i) y[i] += a[i] * b[i];
}

QGD_AVX2 double sum_avx2(const double* x, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(x + i));
        acc1 = _mm256_add_pd(acc1, _mm256_loadu_pd(x + i + 4));
    }
    if (i + 4 <= n) {
        acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(x + i));
        i += 4;
    }
    double acc = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) acc += x[i];
    return acc;
}

QGD_AVX2 double sumsq_avx2(const double* x, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        __m256d v0 = _mm256_loadu_pd(x + i);
        __m256d v1 = _mm256_loadu_pd(x + i + 4);
        acc0 = _mm256_fmadd_pd(v0, v0, acc0);
        acc1 = _mm256_fmadd_pd(v1, v1, acc1);
    }
    if (i + 4 <= n) {
        __m256d v0 = _mm256_loadu_pd(x + i);
        acc0 = _mm256_fmadd_pd(v0, v0, acc0);
        i += 4;
    }
    double acc = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) acc += x[i] * x[i];
    return acc;
}

#undef QGD_AVX2

} // namespace

bool avx2_available() {
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}

const Kernels& avx2() {
    static const Kernels k = {
        "avx2",    dot_avx2, axpy_avx2, matvec_add_avx2, matvec_t_add_avx2,
        ger_avx2, hadamard_add_avx2, sum_avx2, sumsq_avx2,
    };
    return k;
}

} // namespace qgd::kernels

#else // non-x86: no AVX2 lane, dispatch always lands on scalar

namespace qgd::kernels {

bool avx2_available() { return false; }

const Kernels& avx2() { return scalar(); }

} // namespace qgd::kernels

#endif
