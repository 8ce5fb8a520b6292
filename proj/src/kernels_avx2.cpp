// AVX2+FMA kernels, 4-wide double lanes with scalar remainders. This file is
// compiled with -mavx2 -mfma; callers reach it only through the dispatch table
// after a cpuid check, so no AVX2 instruction executes on older CPUs.

#ifdef GYRO_BUILD_AVX2

#include <immintrin.h>

#include "gyrocompass/kernels.hpp"

namespace gyro::kernels {
namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d swap = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, swap));
}

double sum_avx2(const double* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
  double tail = 0.0;
  for (; i < n; ++i) tail += x[i];
  return hsum(acc) + tail;
}

double sumsq_avx2(const double* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d v = _mm256_loadu_pd(x + i);
    acc = _mm256_fmadd_pd(v, v, acc);
  }
  double tail = 0.0;
  for (; i < n; ++i) tail += x[i] * x[i];
  return hsum(acc) + tail;
}

double dot_avx2(const double* x, const double* y, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc);
  double tail = 0.0;
  for (; i < n; ++i) tail += x[i] * y[i];
  return hsum(acc) + tail;
}

void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vy = _mm256_loadu_pd(y + i);
    vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), vy);
    _mm256_storeu_pd(y + i, vy);
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void matvec_avx2(const double* a, std::size_t rows, std::size_t cols,
                 const double* x, double* y) {
  for (std::size_t r = 0; r < rows; ++r) y[r] = dot_avx2(a + r * cols, x, cols);
}

void matvec_acc_avx2(const double* a, std::size_t rows, std::size_t cols,
                     const double* x, double* y) {
  for (std::size_t r = 0; r < rows; ++r) y[r] += dot_avx2(a + r * cols, x, cols);
}

void matvec_t_acc_avx2(const double* a, std::size_t rows, std::size_t cols,
                       const double* x, double* y) {
  for (std::size_t r = 0; r < rows; ++r) axpy_avx2(x[r], a + r * cols, y, cols);
}

void outer_acc_avx2(double* a, std::size_t rows, std::size_t cols,
                    const double* x, const double* y) {
  for (std::size_t r = 0; r < rows; ++r) axpy_avx2(x[r], y, a + r * cols, cols);
}

double allan_sumsq_avx2(const double* phase, std::size_t n_terms, std::size_t m) {
  const __m256d two = _mm256_set1_pd(2.0);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n_terms; i += 4) {
    __m256d x0 = _mm256_loadu_pd(phase + i);
    __m256d x1 = _mm256_loadu_pd(phase + i + m);
    __m256d x2 = _mm256_loadu_pd(phase + i + 2 * m);
    __m256d d = _mm256_fnmadd_pd(two, x1, _mm256_add_pd(x0, x2));
    acc = _mm256_fmadd_pd(d, d, acc);
  }
  double tail = 0.0;
  for (; i < n_terms; ++i) {
    const double d = phase[i + 2 * m] - 2.0 * phase[i + m] + phase[i];
    tail += d * d;
  }
  return hsum(acc) + tail;
}

}  // namespace

const Ops* avx2_table() {
  static const Ops ops = {
      "avx2",        sum_avx2,        sumsq_avx2,     dot_avx2,
      axpy_avx2,     matvec_avx2,     matvec_acc_avx2, matvec_t_acc_avx2,
      outer_acc_avx2, allan_sumsq_avx2,
  };
  return &ops;
}

}  // namespace gyro::kernels

#endif  // GYRO_BUILD_AVX2
