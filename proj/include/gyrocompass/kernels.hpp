#pragma once

// Low-level numeric kernels behind the simulator, Allan estimator and LSTM.
// Two implementations ship: portable scalar reference code and an AVX2+FMA
// variant. Selection happens once at runtime (cpuid plus an environment
// override); every entry point is exposed through the Ops table so the two
// variants stay interchangeable and equivalence-testable.

#include <cstddef>

namespace gyro::kernels {

struct Ops {
  const char* name;

  double (*sum)(const double* x, std::size_t n);
  double (*sumsq)(const double* x, std::size_t n);
  double (*dot)(const double* x, const double* y, std::size_t n);

  // y += a * x
  void (*axpy)(double a, const double* x, double* y, std::size_t n);

  // Row-major A is rows x cols. matvec overwrites y with A*x, matvec_acc
  // accumulates A*x into y, matvec_t_acc accumulates A^T * x (x has length
  // rows, y length cols), outer_acc accumulates the outer product x * y^T.
  void (*matvec)(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y);
  void (*matvec_acc)(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y);
  void (*matvec_t_acc)(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y);
  void (*outer_acc)(double* a, std::size_t rows, std::size_t cols, const double* x, const double* y);

  // Allan second-difference power: sum over i in [0, n_terms) of
  // (phase[i + 2m] - 2*phase[i + m] + phase[i])^2.
  double (*allan_sumsq)(const double* phase, std::size_t n_terms, std::size_t m);
};

// Portable reference implementation; always available.
const Ops& scalar();

// AVX2 implementation, or nullptr when the binary lacks the code path or the
// CPU lacks the instructions.
const Ops* avx2_or_null();

// The dispatched table. Resolution order: GYROCOMPASS_KERNELS environment
// variable ("scalar" or "avx2") when it names an available variant, otherwise
// AVX2 when supported, otherwise scalar. Resolved once per process.
const Ops& active();

}  // namespace gyro::kernels
