// Scalar reference kernels. Deliberately plain loops: this is the ground truth
// the vectorized variant is tested against, and the fallback on non-AVX2 CPUs.

#include "gyrocompass/kernels.hpp"

namespace gyro::kernels {
namespace {

double sum_scalar(const double* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i];
  return acc;
}

double sumsq_scalar(const double* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * x[i];
  return acc;
}

double dot_scalar(const double* x, const double* y, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void matvec_scalar(const double* a, std::size_t rows, std::size_t cols,
                   const double* x, double* y) {
  for (std::size_t r = 0; r < rows; ++r) y[r] = dot_scalar(a + r * cols, x, cols);
}

void matvec_acc_scalar(const double* a, std::size_t rows, std::size_t cols,
                       const double* x, double* y) {
  for (std::size_t r = 0; r < rows; ++r) y[r] += dot_scalar(a + r * cols, x, cols);
}

void matvec_t_acc_scalar(const double* a, std::size_t rows, std::size_t cols,
                         const double* x, double* y) {
  for (std::size_t r = 0; r < rows; ++r) axpy_scalar(x[r], a + r * cols, y, cols);
}

void outer_acc_scalar(double* a, std::size_t rows, std::size_t cols,
                      const double* x, const double* y) {
  for (std::size_t r = 0; r < rows; ++r) axpy_scalar(x[r], y, a + r * cols, cols);
}

double allan_sumsq_scalar(const double* phase, std::size_t n_terms, std::size_t m) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n_terms; ++i) {
    const double d = phase[i + 2 * m] - 2.0 * phase[i + m] + phase[i];
    acc += d * d;
  }
  return acc;
}

}  // namespace

const Ops& scalar() {
  static const Ops ops = {
      "scalar",        sum_scalar,        sumsq_scalar,     dot_scalar,
      axpy_scalar,     matvec_scalar,     matvec_acc_scalar, matvec_t_acc_scalar,
      outer_acc_scalar, allan_sumsq_scalar,
  };
  return ops;
}

}  // namespace gyro::kernels
