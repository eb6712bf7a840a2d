#include <algorithm>
#include <cmath>
#include <numbers>

#include "hlt/simd/kernels.hpp"

namespace hlt::simd {

namespace {

void hermite_functions(std::span<const double> x, int rows, std::span<double> out) {
  const std::size_t K = x.size();
  const double h0 = std::pow(std::numbers::pi, -0.25);
  for (std::size_t k = 0; k < K; ++k) out[k] = h0;
  if (rows < 2) return;
  for (std::size_t k = 0; k < K; ++k) out[K + k] = std::numbers::sqrt2 * x[k] * h0;
  for (int n = 1; n + 1 < rows; ++n) {
    const double a = std::sqrt(2.0 / (n + 1));
    const double b = std::sqrt(static_cast<double>(n) / (n + 1));
    const double* prev = &out[(n - 1) * K];
    const double* cur = &out[n * K];
    double* next = &out[(n + 1) * K];
    for (std::size_t k = 0; k < K; ++k) next[k] = a * x[k] * cur[k] - b * prev[k];
  }
}

void hermite_derivatives(std::span<const double> h, int rows, std::size_t K, std::span<double> out) {
  const double* row1 = &h[K];
  for (std::size_t k = 0; k < K; ++k) out[k] = -row1[k] * (1.0 / std::numbers::sqrt2);
  for (int m = 1; m + 1 < rows; ++m) {
    const double a = std::sqrt(m / 2.0);
    const double b = std::sqrt((m + 1) / 2.0);
    const double* lower = &h[(m - 1) * K];
    const double* upper = &h[(m + 1) * K];
    double* dst = &out[m * K];
    for (std::size_t k = 0; k < K; ++k) dst[k] = a * lower[k] - b * upper[k];
  }
}

void multiply_add_pairs(std::span<const double> a, std::span<const double> b,
                        std::span<const double> c, std::span<const double> d,
                        std::span<double> out) {
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = a[k] * b[k] + c[k] * d[k];
}

void phase_harmonics(std::span<const double> phase, int orders, std::span<double> cos_out,
                     std::span<double> sin_out) {
  const std::size_t K = phase.size();
  for (std::size_t k = 0; k < K; ++k) {
    cos_out[k] = 1.0;
    sin_out[k] = 0.0;
  }
  if (orders < 2) return;
  for (std::size_t k = 0; k < K; ++k) {
    cos_out[K + k] = std::cos(phase[k]);
    sin_out[K + k] = std::sin(phase[k]);
  }
  const double* c1 = &cos_out[K];
  for (int d = 1; d + 1 < orders; ++d) {
    for (std::size_t k = 0; k < K; ++k) {
      const double two_c = 2.0 * c1[k];
      cos_out[(d + 1) * K + k] = two_c * cos_out[d * K + k] - cos_out[(d - 1) * K + k];
      sin_out[(d + 1) * K + k] = two_c * sin_out[d * K + k] - sin_out[(d - 1) * K + k];
    }
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) sum += a[k] * b[k];
  return sum;
}

QuadratureSums quadrature_sums(std::span<const double> x, std::span<const double> cos_rel,
                               double inv_eta) {
  QuadratureSums sums;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double c = cos_rel[k];
    sums.first += 2.0 * x[k] * c;
    sums.second += (4.0 * x[k] * x[k] - inv_eta) * (4.0 * c * c - 1.0) * 0.25 + 0.25;
  }
  return sums;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  for (std::size_t k = 0; k < y.size(); ++k) y[k] += alpha * x[k];
}

double max_abs(std::span<const double> x) {
  double worst = 0.0;
  for (double v : x) {
    if (std::isnan(v)) return v;
    worst = std::max(worst, std::abs(v));
  }
  return worst;
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{
      "scalar",        hermite_functions, hermite_derivatives, multiply_add_pairs,
      phase_harmonics, dot,               quadrature_sums,     axpy,
      max_abs,
  };
  return table;
}

}  // namespace hlt::simd
