// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.

#include <immintrin.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "hlt/simd/kernels.hpp"

namespace hlt::simd {

namespace {

constexpr std::size_t kLanes = 4;

inline double horizontal_sum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d pair = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(pair, _mm_unpackhi_pd(pair, pair)));
}

void hermite_functions(std::span<const double> x, int rows, std::span<double> out) {
  const std::size_t K = x.size();
  const double h0 = std::pow(std::numbers::pi, -0.25);
  for (std::size_t k = 0; k < K; ++k) out[k] = h0;
  if (rows < 2) return;
  for (std::size_t k = 0; k < K; ++k) out[K + k] = std::numbers::sqrt2 * x[k] * h0;
  for (int n = 1; n + 1 < rows; ++n) {
    const double a = std::sqrt(2.0 / (n + 1));
    const double b = std::sqrt(static_cast<double>(n) / (n + 1));
    const __m256d va = _mm256_set1_pd(a);
    const __m256d vb = _mm256_set1_pd(b);
    const double* prev = &out[(n - 1) * K];
    const double* cur = &out[n * K];
    double* next = &out[(n + 1) * K];
    std::size_t k = 0;
    for (; k + kLanes <= K; k += kLanes) {
      const __m256d ax = _mm256_mul_pd(va, _mm256_loadu_pd(&x[k]));
      const __m256d bp = _mm256_mul_pd(vb, _mm256_loadu_pd(prev + k));
      _mm256_storeu_pd(next + k, _mm256_fmsub_pd(ax, _mm256_loadu_pd(cur + k), bp));
    }
    for (; k < K; ++k) next[k] = std::fma(a * x[k], cur[k], -(b * prev[k]));
  }
}

void hermite_derivatives(std::span<const double> h, int rows, std::size_t K, std::span<double> out) {
  const double* row1 = &h[K];
  for (std::size_t k = 0; k < K; ++k) out[k] = -row1[k] * (1.0 / std::numbers::sqrt2);
  for (int m = 1; m + 1 < rows; ++m) {
    const double a = std::sqrt(m / 2.0);
    const double b = std::sqrt((m + 1) / 2.0);
    const __m256d va = _mm256_set1_pd(a);
    const __m256d vb = _mm256_set1_pd(b);
    const double* lower = &h[(m - 1) * K];
    const double* upper = &h[(m + 1) * K];
    double* dst = &out[m * K];
    std::size_t k = 0;
    for (; k + kLanes <= K; k += kLanes) {
      const __m256d bu = _mm256_mul_pd(vb, _mm256_loadu_pd(upper + k));
      _mm256_storeu_pd(dst + k, _mm256_fmsub_pd(va, _mm256_loadu_pd(lower + k), bu));
    }
    for (; k < K; ++k) dst[k] = std::fma(a, lower[k], -(b * upper[k]));
  }
}

void multiply_add_pairs(std::span<const double> a, std::span<const double> b,
                        std::span<const double> c, std::span<const double> d,
                        std::span<double> out) {
  const std::size_t K = out.size();
  std::size_t k = 0;
  for (; k + kLanes <= K; k += kLanes) {
    const __m256d cd = _mm256_mul_pd(_mm256_loadu_pd(&c[k]), _mm256_loadu_pd(&d[k]));
    _mm256_storeu_pd(&out[k], _mm256_fmadd_pd(_mm256_loadu_pd(&a[k]), _mm256_loadu_pd(&b[k]), cd));
  }
  for (; k < K; ++k) out[k] = std::fma(a[k], b[k], c[k] * d[k]);
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
    std::size_t k = 0;
    for (; k + kLanes <= K; k += kLanes) {
      const __m256d two_c = _mm256_add_pd(_mm256_loadu_pd(c1 + k), _mm256_loadu_pd(c1 + k));
      const __m256d c_next = _mm256_fmsub_pd(two_c, _mm256_loadu_pd(&cos_out[d * K + k]),
                                             _mm256_loadu_pd(&cos_out[(d - 1) * K + k]));
      const __m256d s_next = _mm256_fmsub_pd(two_c, _mm256_loadu_pd(&sin_out[d * K + k]),
                                             _mm256_loadu_pd(&sin_out[(d - 1) * K + k]));
      _mm256_storeu_pd(&cos_out[(d + 1) * K + k], c_next);
      _mm256_storeu_pd(&sin_out[(d + 1) * K + k], s_next);
    }
    for (; k < K; ++k) {
      const double two_c = 2.0 * c1[k];
      cos_out[(d + 1) * K + k] = std::fma(two_c, cos_out[d * K + k], -cos_out[(d - 1) * K + k]);
      sin_out[(d + 1) * K + k] = std::fma(two_c, sin_out[d * K + k], -sin_out[(d - 1) * K + k]);
    }
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  const std::size_t K = a.size();
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 2 * kLanes <= K; k += 2 * kLanes) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(&a[k]), _mm256_loadu_pd(&b[k]), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(&a[k + kLanes]), _mm256_loadu_pd(&b[k + kLanes]), acc1);
  }
  double sum = horizontal_sum(_mm256_add_pd(acc0, acc1));
  for (; k < K; ++k) sum = std::fma(a[k], b[k], sum);
  return sum;
}

QuadratureSums quadrature_sums(std::span<const double> x, std::span<const double> cos_rel,
                               double inv_eta) {
  const std::size_t K = x.size();
  const __m256d two = _mm256_set1_pd(2.0);
  const __m256d four = _mm256_set1_pd(4.0);
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d quarter = _mm256_set1_pd(0.25);
  const __m256d veta = _mm256_set1_pd(inv_eta);
  __m256d first = _mm256_setzero_pd();
  __m256d second = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + kLanes <= K; k += kLanes) {
    const __m256d vx = _mm256_loadu_pd(&x[k]);
    const __m256d vc = _mm256_loadu_pd(&cos_rel[k]);
    first = _mm256_fmadd_pd(_mm256_mul_pd(two, vx), vc, first);
    const __m256d radial = _mm256_fmsub_pd(_mm256_mul_pd(four, vx), vx, veta);
    const __m256d angular = _mm256_fmsub_pd(_mm256_mul_pd(four, vc), vc, one);
    second = _mm256_add_pd(second, _mm256_fmadd_pd(_mm256_mul_pd(radial, angular), quarter, quarter));
  }
  QuadratureSums sums{horizontal_sum(first), horizontal_sum(second)};
  for (; k < K; ++k) {
    const double c = cos_rel[k];
    sums.first += 2.0 * x[k] * c;
    sums.second += (4.0 * x[k] * x[k] - inv_eta) * (4.0 * c * c - 1.0) * 0.25 + 0.25;
  }
  return sums;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  const std::size_t K = y.size();
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t k = 0;
  for (; k + kLanes <= K; k += kLanes)
    _mm256_storeu_pd(&y[k], _mm256_fmadd_pd(va, _mm256_loadu_pd(&x[k]), _mm256_loadu_pd(&y[k])));
  for (; k < K; ++k) y[k] = std::fma(alpha, x[k], y[k]);
}

double max_abs(std::span<const double> x) {
  const std::size_t K = x.size();
  const __m256d sign = _mm256_set1_pd(-0.0);
  __m256d worst = _mm256_setzero_pd();
  __m256d unordered = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + kLanes <= K; k += kLanes) {
    const __m256d v = _mm256_loadu_pd(&x[k]);
    unordered = _mm256_or_pd(unordered, _mm256_cmp_pd(v, v, _CMP_UNORD_Q));
    worst = _mm256_max_pd(worst, _mm256_andnot_pd(sign, v));
  }
  if (_mm256_movemask_pd(unordered) != 0) return std::numeric_limits<double>::quiet_NaN();
  alignas(32) double lanes[kLanes];
  _mm256_store_pd(lanes, worst);
  double result = std::max(std::max(lanes[0], lanes[1]), std::max(lanes[2], lanes[3]));
  for (; k < K; ++k) {
    if (std::isnan(x[k])) return x[k];
    result = std::max(result, std::abs(x[k]));
  }
  return result;
}

}  // namespace

const KernelTable* avx2_kernels() {
  static const KernelTable table{
      "avx2",          hermite_functions, hermite_derivatives, multiply_add_pairs,
      phase_harmonics, dot,               quadrature_sums,     axpy,
      max_abs,
  };
  return &table;
}

}  // namespace hlt::simd
