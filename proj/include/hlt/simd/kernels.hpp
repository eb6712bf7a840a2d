#pragma once

// Data-parallel inner loops of the reconstruction and forward model.
//
// Every kernel has a scalar reference implementation and, on x86-64, an
// AVX2+FMA variant. The variant is chosen once per process (CPU detection,
// overridable with HLT_SIMD=scalar|avx2) so repeated runs on one machine are
// bit-identical. The two variants agree to rounding, not bitwise: the AVX2
// reductions use a different summation order and fused multiply-adds.

#include <cstddef>
#include <span>
#include <string_view>

namespace hlt::simd {

struct QuadratureSums {
  double first = 0.0;   // sum of 2 x cos(phi - theta)
  double second = 0.0;  // sum of the second-moment kernel
};

struct KernelTable {
  std::string_view name;

  // out[n * K + k] = h_n(x_k) for n < rows, where h_n = psi_n e^{x^2/2}
  // (normalized Hermite functions without the Gaussian), K = x.size().
  void (*hermite_functions)(std::span<const double> x, int rows, std::span<double> out);

  // out[m * K + k] = (sqrt(m) h_{m-1} - sqrt(m+1) h_{m+1}) / sqrt(2) for m < rows - 1,
  // i.e. psi_m' e^{x^2/2}. `h` holds `rows` rows of length K.
  void (*hermite_derivatives)(std::span<const double> h, int rows, std::size_t K, std::span<double> out);

  // out = a * b + c * d elementwise.
  void (*multiply_add_pairs)(std::span<const double> a, std::span<const double> b,
                             std::span<const double> c, std::span<const double> d,
                             std::span<double> out);

  // cos_out[d * K + k] = cos(d phi_k), sin_out likewise, d < orders.
  void (*phase_harmonics)(std::span<const double> phase, int orders, std::span<double> cos_out,
                          std::span<double> sin_out);

  double (*dot)(std::span<const double> a, std::span<const double> b);

  // Sums of the first- and second-moment quadrature kernels given x_k and
  // c_k = cos(phi_k - theta).
  QuadratureSums (*quadrature_sums)(std::span<const double> x, std::span<const double> cos_rel,
                                    double inv_eta);

  // y += alpha * x
  void (*axpy)(double alpha, std::span<const double> x, std::span<double> y);

  double (*max_abs)(std::span<const double> x);
};

const KernelTable& scalar_kernels();

/// nullptr when the build has no AVX2 variant.
const KernelTable* avx2_kernels();

bool cpu_supports_avx2();

/// The table every library routine uses.
const KernelTable& active_kernels();

}  // namespace hlt::simd
