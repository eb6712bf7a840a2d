#pragma once

// Sampling functions for density-matrix reconstruction from quadrature data.
//
// rho_nm = E[ f_nm(x) e^{i(n-m) phi} ] for phi uniform on [0, pi). For n >= m,
// f_nm = d/dx [psi_m(x) phi_n(x)] with psi_m the normalizable oscillator
// eigenfunction and phi_n the irregular solution of the same equation,
// normalized so that W(psi_n, phi_n) = 2. f is symmetric in (n, m).
//
// The irregular functions are tabulated once on x in [0, x_max] by integrating
// the Gaussian-scaled oscillator equation outward from the origin, and
// interpolated with cubic Hermite splines (value and derivative at every
// node). Negative x uses parity.

#include <cstddef>
#include <span>
#include <vector>

namespace hlt {

class PatternFunctionEvaluator {
 public:
  static constexpr double kGridStep = 1.0 / 128.0;
  static constexpr int kSplineOrder = 3;

  /// Supports n, m <= max_index on |x| <= x_max. x_max = 0 picks
  /// sqrt(2 max_index + 1) + 6.
  explicit PatternFunctionEvaluator(int max_index, double x_max = 0.0);

  int max_index() const noexcept { return max_index_; }
  double x_max() const noexcept { return x_max_; }
  double grid_step() const noexcept { return kGridStep; }
  int spline_order() const noexcept { return kSplineOrder; }

  /// Sanity bound on |f_nm|; larger values mean the evaluation went unstable.
  double envelope() const noexcept { return envelope_; }

  double operator()(int n, int m, double x) const;

  /// Number of stored pairs n >= m.
  int pair_count() const noexcept { return (max_index_ + 1) * (max_index_ + 2) / 2; }
  static int pair_index(int n, int m) noexcept {
    return n >= m ? n * (n + 1) / 2 + m : m * (m + 1) / 2 + n;
  }

  /// out[pair_index(n, m) * K + k] = f_nm(x_k) for all n >= m, K = x.size().
  /// Throws kOutOfGrid for |x| > x_max and kUnstable if the envelope is broken.
  void evaluate_batch(std::span<const double> x, std::span<double> out) const;

  /// Irregular function phi_n e^{-x^2/2} and its derivative at x.
  double scaled_irregular(int n, double x) const;
  double scaled_irregular_derivative(int n, double x) const;

 private:
  struct Row {
    std::vector<double> value;
    std::vector<double> slope;
  };

  void interpolate(int n, double abs_x, double& value, double& slope) const;

  int max_index_;
  double x_max_;
  double envelope_;
  std::vector<Row> rows_;
};

}  // namespace hlt
