#include "hlt/pattern_functions.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include <boost/numeric/odeint.hpp>
#include <fmt/core.h>

#include "hlt/errors.hpp"
#include "hlt/simd/kernels.hpp"

namespace hlt {

namespace {

using OdeState = std::array<double, 2>;

constexpr double kOdeTolerance = 1e-13;

// Irregular values and slopes at x = 0 for n = 0..rows-1. Odd n are even
// functions (slope 0), even n are odd functions (value 0).
void origin_values(int rows, std::vector<double>& value, std::vector<double>& slope) {
  const double quarter_root_pi = std::pow(std::numbers::pi, 0.25);
  value.assign(static_cast<std::size_t>(rows) + 1, 0.0);
  slope.assign(static_cast<std::size_t>(rows), 0.0);
  if (rows >= 1) value[1] = -std::numbers::sqrt2 * quarter_root_pi;
  for (int n = 1; n + 1 <= rows; ++n)
    value[n + 1] = -std::sqrt(static_cast<double>(n) / (n + 1)) * value[n - 1];
  slope[0] = 2.0 * quarter_root_pi;
  for (int n = 1; n < rows; ++n)
    slope[n] = (std::sqrt(static_cast<double>(n)) * value[n - 1] -
                std::sqrt(static_cast<double>(n + 1)) * value[n + 1]) *
               (1.0 / std::numbers::sqrt2);
}

double default_envelope(int max_index) {
  return std::max(4.0, 2.1 * std::pow(2.0 * max_index + 1.0, 0.25));
}

}  // namespace

PatternFunctionEvaluator::PatternFunctionEvaluator(int max_index, double x_max)
    : max_index_(max_index), envelope_(default_envelope(max_index)) {
  if (max_index < 0) fail(ErrorCode::kInvalidArgument, "pattern function index must be non-negative");
  if (!(x_max >= 0.0) || !std::isfinite(x_max))
    fail(ErrorCode::kInvalidArgument, "pattern function grid bound must be finite and non-negative");
  const double natural = std::sqrt(2.0 * max_index + 1.0) + 6.0;
  const auto nodes = static_cast<std::size_t>(std::ceil(std::max(x_max, natural) / kGridStep));
  x_max_ = static_cast<double>(nodes) * kGridStep;

  const int rows = max_index + 1;
  std::vector<double> start_value;
  std::vector<double> start_slope;
  origin_values(rows, start_value, start_slope);

  std::vector<double> grid(nodes + 1);
  for (std::size_t i = 0; i <= nodes; ++i) grid[i] = static_cast<double>(i) * kGridStep;

  namespace odeint = boost::numeric::odeint;
  rows_.resize(static_cast<std::size_t>(rows));
  for (int n = 0; n < rows; ++n) {
    Row& row = rows_[n];
    row.value.resize(nodes + 1);
    row.slope.resize(nodes + 1);
    const double k = 2.0 * n + 2.0;
    // y'' + 2x y' + (2n + 2) y = 0 for y = phi_n e^{-x^2/2}
    auto system = [k](const OdeState& y, OdeState& dy, double x) {
      dy[0] = y[1];
      dy[1] = -2.0 * x * y[1] - k * y[0];
    };
    std::size_t next = 0;
    auto record = [&](const OdeState& y, double) {
      row.value[next] = y[0];
      row.slope[next] = y[1];
      ++next;
    };
    OdeState y{start_value[n], start_slope[n]};
    auto stepper = odeint::make_controlled(kOdeTolerance, kOdeTolerance,
                                           odeint::runge_kutta_fehlberg78<OdeState>());
    odeint::integrate_times(stepper, system, y, grid.begin(), grid.end(), kGridStep / 4.0, record);
  }
}

void PatternFunctionEvaluator::interpolate(int n, double abs_x, double& value, double& slope) const {
  const Row& row = rows_[n];
  const std::size_t last = row.value.size() - 1;
  auto i = static_cast<std::size_t>(abs_x / kGridStep);
  if (i >= last) i = last - 1;
  const double x0 = static_cast<double>(i) * kGridStep;
  const double x1 = x0 + kGridStep;
  const double t = (abs_x - x0) / kGridStep;
  const double t2 = t * t;
  const double t3 = t2 * t;
  const double h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
  const double h10 = t3 - 2.0 * t2 + t;
  const double h01 = -2.0 * t3 + 3.0 * t2;
  const double h11 = t3 - t2;
  const double k = 2.0 * n + 2.0;
  const double v0 = row.value[i], v1 = row.value[i + 1];
  const double s0 = row.slope[i], s1 = row.slope[i + 1];
  const double c0 = -2.0 * x0 * s0 - k * v0;
  const double c1 = -2.0 * x1 * s1 - k * v1;
  value = h00 * v0 + h10 * kGridStep * s0 + h01 * v1 + h11 * kGridStep * s1;
  slope = h00 * s0 + h10 * kGridStep * c0 + h01 * s1 + h11 * kGridStep * c1;
}

double PatternFunctionEvaluator::scaled_irregular(int n, double x) const {
  double value = 0.0, slope = 0.0;
  if (n < 0 || n > max_index_) fail(ErrorCode::kOrderOverflow, "irregular function index out of range");
  if (!(std::abs(x) <= x_max_)) fail(ErrorCode::kOutOfGrid, "x outside the tabulated range");
  interpolate(n, std::abs(x), value, slope);
  return (x < 0.0 && n % 2 == 0) ? -value : value;
}

double PatternFunctionEvaluator::scaled_irregular_derivative(int n, double x) const {
  double value = 0.0, slope = 0.0;
  if (n < 0 || n > max_index_) fail(ErrorCode::kOrderOverflow, "irregular function index out of range");
  if (!(std::abs(x) <= x_max_)) fail(ErrorCode::kOutOfGrid, "x outside the tabulated range");
  interpolate(n, std::abs(x), value, slope);
  return (x < 0.0 && n % 2 == 1) ? -slope : slope;
}

double PatternFunctionEvaluator::operator()(int n, int m, double x) const {
  if (n < 0 || m < 0 || n > max_index_ || m > max_index_)
    fail(ErrorCode::kOrderOverflow, "pattern function index (" + std::to_string(n) + ", " +
                                        std::to_string(m) + ") exceeds " + std::to_string(max_index_));
  std::vector<double> all(static_cast<std::size_t>(pair_count()));
  evaluate_batch(std::span<const double>(&x, 1), all);
  return all[static_cast<std::size_t>(pair_index(n, m))];
}

void PatternFunctionEvaluator::evaluate_batch(std::span<const double> x, std::span<double> out) const {
  const std::size_t K = x.size();
  const int rows = max_index_ + 1;
  if (out.size() < static_cast<std::size_t>(pair_count()) * K)
    fail(ErrorCode::kInvalidArgument, "pattern function output buffer too small");
  if (K == 0) return;
  for (double v : x) {
    if (!(std::abs(v) <= x_max_)) {
      fail(ErrorCode::kOutOfGrid, fmt::format("quadrature value {:.6g} outside tabulated range +-{:.6g}", v, x_max_));
    }
  }

  const auto& kernels = simd::active_kernels();
  std::vector<double> regular(static_cast<std::size_t>(rows + 1) * K);
  std::vector<double> regular_slope(static_cast<std::size_t>(rows + 1) * K);
  kernels.hermite_functions(x, rows + 1, regular);
  kernels.hermite_derivatives(regular, rows + 1, K, regular_slope);

  // irregular[n] = phi_n e^{-x^2/2}, shifted[n] = (phi_n' e^{-x^2/2}), both signed.
  std::vector<double> irregular(static_cast<std::size_t>(rows) * K);
  std::vector<double> shifted(static_cast<std::size_t>(rows) * K);
  for (int n = 0; n < rows; ++n) {
    for (std::size_t k = 0; k < K; ++k) {
      const double ax = std::abs(x[k]);
      double value = 0.0, slope = 0.0;
      interpolate(n, ax, value, slope);
      const double combined = slope + ax * value;
      const bool negative = x[k] < 0.0;
      irregular[n * K + k] = (negative && n % 2 == 0) ? -value : value;
      shifted[n * K + k] = (negative && n % 2 == 1) ? -combined : combined;
    }
  }

  for (int n = 0; n < rows; ++n) {
    const std::span<const double> irr(&irregular[n * K], K);
    const std::span<const double> sh(&shifted[n * K], K);
    for (int m = 0; m <= n; ++m) {
      kernels.multiply_add_pairs(std::span<const double>(&regular_slope[m * K], K), irr,
                                 std::span<const double>(&regular[m * K], K), sh,
                                 out.subspan(static_cast<std::size_t>(pair_index(n, m)) * K, K));
    }
  }

  const double worst = kernels.max_abs(out.first(static_cast<std::size_t>(pair_count()) * K));
  if (!(worst <= envelope_)) {
    fail(ErrorCode::kUnstable, fmt::format("pattern function magnitude {:.6g} exceeds the envelope {:.6g}", worst, envelope_));
  }
}

}  // namespace hlt
