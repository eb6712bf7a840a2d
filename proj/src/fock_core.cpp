#include "hlt/fock_core.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Dense>
#include <boost/math/special_functions/gamma.hpp>
#include <fmt/core.h>

#include "hlt/errors.hpp"

namespace hlt {

namespace {

using Eigen::MatrixXcd;

constexpr double kHermiticityTolerance = 1e-8;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

MatrixXcd to_eigen(const FockMatrix& rho) {
  MatrixXcd out(rho.dim(), rho.dim());
  for (int n = 0; n < rho.dim(); ++n)
    for (int m = 0; m < rho.dim(); ++m) out(n, m) = rho(n, m);
  return out;
}

void check_pair(const FockMatrix& rho, const FockMatrix& sigma) {
  if (rho.dim() != sigma.dim() || rho.dim() == 0) {
    fail(ErrorCode::kDimensionMismatch, "fidelity needs two matrices of equal, non-zero dimension (got " +
                                            std::to_string(rho.dim()) + " and " +
                                            std::to_string(sigma.dim()) + ")");
  }
  if (rho.hermiticity_defect() > kHermiticityTolerance ||
      sigma.hermiticity_defect() > kHermiticityTolerance) {
    fail(ErrorCode::kNotHermitian, "fidelity input is not Hermitian within tolerance");
  }
}

MatrixXcd hermitian_part(const MatrixXcd& a) { return 0.5 * (a + a.adjoint()); }

// Clip negative eigenvalues and renormalize the trace to one.
MatrixXcd physical_projection(const MatrixXcd& a) {
  Eigen::SelfAdjointEigenSolver<MatrixXcd> solver(hermitian_part(a));
  Eigen::VectorXd values = solver.eigenvalues().cwiseMax(0.0);
  const double total = values.sum();
  if (total <= 0.0) fail(ErrorCode::kDomain, "matrix has no positive spectral weight");
  values /= total;
  return solver.eigenvectors() * values.asDiagonal() * solver.eigenvectors().adjoint();
}

MatrixXcd psd_sqrt(const MatrixXcd& a) {
  Eigen::SelfAdjointEigenSolver<MatrixXcd> solver(hermitian_part(a));
  const Eigen::VectorXd roots = solver.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return solver.eigenvectors() * roots.asDiagonal() * solver.eigenvectors().adjoint();
}

double uhlmann(const MatrixXcd& rho, const MatrixXcd& sigma) {
  const MatrixXcd root = psd_sqrt(sigma);
  const MatrixXcd inner = hermitian_part(root * rho * root);
  Eigen::SelfAdjointEigenSolver<MatrixXcd> solver(inner, Eigen::EigenvaluesOnly);
  const double overlap = solver.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
  return overlap * overlap;
}

}  // namespace

FockMatrix::FockMatrix(int dim) : dim_(dim) {
  if (dim < 1) fail(ErrorCode::kInvalidArgument, "FockMatrix dimension must be positive");
  data_.assign(static_cast<std::size_t>(dim) * static_cast<std::size_t>(dim), Complex{});
}

Complex FockMatrix::trace() const {
  Complex sum{};
  for (int n = 0; n < dim_; ++n) sum += (*this)(n, n);
  return sum;
}

double FockMatrix::hermiticity_defect() const {
  double worst = 0.0;
  for (int n = 0; n < dim_; ++n)
    for (int m = n; m < dim_; ++m)
      worst = std::max(worst, std::abs((*this)(n, m) - std::conj((*this)(m, n))));
  return worst;
}

FockMatrix FockMatrix::hermitized() const {
  FockMatrix out(dim_);
  for (int n = 0; n < dim_; ++n)
    for (int m = 0; m < dim_; ++m) out(n, m) = 0.5 * ((*this)(n, m) + std::conj((*this)(m, n)));
  // Diagonal is real by construction; remove rounding residue.
  for (int n = 0; n < dim_; ++n) out(n, n) = Complex(out(n, n).real(), 0.0);
  return out;
}

bool FockMatrix::is_diagonal(double tol) const {
  for (int n = 0; n < dim_; ++n)
    for (int m = 0; m < dim_; ++m)
      if (n != m && std::abs((*this)(n, m)) > tol) return false;
  return true;
}

void validate(const StatePrep& prep) {
  std::visit(Overloaded{
                 [](const Coherent& c) {
                   if (!std::isfinite(c.amplitude.real()) || !std::isfinite(c.amplitude.imag()))
                     fail(ErrorCode::kInvalidArgument, "coherent amplitude must be finite");
                 },
                 [](const Phav& p) {
                   if (!std::isfinite(p.modulus) || p.modulus < 0.0)
                     fail(ErrorCode::kInvalidArgument, "PHAV modulus must be finite and >= 0");
                 },
                 [](const Fock& f) {
                   if (f.n != 0 && f.n != 1)
                     fail(ErrorCode::kInvalidArgument, "only Fock states |0> and |1> are supported");
                 },
                 [](const AttenuatedFock1& a) {
                   if (!(a.eta > 0.0 && a.eta <= 1.0))
                     fail(ErrorCode::kInvalidArgument, "attenuated Fock eta must lie in (0, 1]");
                 },
             },
             prep);
}

bool is_phase_insensitive(const StatePrep& prep) {
  return !std::holds_alternative<Coherent>(prep);
}

double oscillator_wavefunction(int n, double x, int max_order) {
  if (std::isnan(x)) fail(ErrorCode::kDomain, "oscillator_wavefunction: x is NaN");
  if (!std::isfinite(x)) return 0.0;
  if (n < 0) fail(ErrorCode::kInvalidArgument, "oscillator order must be non-negative");
  if (n > max_order) {
    fail(ErrorCode::kOrderOverflow, "oscillator order " + std::to_string(n) +
                                        " exceeds configured maximum " + std::to_string(max_order));
  }
  // h_k = psi_k(x) e^{x^2/2}; the Gaussian is applied once at the end.
  double previous = 0.0;
  double current = std::pow(std::numbers::pi, -0.25);
  for (int k = 0; k < n; ++k) {
    const double next = (std::numbers::sqrt2 * x * current - std::sqrt(static_cast<double>(k)) * previous) /
                        std::sqrt(static_cast<double>(k + 1));
    previous = current;
    current = next;
  }
  return current * std::exp(-0.5 * x * x);
}

double poisson_tail_mass(double mean, int dim) {
  if (dim <= 0) return 1.0;
  if (mean <= 0.0) return 0.0;
  // P(N >= dim) for N ~ Poisson(mean) is the regularized lower gamma P(dim, mean).
  return boost::math::gamma_p(static_cast<double>(dim), mean);
}

BuiltState build_state(const StatePrep& prep, int dim, double max_tail_mass) {
  validate(prep);
  if (dim < 2) fail(ErrorCode::kInvalidArgument, "state dimension must be at least 2");
  BuiltState out{FockMatrix(dim), 0.0};
  auto check_tail = [&](double mean) {
    out.tail_mass = poisson_tail_mass(mean, dim);
    if (out.tail_mass > max_tail_mass) {
      fail(ErrorCode::kCutoffTooSmall, fmt::format("dimension {} leaves tail mass {:.3g} above {:.3g}", dim,
                                                   out.tail_mass, max_tail_mass));
    }
  };
  std::visit(Overloaded{
                 [&](const Coherent& c) {
                   check_tail(std::norm(c.amplitude));
                   std::vector<Complex> amp(static_cast<std::size_t>(dim));
                   amp[0] = std::exp(-0.5 * std::norm(c.amplitude));
                   for (int n = 1; n < dim; ++n)
                     amp[n] = amp[n - 1] * c.amplitude / std::sqrt(static_cast<double>(n));
                   for (int n = 0; n < dim; ++n)
                     for (int m = 0; m < dim; ++m) out.rho(n, m) = amp[n] * std::conj(amp[m]);
                   for (int n = 0; n < dim; ++n) out.rho(n, n) = Complex(out.rho(n, n).real(), 0.0);
                 },
                 [&](const Phav& p) {
                   const double mean = p.modulus * p.modulus;
                   check_tail(mean);
                   double weight = std::exp(-mean);
                   for (int n = 0; n < dim; ++n) {
                     if (n > 0) weight *= mean / n;
                     out.rho(n, n) = weight;
                   }
                 },
                 [&](const Fock& f) { out.rho(f.n, f.n) = 1.0; },
                 [&](const AttenuatedFock1& a) {
                   out.rho(0, 0) = 1.0 - a.eta;
                   out.rho(1, 1) = a.eta;
                 },
             },
             prep);
  return out;
}

double fidelity(const FockMatrix& rho, const FockMatrix& sigma) {
  check_pair(rho, sigma);
  return uhlmann(physical_projection(to_eigen(rho)), physical_projection(to_eigen(sigma)));
}

double fidelity_raw(const FockMatrix& rho, const FockMatrix& sigma) {
  check_pair(rho, sigma);
  return uhlmann(hermitian_part(to_eigen(rho)), hermitian_part(to_eigen(sigma)));
}

double mean_photon_number(const FockMatrix& rho) {
  double sum = 0.0;
  for (int n = 1; n < rho.dim(); ++n) sum += n * rho(n, n).real();
  return sum;
}

double quadrature_mean(const FockMatrix& rho, double theta) {
  // Tr[rho a] = sum_n sqrt(n) rho_{n,n-1}
  Complex tr_a{};
  for (int n = 1; n < rho.dim(); ++n) tr_a += std::sqrt(static_cast<double>(n)) * rho(n, n - 1);
  return std::numbers::sqrt2 * (std::polar(1.0, -theta) * tr_a).real();
}

double quadrature_second_moment(const FockMatrix& rho, double theta) {
  Complex tr_a2{};
  for (int n = 2; n < rho.dim(); ++n)
    tr_a2 += std::sqrt(static_cast<double>(n) * (n - 1)) * rho(n, n - 2);
  return (std::polar(1.0, -2.0 * theta) * tr_a2).real() + mean_photon_number(rho) +
         0.5 * rho.trace().real();
}

PhotonNumberDistribution photon_number_distribution(const FockMatrix& rho) {
  PhotonNumberDistribution out;
  out.probs.resize(static_cast<std::size_t>(rho.dim()));
  for (int n = 0; n < rho.dim(); ++n) out.probs[n] = std::max(0.0, rho(n, n).real());
  return out;
}

}  // namespace hlt
