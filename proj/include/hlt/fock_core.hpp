#pragma once

// Fock-space building blocks: truncated density matrices, the signal states
// used throughout the project, oscillator eigenfunctions and state metrics.

#include <complex>
#include <cstddef>
#include <variant>
#include <vector>

namespace hlt {

using Complex = std::complex<double>;

inline constexpr int kDefaultDim = 12;
inline constexpr int kDefaultMaxOscillatorOrder = 2 * kDefaultDim + 2;
inline constexpr double kDefaultMaxTailMass = 1e-8;

/// Dense dim x dim complex matrix in the photon-number basis, row-major.
class FockMatrix {
 public:
  FockMatrix() = default;
  explicit FockMatrix(int dim);

  int dim() const noexcept { return dim_; }

  Complex& operator()(int n, int m) { return data_[index(n, m)]; }
  const Complex& operator()(int n, int m) const { return data_[index(n, m)]; }

  const std::vector<Complex>& data() const noexcept { return data_; }

  Complex trace() const;
  /// Largest |rho_nm - conj(rho_mn)|.
  double hermiticity_defect() const;
  FockMatrix hermitized() const;
  bool is_diagonal(double tol = 0.0) const;

  friend bool operator==(const FockMatrix&, const FockMatrix&) = default;

 private:
  std::size_t index(int n, int m) const {
    return static_cast<std::size_t>(n) * static_cast<std::size_t>(dim_) +
           static_cast<std::size_t>(m);
  }

  int dim_ = 0;
  std::vector<Complex> data_;
};

struct Coherent {
  Complex amplitude;
};
struct Phav {
  double modulus = 0.0;
};
struct Fock {
  int n = 0;  // 0 or 1
};
/// eta |1><1| + (1 - eta) |0><0|.
struct AttenuatedFock1 {
  double eta = 1.0;
};

using StatePrep = std::variant<Coherent, Phav, Fock, AttenuatedFock1>;

/// Throws kInvalidArgument when a field violates its invariant.
void validate(const StatePrep& prep);

bool is_phase_insensitive(const StatePrep& prep);

struct BuiltState {
  FockMatrix rho;
  double tail_mass = 0.0;  // probability weight outside the truncated space
};

/// Normalized harmonic-oscillator eigenfunction (vacuum quadrature variance
/// 1/2), via the three-term recurrence on Gaussian-stripped Hermite functions.
double oscillator_wavefunction(int n, double x, int max_order = kDefaultMaxOscillatorOrder);

/// Truncated density matrix of `prep`. Coherent and PHAV states are rejected
/// with kCutoffTooSmall if the discarded tail exceeds `max_tail_mass`.
BuiltState build_state(const StatePrep& prep, int dim, double max_tail_mass = kDefaultMaxTailMass);

/// Poisson weight outside the first `dim` Fock levels for mean photon number
/// `mean`.
double poisson_tail_mass(double mean, int dim);

/// Uhlmann fidelity (Tr sqrt(sqrt(sigma) rho sqrt(sigma)))^2. Both inputs are
/// Hermitized and projected onto the physical set (negative eigenvalues
/// clipped, trace renormalized) first.
double fidelity(const FockMatrix& rho, const FockMatrix& sigma);

/// Same overlap without the physical projection; reported as a diagnostic for
/// reconstructed matrices that are not positive.
double fidelity_raw(const FockMatrix& rho, const FockMatrix& sigma);

double mean_photon_number(const FockMatrix& rho);

/// <x_theta> and <x_theta^2> with x_theta = (a e^{-i theta} + a^dag e^{i theta}) / sqrt(2),
/// evaluated inside the truncated space.
double quadrature_mean(const FockMatrix& rho, double theta);
double quadrature_second_moment(const FockMatrix& rho, double theta);

/// Photon-number distribution read off the diagonal, negatives clamped to 0.
struct PhotonNumberDistribution {
  std::vector<double> probs;
};
PhotonNumberDistribution photon_number_distribution(const FockMatrix& rho);

}  // namespace hlt
