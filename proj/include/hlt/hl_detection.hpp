#pragma once

// Forward model of homodyne-like detection: a signal and a weak local
// oscillator meet on a balanced beam splitter, and two photon-number-resolving
// detectors count the outputs c and d.

#include <cstdint>
#include <span>
#include <vector>

#include "hlt/fock_core.hpp"

namespace hlt {

struct LOField {
  double magnitude = 1.0;  // |beta|; |beta|^2 is the mean LO photon number
  double phase = 0.0;      // radians
};

struct DetectorEfficiency {
  double eta_c = 1.0;
  double eta_d = 1.0;
};

void validate(const LOField& lo);
void validate(const DetectorEfficiency& eff);

/// LO amplitude as seen by the detectors, sqrt(mean(eta_c, eta_d)) |beta|. This
/// is the amplitude that rescales count differences into quadrature units so
/// that reconstructions refer to the detected state.
double detected_lo_magnitude(double lo_magnitude, const DetectorEfficiency& eff);

/// q(n, m) on [0, n_max]^2 plus the probability mass beyond the table.
class JointCountDistribution {
 public:
  JointCountDistribution(int n_max, std::vector<double> table, double tail_mass);

  int n_max() const noexcept { return n_max_; }
  double tail_mass() const noexcept { return tail_mass_; }
  double operator()(int n, int m) const {
    return table_[static_cast<std::size_t>(n) * (n_max_ + 1) + static_cast<std::size_t>(m)];
  }
  std::span<const double> table() const noexcept { return table_; }
  double total() const;

 private:
  int n_max_;
  std::vector<double> table_;
  double tail_mass_;
};

/// Probability law of Delta = n - m on [min_delta, max_delta].
class HLDistribution {
 public:
  HLDistribution(int min_delta, std::vector<double> probs, double tail_mass);

  int min_delta() const noexcept { return min_delta_; }
  int max_delta() const noexcept { return min_delta_ + static_cast<int>(probs_.size()) - 1; }
  double tail_mass() const noexcept { return tail_mass_; }
  /// Zero outside the support.
  double operator()(int delta) const;
  std::span<const double> probs() const noexcept { return probs_; }

  double mean() const;
  double variance() const;

 private:
  int min_delta_;
  std::vector<double> probs_;
  double tail_mass_;
};

/// One detection event.
struct HLSample {
  std::int64_t delta = 0;  // n_c - n_d
  double delta_phi = 0.0;  // delta / (sqrt(2) |beta|)
  double phase = 0.0;      // LO phase phi
};

struct JointStatisticsOptions {
  int n_max = 0;  // 0 = automatic initial guess
  double max_tail_mass = 1e-9;
  int n_max_cap = 4096;
};

/// Exact joint photon-count statistics at the two beam-splitter outputs.
JointCountDistribution joint_statistics(const StatePrep& prep, const LOField& lo,
                                        const DetectorEfficiency& eff,
                                        const JointStatisticsOptions& options = {});

/// Delta-marginal of q(n, m).
HLDistribution hl_distribution(const JointCountDistribution& q);

double rescale_delta(std::int64_t delta, double lo_magnitude);

/// Raw counts for one pulse; sample_trace is the common case that folds these
/// into HLSamples immediately.
struct CountPair {
  std::int64_t n_c = 0;
  std::int64_t n_d = 0;
};

/// Monte Carlo counts, one pair per entry of `phases`. Deterministic in
/// `seed`, independent of thread count.
std::vector<CountPair> sample_counts(const StatePrep& prep, double lo_magnitude,
                                     std::span<const double> phases,
                                     const DetectorEfficiency& eff, std::uint64_t seed);

/// Monte Carlo HL trace. Delta_phi uses the detected LO amplitude.
std::vector<HLSample> sample_trace(const StatePrep& prep, double lo_magnitude,
                                   std::span<const double> phases, const DetectorEfficiency& eff,
                                   std::uint64_t seed);

/// `count` phases drawn uniformly from [0, pi) with a seeded stream.
std::vector<double> uniform_phases(std::size_t count, std::uint64_t seed);

}  // namespace hlt
