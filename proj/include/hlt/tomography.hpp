#pragma once

// Density-matrix reconstruction and quadrature-moment estimation from HL
// samples, with errors taken from the spread over contiguous data blocks.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hlt/fock_core.hpp"
#include "hlt/hl_detection.hpp"

namespace hlt {

inline constexpr int kDefaultBlocks = 10;
inline constexpr int kCoverageBins = 12;
inline constexpr double kMinBinFraction = 0.01;

struct PhaseCoverage {
  std::array<double, kCoverageBins> fractions{};  // share of samples per bin of phi mod pi
  bool ok = false;
};

PhaseCoverage phase_coverage(std::span<const HLSample> samples);

/// Contiguous slices suit data whose phases are already mixed in file order;
/// interleaving (sample k goes to block k mod n_blocks) gives every block the
/// full phase range when the file is ordered by piezo step.
enum class BlockAssignment { kContiguous, kInterleaved };

struct BlockOptions {
  int n_blocks = kDefaultBlocks;
  /// Phase-sensitive runs need data in every pi/12 bin; when false a gap only
  /// adds a warning (phase-insensitive states).
  bool require_phase_coverage = true;
  BlockAssignment assignment = BlockAssignment::kContiguous;
};

struct ReconstructionMetadata {
  std::string source;
  std::optional<std::uint64_t> seed;
  double lo_magnitude = 0.0;  // 0 when unknown
  int dim = 0;
};

struct ReconstructionResult {
  FockMatrix rho;
  std::vector<double> rho_err;  // row-major, standard deviation over blocks
  int n_blocks = 0;
  std::size_t n_samples = 0;
  ReconstructionMetadata metadata;
  PhaseCoverage coverage;
  std::vector<std::string> warnings;

  double err(int n, int m) const {
    return rho_err[static_cast<std::size_t>(n) * rho.dim() + static_cast<std::size_t>(m)];
  }
};

/// Block-averaged sampling estimator of rho_nm, n, m < dim.
ReconstructionResult reconstruct(std::span<const HLSample> samples, int dim,
                                 const BlockOptions& options = {});

struct MomentEstimate {
  double mean_x = 0.0;
  double mean_err = 0.0;
  double var_x = 0.0;
  double var_err = 0.0;
  double theta = 0.0;
  double eta_assumed = 1.0;
  int n_blocks = 0;
  std::size_t n_samples = 0;
  std::vector<std::string> warnings;
};

/// <x_theta> and var[x_theta] from the first- and second-moment kernels;
/// errors are standard errors over blocks.
MomentEstimate estimate_moments(std::span<const HLSample> samples, double theta, double eta = 1.0,
                                const BlockOptions& options = {});

struct TheoryMoments {
  double mean = 0.0;
  double var = 0.0;
};

/// Moments of the HL quadrature for coherent and PHAV signals, including the
/// excess noise |alpha|^2 / (2 |beta|^2) of a finite LO.
TheoryMoments theory_moments(const StatePrep& prep, double lo_magnitude, double theta);

/// Contiguous block boundaries: block b is [bounds[b], bounds[b + 1]).
std::vector<std::size_t> block_bounds(std::size_t n_samples, int n_blocks);

}  // namespace hlt
