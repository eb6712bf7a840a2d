#pragma once

// Raw two-detector pulse records: trace files, fringe-based phase calibration
// of piezo steps and per-sample phase assignment.
//
// Trace format: UTF-8 CSV with header `pulse,piezo_step,n_c,n_d`, one record
// per LF-terminated line, integers only.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "hlt/hl_detection.hpp"

namespace hlt {

inline constexpr std::string_view kTraceHeader = "pulse,piezo_step,n_c,n_d";
inline constexpr double kDefaultSpreadStep = 1.0 / 5e4;  // radians per sample
inline constexpr int kMinCalibrationSteps = 8;
inline constexpr std::size_t kMinRecordsPerStep = 100;

struct RawPulseRecord {
  std::int64_t pulse_index = 0;
  std::int64_t piezo_step = 0;
  std::int64_t n_c = 0;
  std::int64_t n_d = 0;

  friend bool operator==(const RawPulseRecord&, const RawPulseRecord&) = default;
};

struct LoadOptions {
  bool lenient = false;  // skip malformed lines instead of failing
};

struct LoadedTrace {
  std::vector<RawPulseRecord> records;
  std::vector<std::size_t> malformed_lines;  // 1-based line numbers
};

/// Throws kIo for a missing file, kSchema on a bad header or (strict mode)
/// any malformed line; the message names the first offending line.
LoadedTrace load_trace(const std::filesystem::path& path, const LoadOptions& options = {});

void write_trace(const std::filesystem::path& path, std::span<const RawPulseRecord> records);

/// Reflection into [0, pi]: r = phi mod 2 pi, then r -> 2 pi - r when r > pi.
/// Idempotent. Exact for states whose quadrature statistics are even in phi.
double fold_phase(double phi);

enum class FringeOutput { kC, kD, kAverage };

struct FringeFit {
  double A = 0.0;
  double B = 0.0;
  double omega = 0.0;
  double delta = 0.0;
};

struct PhaseCalibration {
  std::vector<double> phi_per_step;  // folded into [0, pi]
  FringeFit fit;                     // mean counts = A + B cos(omega s + delta)
  double residual_rms = 0.0;
  std::vector<std::string> warnings;
};

/// Fits the per-step mean count of the chosen output with A + B cos(omega s + delta).
/// Errors: fewer than 8 steps with data, or no fringe to fit (kFitFailure).
PhaseCalibration fit_phase_calibration(std::span<const RawPulseRecord> records, int n_steps,
                                       FringeOutput output = FringeOutput::kC);

/// Records of step s get phi_s + (j - N_s / 2) spread_step, j counting that
/// step's records in file order, then folded. Output order follows `records`.
std::vector<HLSample> assign_phases(std::span<const RawPulseRecord> records,
                                    const PhaseCalibration& calibration, double lo_magnitude,
                                    double spread_step = kDefaultSpreadStep);

/// Independent uniform phases on [0, pi) from a seeded stream.
std::vector<HLSample> randomize_phases(std::span<const RawPulseRecord> records, double lo_magnitude,
                                       std::uint64_t seed);

/// Adds N(0, sigma^2) jitter to every phase, then folds; Delta is untouched.
std::vector<HLSample> inject_phase_noise(std::span<const HLSample> samples, double sigma,
                                         std::uint64_t seed);

}  // namespace hlt
