#include "hlt/ingestion.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <numbers>
#include <string_view>

#include <Eigen/Dense>
#include <fmt/core.h>

#include "chunked.hpp"
#include "hlt/errors.hpp"
#include "hlt/rng.hpp"

namespace hlt {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

bool parse_field(std::string_view text, std::int64_t& out) {
  if (text.empty()) return false;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && end == text.data() + text.size();
}

bool parse_record(std::string_view line, RawPulseRecord& record) {
  std::int64_t fields[4];
  std::size_t start = 0;
  for (int i = 0; i < 4; ++i) {
    const std::size_t comma = line.find(',', start);
    const bool last = i == 3;
    if (last != (comma == std::string_view::npos)) return false;
    const std::size_t stop = last ? line.size() : comma;
    if (!parse_field(line.substr(start, stop - start), fields[i])) return false;
    start = stop + 1;
  }
  if (fields[1] < 0 || fields[2] < 0 || fields[3] < 0) return false;
  record = {fields[0], fields[1], fields[2], fields[3]};
  return true;
}

struct StepMeans {
  std::vector<double> step;
  std::vector<double> mean;
};

StepMeans step_means(std::span<const RawPulseRecord> records, int n_steps, bool use_d,
                     std::vector<std::string>& warnings) {
  std::vector<double> sum(static_cast<std::size_t>(n_steps), 0.0);
  std::vector<std::size_t> count(static_cast<std::size_t>(n_steps), 0);
  for (const auto& r : records) {
    if (r.piezo_step < 0 || r.piezo_step >= n_steps) {
      fail(ErrorCode::kInvalidArgument,
           fmt::format("pulse {} has piezo step {} outside [0, {})", r.pulse_index, r.piezo_step, n_steps));
    }
    sum[r.piezo_step] += static_cast<double>(use_d ? r.n_d : r.n_c);
    ++count[r.piezo_step];
  }
  StepMeans out;
  std::size_t sparse = 0;
  for (int s = 0; s < n_steps; ++s) {
    if (count[s] == 0) continue;
    if (count[s] < kMinRecordsPerStep) ++sparse;
    out.step.push_back(s);
    out.mean.push_back(sum[s] / static_cast<double>(count[s]));
  }
  if (sparse > 0)
    warnings.push_back(fmt::format("{} piezo steps have fewer than {} records", sparse, kMinRecordsPerStep));
  return out;
}

double sum_squares(const StepMeans& data, const FringeFit& f) {
  double sse = 0.0;
  for (std::size_t i = 0; i < data.step.size(); ++i) {
    const double r = data.mean[i] - (f.A + f.B * std::cos(f.omega * data.step[i] + f.delta));
    sse += r * r;
  }
  return sse;
}

// Linear least squares in (A, B cos delta, -B sin delta) at fixed omega.
bool linear_fit(const StepMeans& data, double omega, FringeFit& fit) {
  const auto n = static_cast<Eigen::Index>(data.step.size());
  Eigen::MatrixX3d design(n, 3);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    design(i, 0) = 1.0;
    design(i, 1) = std::cos(omega * data.step[i]);
    design(i, 2) = std::sin(omega * data.step[i]);
    y(i) = data.mean[i];
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixX3d> qr(design);
  qr.setThreshold(1e-10);
  if (qr.rank() < 3) return false;
  const Eigen::Vector3d c = qr.solve(y);
  fit = {c(0), std::hypot(c(1), c(2)), omega, std::atan2(-c(2), c(1))};
  return true;
}

// Levenberg-Marquardt on (A, B, omega, delta).
FringeFit refine(const StepMeans& data, FringeFit fit) {
  const auto n = static_cast<Eigen::Index>(data.step.size());
  double lambda = 1e-3;
  double sse = sum_squares(data, fit);
  for (int iter = 0; iter < 200; ++iter) {
    Eigen::MatrixX4d jac(n, 4);
    Eigen::VectorXd r(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double s = data.step[i];
      const double arg = fit.omega * s + fit.delta;
      const double c = std::cos(arg);
      const double sn = std::sin(arg);
      r(i) = data.mean[i] - (fit.A + fit.B * c);
      jac(i, 0) = 1.0;
      jac(i, 1) = c;
      jac(i, 2) = -fit.B * s * sn;
      jac(i, 3) = -fit.B * sn;
    }
    const Eigen::Matrix4d jtj = jac.transpose() * jac;
    const Eigen::Vector4d jtr = jac.transpose() * r;
    bool improved = false;
    for (int attempt = 0; attempt < 30 && !improved; ++attempt) {
      Eigen::Matrix4d lhs = jtj;
      lhs.diagonal() += lambda * jtj.diagonal().cwiseMax(1e-300).matrix();
      const Eigen::Vector4d step = lhs.ldlt().solve(jtr);
      const FringeFit trial{fit.A + step(0), fit.B + step(1), fit.omega + step(2), fit.delta + step(3)};
      const double trial_sse = sum_squares(data, trial);
      if (trial_sse <= sse) {
        const double shift = step.cwiseAbs().maxCoeff();
        fit = trial;
        const double gain = sse - trial_sse;
        sse = trial_sse;
        lambda = std::max(lambda * 0.1, 1e-12);
        improved = true;
        if (shift < 1e-15 * (1.0 + std::abs(fit.omega * data.step.back()) + std::abs(fit.A)) ||
            gain <= 1e-30 * (1.0 + sse))
          return fit;
      } else {
        lambda *= 10.0;
      }
    }
    if (!improved) break;
  }
  return fit;
}

struct SingleFit {
  FringeFit fit;
  double residual_rms = 0.0;
};

SingleFit fit_fringe(const StepMeans& data, int n_steps) {
  if (data.step.size() < static_cast<std::size_t>(kMinCalibrationSteps)) {
    fail(ErrorCode::kFitFailure, fmt::format("only {} piezo steps hold data, at least {} are needed",
                                             data.step.size(), kMinCalibrationSteps));
  }
  const int grid = 16 * n_steps;
  FringeFit best;
  double best_sse = std::numeric_limits<double>::infinity();
  for (int j = 1; j <= grid; ++j) {
    FringeFit trial;
    if (!linear_fit(data, std::numbers::pi * j / grid, trial)) continue;
    const double sse = sum_squares(data, trial);
    if (sse < best_sse) {
      best_sse = sse;
      best = trial;
    }
  }
  if (!std::isfinite(best_sse)) fail(ErrorCode::kFitFailure, "fringe fit normal equations are singular");
  FringeFit fit = refine(data, best);
  if (fit.B < 0.0) {
    fit.B = -fit.B;
    fit.delta += std::numbers::pi;
  }
  if (fit.omega < 0.0) {
    fit.omega = -fit.omega;
    fit.delta = -fit.delta;
  }
  fit.delta = std::fmod(fit.delta, kTwoPi);
  if (fit.delta < 0.0) fit.delta += kTwoPi;
  const double rms = std::sqrt(sum_squares(data, fit) / static_cast<double>(data.step.size()));
  if (!(fit.B > 1e-12 * (1.0 + std::abs(fit.A))) || fit.B < 2.0 * rms) {
    fail(ErrorCode::kFitFailure,
         fmt::format("no interference fringe in the step means (amplitude {:.3g}, residual rms {:.3g})", fit.B, rms));
  }
  return {fit, rms};
}

}  // namespace

LoadedTrace load_trace(const std::filesystem::path& path, const LoadOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open trace file " + path.string());
  LoadedTrace out;
  std::string line;
  if (!std::getline(in, line) || line != kTraceHeader) {
    fail(ErrorCode::kSchema, fmt::format("{}:1: expected header '{}'", path.string(), kTraceHeader));
  }
  std::size_t number = 1;
  while (std::getline(in, line)) {
    ++number;
    RawPulseRecord record;
    if (parse_record(line, record)) {
      out.records.push_back(record);
    } else {
      out.malformed_lines.push_back(number);
    }
  }
  if (!out.malformed_lines.empty() && !options.lenient) {
    fail(ErrorCode::kSchema, fmt::format("{}:{}: malformed record ({} malformed line(s) in total)", path.string(),
                                         out.malformed_lines.front(), out.malformed_lines.size()));
  }
  return out;
}

void write_trace(const std::filesystem::path& path, std::span<const RawPulseRecord> records) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIo, "cannot write trace file " + path.string());
  std::string buffer;
  buffer.reserve(32 * records.size() + 32);
  buffer.append(kTraceHeader);
  buffer.push_back('\n');
  for (const auto& r : records) {
    fmt::format_to(std::back_inserter(buffer), "{},{},{},{}\n", r.pulse_index, r.piezo_step, r.n_c, r.n_d);
  }
  out.write(buffer.data(), static_cast<std::streamsize>(buffer.size()));
  if (!out) fail(ErrorCode::kIo, "failed while writing " + path.string());
}

double fold_phase(double phi) {
  if (!std::isfinite(phi)) fail(ErrorCode::kDomain, "cannot fold a non-finite phase");
  double r = std::fmod(phi, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  if (r >= kTwoPi) r = 0.0;
  return r > std::numbers::pi ? kTwoPi - r : r;
}

PhaseCalibration fit_phase_calibration(std::span<const RawPulseRecord> records, int n_steps,
                                       FringeOutput output) {
  if (n_steps < kMinCalibrationSteps)
    fail(ErrorCode::kInvalidArgument, fmt::format("{} piezo steps given, at least {} needed", n_steps,
                                                  kMinCalibrationSteps));
  PhaseCalibration cal;
  SingleFit result;
  if (output == FringeOutput::kAverage) {
    const SingleFit c = fit_fringe(step_means(records, n_steps, false, cal.warnings), n_steps);
    std::vector<std::string> ignored;
    SingleFit d = fit_fringe(step_means(records, n_steps, true, ignored), n_steps);
    // Output d oscillates in antiphase with c.
    double delta_d = d.fit.delta - std::numbers::pi;
    delta_d += kTwoPi * std::round((c.fit.delta - delta_d) / kTwoPi);
    result.fit = {0.5 * (c.fit.A + d.fit.A), 0.5 * (c.fit.B + d.fit.B), 0.5 * (c.fit.omega + d.fit.omega),
                  0.5 * (c.fit.delta + delta_d)};
    result.residual_rms = 0.5 * (c.residual_rms + d.residual_rms);
  } else {
    const bool use_d = output == FringeOutput::kD;
    result = fit_fringe(step_means(records, n_steps, use_d, cal.warnings), n_steps);
    if (use_d) result.fit.delta -= std::numbers::pi;
  }
  cal.fit = result.fit;
  cal.residual_rms = result.residual_rms;
  if (cal.residual_rms > 0.05 * cal.fit.B) {
    cal.warnings.push_back(fmt::format("fringe residual rms {:.3g} exceeds 5% of the amplitude {:.3g}",
                                       cal.residual_rms, cal.fit.B));
  }
  cal.phi_per_step.resize(static_cast<std::size_t>(n_steps));
  for (int s = 0; s < n_steps; ++s) cal.phi_per_step[s] = fold_phase(cal.fit.omega * s + cal.fit.delta);
  return cal;
}

std::vector<HLSample> assign_phases(std::span<const RawPulseRecord> records,
                                    const PhaseCalibration& calibration, double lo_magnitude,
                                    double spread_step) {
  if (!(spread_step >= 0.0) || !std::isfinite(spread_step))
    fail(ErrorCode::kInvalidArgument, "spread step must be finite and non-negative");
  const std::size_t steps = calibration.phi_per_step.size();
  std::vector<std::size_t> per_step(steps, 0);
  for (const auto& r : records) {
    if (r.piezo_step < 0 || static_cast<std::size_t>(r.piezo_step) >= steps) {
      fail(ErrorCode::kUncalibratedStep,
           fmt::format("pulse {} refers to piezo step {} but the calibration covers {} steps", r.pulse_index,
                       r.piezo_step, steps));
    }
    ++per_step[r.piezo_step];
  }
  std::vector<std::size_t> seen(steps, 0);
  std::vector<HLSample> out(records.size());
  for (std::size_t k = 0; k < records.size(); ++k) {
    const auto& r = records[k];
    const auto s = static_cast<std::size_t>(r.piezo_step);
    const double offset = (static_cast<double>(seen[s]++) - 0.5 * static_cast<double>(per_step[s])) * spread_step;
    const std::int64_t delta = r.n_c - r.n_d;
    const double phase = spread_step == 0.0 ? calibration.phi_per_step[s]
                                            : fold_phase(calibration.phi_per_step[s] + offset);
    out[k] = {delta, rescale_delta(delta, lo_magnitude), phase};
  }
  return out;
}

std::vector<HLSample> randomize_phases(std::span<const RawPulseRecord> records, double lo_magnitude,
                                       std::uint64_t seed) {
  if (!(lo_magnitude > 0.0)) fail(ErrorCode::kInvalidArgument, "LO magnitude must be positive");
  std::vector<HLSample> out(records.size());
  detail::for_each_chunk(records.size(), [&](std::uint64_t chunk, std::size_t begin, std::size_t end) {
    CounterRng rng(seed, StreamTag::kPhaseRandomization, chunk);
    for (std::size_t k = begin; k < end; ++k) {
      const std::int64_t delta = records[k].n_c - records[k].n_d;
      out[k] = {delta, rescale_delta(delta, lo_magnitude), std::numbers::pi * rng.uniform()};
    }
  });
  return out;
}

std::vector<HLSample> inject_phase_noise(std::span<const HLSample> samples, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma))
    fail(ErrorCode::kInvalidArgument, "phase noise sigma must be finite and non-negative");
  std::vector<HLSample> out(samples.begin(), samples.end());
  if (sigma == 0.0) return out;
  detail::for_each_chunk(samples.size(), [&](std::uint64_t chunk, std::size_t begin, std::size_t end) {
    CounterRng rng(seed, StreamTag::kPhaseNoise, chunk);
    for (std::size_t k = begin; k < end; ++k) out[k].phase = fold_phase(out[k].phase + sigma * rng.normal());
  });
  return out;
}

}  // namespace hlt
