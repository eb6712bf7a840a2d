#include "hlt/tomography.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <fmt/core.h>

#include "hlt/errors.hpp"
#include "hlt/pattern_functions.hpp"
#include "hlt/simd/kernels.hpp"

namespace hlt {

namespace {

constexpr std::size_t kBatch = 1024;

void check_input(std::span<const HLSample> samples, int n_blocks) {
  if (samples.empty()) fail(ErrorCode::kEmptyInput, "no samples to process");
  if (n_blocks < 2) fail(ErrorCode::kInvalidArgument, "at least two blocks are needed for error estimates");
  if (samples.size() < static_cast<std::size_t>(n_blocks))
    fail(ErrorCode::kInvalidArgument, fmt::format("{} samples cannot fill {} blocks", samples.size(), n_blocks));
}

std::string describe_gaps(const PhaseCoverage& coverage) {
  std::string bins;
  for (int b = 0; b < kCoverageBins; ++b) {
    if (coverage.fractions[b] < kMinBinFraction) bins += (bins.empty() ? "" : ",") + std::to_string(b);
  }
  return "phase bins [" + bins + "] (width pi/12) hold less than 1% of the data";
}

void apply_coverage(const PhaseCoverage& coverage, bool required, std::vector<std::string>& warnings) {
  if (coverage.ok) return;
  if (required) fail(ErrorCode::kPhaseCoverage, describe_gaps(coverage));
  warnings.push_back(describe_gaps(coverage));
}

double sample_std(std::span<const double> values, double mean) {
  double sum = 0.0;
  for (double v : values) sum += (v - mean) * (v - mean);
  return std::sqrt(sum / static_cast<double>(values.size() - 1));
}

// Sum over [begin, end) of f_nm(x) e^{i(n-m) phi}, packed as (re, im) per pair.
void accumulate_block(const PatternFunctionEvaluator& patterns, std::span<const HLSample> block,
                      std::vector<double>& sums) {
  const auto& kernels = simd::active_kernels();
  const int dim = patterns.max_index() + 1;
  const int pairs = patterns.pair_count();
  sums.assign(2 * static_cast<std::size_t>(pairs), 0.0);
  std::vector<double> x, phase, values, cos_d, sin_d;
  for (std::size_t start = 0; start < block.size(); start += kBatch) {
    const std::size_t K = std::min(kBatch, block.size() - start);
    x.resize(K);
    phase.resize(K);
    for (std::size_t k = 0; k < K; ++k) {
      x[k] = block[start + k].delta_phi;
      phase[k] = block[start + k].phase;
    }
    values.resize(static_cast<std::size_t>(pairs) * K);
    cos_d.resize(static_cast<std::size_t>(dim) * K);
    sin_d.resize(static_cast<std::size_t>(dim) * K);
    patterns.evaluate_batch(x, values);
    kernels.phase_harmonics(phase, dim, cos_d, sin_d);
    for (int n = 0; n < dim; ++n) {
      for (int m = 0; m <= n; ++m) {
        const auto p = static_cast<std::size_t>(PatternFunctionEvaluator::pair_index(n, m));
        const std::span<const double> f(&values[p * K], K);
        const std::size_t d = static_cast<std::size_t>(n - m) * K;
        sums[2 * p] += kernels.dot(f, std::span<const double>(&cos_d[d], K));
        if (n != m) sums[2 * p + 1] += kernels.dot(f, std::span<const double>(&sin_d[d], K));
      }
    }
  }
}

// Samples of block b. Interleaved blocks are copied into `scratch`.
std::span<const HLSample> block_view(std::span<const HLSample> samples, int b, const BlockOptions& options,
                                     std::vector<HLSample>& scratch) {
  if (options.assignment == BlockAssignment::kContiguous) {
    const auto bounds = block_bounds(samples.size(), options.n_blocks);
    return samples.subspan(bounds[b], bounds[b + 1] - bounds[b]);
  }
  scratch.clear();
  for (std::size_t k = static_cast<std::size_t>(b); k < samples.size(); k += static_cast<std::size_t>(options.n_blocks))
    scratch.push_back(samples[k]);
  return scratch;
}

}  // namespace

PhaseCoverage phase_coverage(std::span<const HLSample> samples) {
  PhaseCoverage coverage;
  if (samples.empty()) return coverage;
  std::array<std::size_t, kCoverageBins> counts{};
  const double width = std::numbers::pi / kCoverageBins;
  for (const auto& s : samples) {
    double r = std::fmod(s.phase, std::numbers::pi);
    if (r < 0.0) r += std::numbers::pi;
    const int bin = std::min(kCoverageBins - 1, static_cast<int>(r / width));
    ++counts[bin];
  }
  coverage.ok = true;
  for (int b = 0; b < kCoverageBins; ++b) {
    coverage.fractions[b] = static_cast<double>(counts[b]) / static_cast<double>(samples.size());
    if (coverage.fractions[b] < kMinBinFraction) coverage.ok = false;
  }
  return coverage;
}

std::vector<std::size_t> block_bounds(std::size_t n_samples, int n_blocks) {
  std::vector<std::size_t> bounds(static_cast<std::size_t>(n_blocks) + 1);
  for (int b = 0; b <= n_blocks; ++b)
    bounds[b] = static_cast<std::size_t>(static_cast<unsigned __int128>(n_samples) * b / n_blocks);
  return bounds;
}

ReconstructionResult reconstruct(std::span<const HLSample> samples, int dim, const BlockOptions& options) {
  check_input(samples, options.n_blocks);
  if (dim < 2) fail(ErrorCode::kInvalidArgument, "reconstruction dimension must be at least 2");

  ReconstructionResult result;
  result.coverage = phase_coverage(samples);
  apply_coverage(result.coverage, options.require_phase_coverage, result.warnings);

  double reach = 0.0;
  for (const auto& s : samples) {
    if (!std::isfinite(s.delta_phi) || !std::isfinite(s.phase))
      fail(ErrorCode::kDomain, "sample with non-finite quadrature or phase");
    reach = std::max(reach, std::abs(s.delta_phi));
  }
  const PatternFunctionEvaluator patterns(dim - 1, reach);

  const int B = options.n_blocks;
  std::vector<std::vector<double>> block_means(static_cast<std::size_t>(B));
#if defined(HLT_HAVE_OPENMP)
#pragma omp parallel for schedule(static)
#endif
  for (int b = 0; b < B; ++b) {
    std::vector<HLSample> scratch;
    const auto block = block_view(samples, b, options, scratch);
    accumulate_block(patterns, block, block_means[b]);
    for (double& v : block_means[b]) v /= static_cast<double>(block.size());
  }

  result.rho = FockMatrix(dim);
  result.rho_err.assign(static_cast<std::size_t>(dim) * dim, 0.0);
  for (int n = 0; n < dim; ++n) {
    for (int m = 0; m <= n; ++m) {
      const auto p = static_cast<std::size_t>(PatternFunctionEvaluator::pair_index(n, m));
      Complex mean{};
      for (int b = 0; b < B; ++b) mean += Complex(block_means[b][2 * p], block_means[b][2 * p + 1]);
      mean /= static_cast<double>(B);
      double sq = 0.0;
      for (int b = 0; b < B; ++b)
        sq += std::norm(Complex(block_means[b][2 * p], block_means[b][2 * p + 1]) - mean);
      const double sd = std::sqrt(sq / (B - 1));
      result.rho(n, m) = mean;
      result.rho(m, n) = std::conj(mean);
      result.rho_err[static_cast<std::size_t>(n) * dim + m] = sd;
      result.rho_err[static_cast<std::size_t>(m) * dim + n] = sd;
    }
  }
  result.n_blocks = B;
  result.n_samples = samples.size();
  result.metadata.dim = dim;
  return result;
}

MomentEstimate estimate_moments(std::span<const HLSample> samples, double theta, double eta,
                                const BlockOptions& options) {
  check_input(samples, options.n_blocks);
  if (!(eta > 0.0 && eta <= 1.0)) fail(ErrorCode::kInvalidArgument, "eta must lie in (0, 1]");
  if (!std::isfinite(theta)) fail(ErrorCode::kInvalidArgument, "theta must be finite");

  MomentEstimate est;
  apply_coverage(phase_coverage(samples), options.require_phase_coverage, est.warnings);

  const auto& kernels = simd::active_kernels();
  const int B = options.n_blocks;
  std::vector<double> first(static_cast<std::size_t>(B)), var(static_cast<std::size_t>(B));
#if defined(HLT_HAVE_OPENMP)
#pragma omp parallel for schedule(static)
#endif
  for (int b = 0; b < B; ++b) {
    std::vector<HLSample> scratch;
    const auto block = block_view(samples, b, options, scratch);
    simd::QuadratureSums total;
    std::vector<double> x, c;
    for (std::size_t start = 0; start < block.size(); start += kBatch) {
      const std::size_t K = std::min(kBatch, block.size() - start);
      x.resize(K);
      c.resize(K);
      for (std::size_t k = 0; k < K; ++k) {
        x[k] = block[start + k].delta_phi;
        c[k] = std::cos(block[start + k].phase - theta);
      }
      const auto sums = kernels.quadrature_sums(x, c, 1.0 / eta);
      total.first += sums.first;
      total.second += sums.second;
    }
    const double size = static_cast<double>(block.size());
    first[b] = total.first / size;
    var[b] = total.second / size - first[b] * first[b];
  }

  auto mean_of = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double e : v) s += e;
    return s / static_cast<double>(v.size());
  };
  const double root_b = std::sqrt(static_cast<double>(B));
  est.mean_x = mean_of(first);
  est.mean_err = sample_std(first, est.mean_x) / root_b;
  est.var_x = mean_of(var);
  est.var_err = sample_std(var, est.var_x) / root_b;
  est.theta = theta;
  est.eta_assumed = eta;
  est.n_blocks = B;
  est.n_samples = samples.size();
  return est;
}

TheoryMoments theory_moments(const StatePrep& prep, double lo_magnitude, double theta) {
  validate(prep);
  if (!(lo_magnitude > 0.0)) fail(ErrorCode::kInvalidArgument, "LO magnitude must be positive");
  const double beta2 = lo_magnitude * lo_magnitude;
  if (const auto* c = std::get_if<Coherent>(&prep)) {
    const double a2 = std::norm(c->amplitude);
    return {std::numbers::sqrt2 * std::abs(c->amplitude) * std::cos(theta - std::arg(c->amplitude)),
            0.5 + a2 / (2.0 * beta2)};
  }
  if (const auto* p = std::get_if<Phav>(&prep)) {
    const double a2 = p->modulus * p->modulus;
    return {0.0, 0.5 + a2 + a2 / (2.0 * beta2)};
  }
  fail(ErrorCode::kUnsupportedPrep, "theory moments are defined for coherent and PHAV signals only");
}

}  // namespace hlt
