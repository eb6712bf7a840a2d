#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "hlt/errors.hpp"
#include "hlt/hl_detection.hpp"
#include "hlt/ingestion.hpp"
#include "hlt/pattern_functions.hpp"
#include "hlt/rng.hpp"
#include "hlt/tomography.hpp"

using namespace hlt;

namespace {

std::vector<HLSample> simulate(const StatePrep& prep, double beta, std::size_t n, std::uint64_t seed,
                               DetectorEfficiency eff = {1.0, 1.0}) {
  const auto phases = uniform_phases(n, seed);
  return sample_trace(prep, beta, phases, eff, seed + 1000);
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no hlt::Error thrown";
  return ErrorCode::kInvalidArgument;
}

// Expected value of the estimator under the exact HL count law:
// (1/pi) int_0^pi dphi sum_Delta p(Delta | phi) f_nm(Delta / (sqrt2 L)) e^{i(n-m) phi}.
FockMatrix hl_expectation(const StatePrep& prep, double beta, int dim) {
  const int n_phi = 96;
  std::vector<HLDistribution> laws;
  int reach = 0;
  for (int j = 0; j < n_phi; ++j) {
    const double phi = std::numbers::pi * (j + 0.5) / n_phi;
    laws.push_back(hl_distribution(joint_statistics(prep, {beta, phi}, {1.0, 1.0})));
    reach = std::max({reach, laws.back().max_delta(), -laws.back().min_delta()});
  }
  const PatternFunctionEvaluator f(dim - 1, rescale_delta(reach, beta) + 0.1);
  FockMatrix out(dim);
  for (int j = 0; j < n_phi; ++j) {
    const double phi = std::numbers::pi * (j + 0.5) / n_phi;
    const auto& p = laws[j];
    for (int n = 0; n < dim; ++n) {
      for (int m = 0; m < dim; ++m) {
        double acc = 0.0;
        for (int d = p.min_delta(); d <= p.max_delta(); ++d) acc += p(d) * f(n, m, rescale_delta(d, beta));
        out(n, m) += acc * std::polar(1.0, (n - m) * phi) / static_cast<double>(n_phi);
      }
    }
  }
  return out;
}

}  // namespace

TEST(Reconstruct, InputErrors) {
  const auto s = simulate(Fock{1}, std::sqrt(20.0), 200, 1);
  EXPECT_EQ(code_of([] { reconstruct({}, 4); }), ErrorCode::kEmptyInput);
  EXPECT_EQ(code_of([&] { reconstruct(s, 1); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([&] { reconstruct(s, 4, {.n_blocks = 1}); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([&] { reconstruct(std::span(s).first(5), 4); }), ErrorCode::kInvalidArgument);
  auto bad = s;
  bad[3].delta_phi = std::nan("");
  EXPECT_EQ(code_of([&] { reconstruct(bad, 4); }), ErrorCode::kDomain);
}

TEST(Reconstruct, PhaseCoverageEnforcedUnlessWaived) {
  auto s = simulate(Fock{1}, std::sqrt(20.0), 5000, 2);
  for (auto& x : s) x.phase = 0.5 * x.phase / std::numbers::pi;  // squeeze into [0, 0.5)
  EXPECT_FALSE(phase_coverage(s).ok);
  EXPECT_EQ(code_of([&] { reconstruct(s, 3); }), ErrorCode::kPhaseCoverage);
  EXPECT_EQ(code_of([&] { estimate_moments(s, 0.0); }), ErrorCode::kPhaseCoverage);
  const auto r = reconstruct(s, 3, {.require_phase_coverage = false});
  EXPECT_FALSE(r.warnings.empty());
}

TEST(Reconstruct, CoverageFractionsSumToOne) {
  const auto c = phase_coverage(simulate(Fock{0}, 3.0, 12000, 3));
  double total = 0.0;
  for (double f : c.fractions) total += f;
  EXPECT_NEAR(total, 1.0, 1e-12);
  EXPECT_TRUE(c.ok);
}

TEST(Reconstruct, HermitianWithSymmetricErrors) {
  const auto r = reconstruct(simulate(Coherent{{1.03, 0.2}}, 3.82, 20000, 4), 6);
  EXPECT_EQ(r.rho.hermiticity_defect(), 0.0);
  for (int n = 0; n < 6; ++n)
    for (int m = 0; m < 6; ++m) ASSERT_EQ(r.err(n, m), r.err(m, n));
  EXPECT_EQ(r.n_blocks, kDefaultBlocks);
  EXPECT_EQ(r.n_samples, 20000u);
  EXPECT_EQ(r.metadata.dim, 6);
}

TEST(Reconstruct, UnbiasedAgainstExactCountLaw) {
  struct Case {
    StatePrep prep;
    double beta;
  };
  for (const auto& c : {Case{Coherent{{1.03, 0.0}}, 3.82}, Case{Fock{1}, std::sqrt(20.0)}}) {
    const int dim = 6;
    const auto r = reconstruct(simulate(c.prep, c.beta, 200000, 5), dim);
    const auto expected = hl_expectation(c.prep, c.beta, dim);
    int inside = 0;
    for (int n = 0; n < dim; ++n) {
      for (int m = 0; m < dim; ++m) {
        const double se = r.err(n, m) / std::sqrt(static_cast<double>(r.n_blocks));
        inside += std::abs(r.rho(n, m) - expected(n, m)) <= 5 * se;
      }
    }
    EXPECT_GE(inside, static_cast<int>(std::ceil(0.95 * dim * dim)));
  }
}

TEST(Reconstruct, ApproachesIdealStateForStrongLo) {
  // With |beta| >> |alpha| the excess noise vanishes and the estimate is unbiased for the ideal state.
  const int dim = 8;
  const auto rc = reconstruct(simulate(Coherent{{0.5, 0.0}}, 30.0, 200000, 6), dim);
  const auto ideal = build_state(Coherent{{0.5, 0.0}}, dim).rho;
  int inside = 0;
  for (int n = 0; n < dim; ++n)
    for (int m = 0; m < dim; ++m) inside += std::abs(rc.rho(n, m) - ideal(n, m)) <= 5 * rc.err(n, m) / std::sqrt(10.0);
  EXPECT_GE(inside, 61);
  const auto small = reconstruct(simulate(Coherent{{0.5, 0.0}}, 30.0, 200000, 6), 4);
  EXPECT_GT(fidelity(small.rho, build_state(Coherent{{0.5, 0.0}}, 4, 1e-3).rho), 0.99);
  const auto rf = reconstruct(simulate(Fock{1}, std::sqrt(200.0), 200000, 7), 4);
  EXPECT_GT(fidelity(rf.rho, build_state(Fock{1}, 4).rho), 0.98);
  EXPECT_NEAR(rf.rho(1, 1).real(), 1.0, 5 * rf.err(1, 1) / std::sqrt(10.0));
}

TEST(Reconstruct, PhavDiagonalIgnoresPhasePermutation) {
  auto s = simulate(Phav{1.08}, 3.82, 50000, 8);
  const auto a = reconstruct(s, 6);
  CounterRng rng(8, StreamTag::kTest, 0);
  for (std::size_t i = s.size() - 1; i > 0; --i) {
    const auto j = static_cast<std::size_t>(rng.uniform() * static_cast<double>(i + 1));
    std::swap(s[i].phase, s[j].phase);
  }
  const auto b = reconstruct(s, 6);
  for (int n = 0; n < 6; ++n) {
    EXPECT_NEAR(a.rho(n, n).real(), b.rho(n, n).real(), 1e-12);
    for (int m = 0; m < n; ++m)
      EXPECT_LT(std::abs(b.rho(n, m)), 5 * b.err(n, m) / std::sqrt(10.0) + 1e-3) << n << "," << m;
  }
}

TEST(EstimateMoments, CoherentMatchesTheory) {
  const auto s = simulate(Coherent{{1.03, 0.0}}, 3.82, 300000, 9);
  for (double theta : {0.0, 0.9}) {
    const auto est = estimate_moments(s, theta);
    const auto th = theory_moments(Coherent{{1.03, 0.0}}, 3.82, theta);
    EXPECT_NEAR(est.mean_x, th.mean, 4 * est.mean_err);
    EXPECT_NEAR(est.var_x, th.var, 4 * est.var_err);
    EXPECT_EQ(est.n_samples, 300000u);
    EXPECT_EQ(est.theta, theta);
  }
}

TEST(EstimateMoments, PhaseJitterInflatesCoherentVariance) {
  const auto s = simulate(Coherent{{1.03, 0.0}}, 3.82, 300000, 13);
  const auto clean = estimate_moments(s, 0.0);
  const auto noisy = estimate_moments(inject_phase_noise(s, 0.3, 2), 0.0);
  EXPECT_GT(noisy.var_x, clean.var_x);
  EXPECT_GT(noisy.var_x, 0.536);
  // Phase diffusion: var[x_0] grows by |alpha|^2 (1 - e^{-sigma^2})^2.
  const double expected = theory_moments(Coherent{{1.03, 0.0}}, 3.82, 0.0).var + 1.0609 * std::pow(1 - std::exp(-0.09), 2);
  EXPECT_NEAR(noisy.var_x, expected, 4 * noisy.var_err);
}

TEST(EstimateMoments, PhavMatchesTheory) {
  const auto s = simulate(Phav{1.08}, 3.82, 300000, 10);
  const auto est = estimate_moments(s, 0.0);
  const auto th = theory_moments(Phav{1.08}, 3.82, 0.0);
  EXPECT_NEAR(est.mean_x, 0.0, 4 * est.mean_err);
  EXPECT_NEAR(est.var_x, th.var, 4 * est.var_err);
}

TEST(EstimateMoments, InterleavedBlocksHandlePhaseSortedData) {
  auto s = simulate(Coherent{{1.03, 0.0}}, 3.82, 100000, 11);
  std::sort(s.begin(), s.end(), [](const auto& a, const auto& b) { return a.phase < b.phase; });
  const auto est = estimate_moments(s, 0.0, 1.0, {.assignment = BlockAssignment::kInterleaved});
  const auto th = theory_moments(Coherent{{1.03, 0.0}}, 3.82, 0.0);
  EXPECT_NEAR(est.mean_x, th.mean, 4 * est.mean_err);
  EXPECT_NEAR(est.var_x, th.var, 4 * est.var_err);
}

TEST(EstimateMoments, Errors) {
  const auto s = simulate(Fock{1}, std::sqrt(20.0), 1000, 12);
  EXPECT_EQ(code_of([&] { estimate_moments(s, 0.0, 0.0); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([&] { estimate_moments(s, INFINITY); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([] { estimate_moments({}, 0.0); }), ErrorCode::kEmptyInput);
}

TEST(TheoryMoments, Examples) {
  const auto c = theory_moments(Coherent{{1.03, 0.0}}, 3.82, 0.0);
  EXPECT_NEAR(c.mean, 1.456640, 1e-6);
  EXPECT_NEAR(c.var, 0.5 + 1.0609 / (2 * 3.82 * 3.82), 1e-12);
  EXPECT_NEAR(c.var, 0.536, 5e-4);
  const auto p = theory_moments(Phav{1.08}, 3.82, 0.4);
  EXPECT_EQ(p.mean, 0.0);
  EXPECT_NEAR(p.var, 0.5 + 1.1664 + 1.1664 / (2 * 3.82 * 3.82), 1e-12);
  EXPECT_NEAR(p.var, 1.706, 5e-4);
  EXPECT_EQ(code_of([] { theory_moments(Fock{1}, 3.0, 0.0); }), ErrorCode::kUnsupportedPrep);
  EXPECT_EQ(code_of([] { theory_moments(Phav{1.0}, 0.0, 0.0); }), ErrorCode::kInvalidArgument);
}

TEST(BlockBounds, CoverAllSamplesEvenly) {
  const auto b = block_bounds(103, 10);
  ASSERT_EQ(b.size(), 11u);
  EXPECT_EQ(b.front(), 0u);
  EXPECT_EQ(b.back(), 103u);
  for (std::size_t i = 0; i + 1 < b.size(); ++i) {
    EXPECT_GE(b[i + 1] - b[i], 10u);
    EXPECT_LE(b[i + 1] - b[i], 11u);
  }
}
