// Acceptance run: one PASS/FAIL line per criterion, followed by indented
// diagnostics. Exit status is nonzero when any criterion fails.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/core.h>

#include "hlt/fock_core.hpp"
#include "hlt/hl_detection.hpp"
#include "hlt/ingestion.hpp"
#include "hlt/pattern_functions.hpp"
#include "hlt/serialization.hpp"
#include "hlt/tomography.hpp"

using namespace hlt;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void verdict(int id, bool ok, const std::string& summary) {
  fmt::print("{} criterion {}: {}\n", ok ? "PASS" : "FAIL", id, summary);
  std::fflush(stdout);
  failures += ok ? 0 : 1;
}

void note(const std::string& text) { fmt::print("    {}\n", text); }

std::vector<HLSample> uniform_run(const StatePrep& prep, double beta, std::size_t n, std::uint64_t seed,
                                  DetectorEfficiency eff = {1.0, 1.0}) {
  return sample_trace(prep, beta, uniform_phases(n, seed), eff, seed);
}

double max_offdiag_ratio(const ReconstructionResult& r) {
  double worst = 0.0;
  for (int n = 0; n < r.rho.dim(); ++n)
    for (int m = 0; m < r.rho.dim(); ++m)
      if (n != m) worst = std::max(worst, std::abs(r.rho(n, m)) / r.err(n, m));
  return worst;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args) {
  const int status = std::system((std::string(HLT_CLI_PATH) + " " + args + " > /dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

const double kBeta = 3.82;
const double kRoot20 = std::sqrt(20.0);

struct CoherentRun {
  std::vector<HLSample> samples;
};

// ------------------------------------------------------------------ 1
CoherentRun criterion_coherent() {
  const StatePrep prep = Coherent{{1.03, 0.0}};
  const auto t0 = std::chrono::steady_clock::now();
  CoherentRun run{uniform_run(prep, kBeta, 300000, 101)};
  const auto r = reconstruct(run.samples, 8);
  const auto m = estimate_moments(run.samples, 0.0);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const auto ideal = build_state(prep, 8, 1e-4);
  const double F = fidelity(r.rho, ideal.rho);
  const double n = mean_photon_number(r.rho);
  const bool ok = F >= 0.99 && std::abs(n - 1.06) <= 0.03 && std::abs(m.mean_x - 1.456) <= 0.01 &&
                  std::abs(m.var_x - 0.536) <= 0.02 && seconds <= 60.0;
  verdict(1, ok,
          fmt::format("coherent 1.03: F={:.4f} (>=0.99) <n>={:.4f} (1.06+-0.03) <x0>={:.4f}+-{:.4f} (1.456+-0.01) "
                      "var={:.4f}+-{:.4f} (0.536+-0.02) time={:.2f}s",
                      F, n, m.mean_x, m.mean_err, m.var_x, m.var_err, seconds));
  // The HL excess noise |alpha|^2/(2|beta|^2) is part of the detected statistics, so the
  // estimator converges to a slightly mixed state rather than the ideal coherent state.
  std::string sens = "dim sensitivity F:";
  for (int dim : {5, 6, 7, 8, 10, 12}) {
    const auto rd = reconstruct(run.samples, dim);
    sens += fmt::format(" {}:{:.4f}", dim, fidelity(rd.rho, build_state(prep, dim, 1e-2).rho));
  }
  note(sens);
  // Ten sets of 3e5 pooled, for comparison with the whole-sample averaging of the original analysis.
  const auto big = reconstruct(uniform_run(prep, kBeta, 3000000, 111), 8);
  note(fmt::format("10 x 3e5 samples: F={:.4f} <n>={:.4f}", fidelity(big.rho, ideal.rho), mean_photon_number(big.rho)));
  return run;
}

// ------------------------------------------------------------------ 2
ReconstructionResult criterion_phav(MomentEstimate& moments_out, std::vector<HLSample>& samples_out) {
  const StatePrep prep = Phav{1.08};
  const auto phases = uniform_phases(300000, 202);
  const auto counts = sample_counts(prep, kBeta, phases, {1.0, 1.0}, 202);
  std::vector<RawPulseRecord> records(counts.size());
  for (std::size_t k = 0; k < counts.size(); ++k)
    records[k] = {static_cast<std::int64_t>(k), 0, counts[k].n_c, counts[k].n_d};
  samples_out = randomize_phases(records, kBeta, 203);
  const auto r = reconstruct(samples_out, 8);
  const auto ideal = build_state(prep, 8, 1e-4);
  const double F = fidelity(r.rho, ideal.rho);
  double worst_mean = 0.0, worst_var = 0.0;
  for (double theta : {0.0, std::numbers::pi / 4, std::numbers::pi / 2, 3 * std::numbers::pi / 4}) {
    const auto m = estimate_moments(samples_out, theta);
    if (theta == 0.0) moments_out = m;
    worst_mean = std::max(worst_mean, std::abs(m.mean_x));
    worst_var = std::max(worst_var, std::abs(m.var_x - 1.706));
  }
  const double ratio = max_offdiag_ratio(r);
  const bool ok = F >= 0.995 && worst_mean <= 0.01 && worst_var <= 0.03 && ratio <= 3.0;
  verdict(2, ok,
          fmt::format("PHAV 1.08: F={:.4f} (>=0.995) max|<x_theta>|={:.4f} (<=0.01) var(0)={:.4f}+-{:.4f} "
                      "max|var-1.706|={:.4f} (<=0.03) max|rho_nm|/err={:.2f} (<=3)",
                      F, worst_mean, moments_out.var_x, moments_out.var_err, worst_var, ratio));
  const auto big_counts = sample_counts(prep, kBeta, uniform_phases(3000000, 212), {1.0, 1.0}, 212);
  std::vector<RawPulseRecord> big_records(big_counts.size());
  for (std::size_t k = 0; k < big_counts.size(); ++k)
    big_records[k] = {static_cast<std::int64_t>(k), 0, big_counts[k].n_c, big_counts[k].n_d};
  const auto big = reconstruct(randomize_phases(big_records, kBeta, 213), 8);
  note(fmt::format("10 x 3e5 samples: F={:.4f} max|rho_nm|/err={:.2f}", fidelity(big.rho, ideal.rho),
                   max_offdiag_ratio(big)));
  return r;
}

// ------------------------------------------------------------------ 3
void criterion_fock_ideal() {
  const auto samples = uniform_run(Fock{1}, kRoot20, 50000, 303);
  const auto r = reconstruct(samples, 4);
  const double F = fidelity(r.rho, build_state(Fock{1}, 4).rho);
  const double ratio = max_offdiag_ratio(r);
  verdict(3, F >= 0.995 && ratio <= 3.0,
          fmt::format("Fock 1, eta=1: F={:.4f} (>=0.995) rho11={:.4f}+-{:.4f} max|rho_nm|/err={:.2f} (<=3)", F,
                      r.rho(1, 1).real(), r.err(1, 1), ratio));
  std::string sens = "dim sensitivity F:";
  for (int dim : {2, 3, 4, 5, 6}) {
    const auto rd = reconstruct(samples, dim);
    sens += fmt::format(" {}:{:.4f}", dim, fidelity(rd.rho, build_state(Fock{1}, dim).rho));
  }
  note(sens);
}

// ------------------------------------------------------------------ 4
void criterion_fock_lossy() {
  const DetectorEfficiency eff{0.4, 0.4};
  const int runs = 10;
  const int dim = 4;
  std::vector<ReconstructionResult> results;
  std::map<int, std::vector<double>> dim_fids;
  for (int i = 0; i < runs; ++i) {
    const auto samples = uniform_run(Fock{1}, kRoot20, 50000, 400 + i, eff);
    results.push_back(reconstruct(samples, dim));
    for (int d : {3, 5}) dim_fids[d].push_back(fidelity(reconstruct(samples, d).rho, build_state(AttenuatedFock1{0.4}, d).rho));
  }
  FockMatrix mean(dim);
  for (const auto& r : results)
    for (int n = 0; n < dim; ++n)
      for (int m = 0; m < dim; ++m) mean(n, m) += r.rho(n, m) / static_cast<double>(runs);
  const auto target = build_state(AttenuatedFock1{0.4}, dim).rho;
  const double F = fidelity(mean, target);
  std::vector<double> per_run;
  double f_sum = 0.0;
  for (const auto& r : results) per_run.push_back(fidelity(r.rho, target)), f_sum += per_run.back();
  const double f_mean = f_sum / runs;
  double f_sq = 0.0;
  for (double f : per_run) f_sq += (f - f_mean) * (f - f_mean);
  std::string diag = "p(n) over runs:";
  for (int n = 0; n < dim; ++n) {
    double s = 0.0, sq = 0.0;
    for (const auto& r : results) s += r.rho(n, n).real(), sq += std::pow(r.rho(n, n).real(), 2);
    const double mu = s / runs;
    diag += fmt::format(" {}:{:.4f}+-{:.4f}", n, mu, std::sqrt(std::max(0.0, sq / runs - mu * mu) * runs / (runs - 1)));
  }
  verdict(4, F >= 0.985,
          fmt::format("Fock 1, eta=0.4, 10 runs: F(mean rho)={:.4f} (>=0.985) per-run F={:.4f}+-{:.4f}", F, f_mean,
                      std::sqrt(f_sq / (runs - 1))));
  note(diag);
  for (const auto& [d, fids] : dim_fids) {
    double s = 0.0;
    for (double f : fids) s += f;
    note(fmt::format("dim {} per-run mean F={:.4f}", d, s / runs));
  }
}

// ------------------------------------------------------------------ 5
void criterion_exact_model() {
  const auto q = joint_statistics(Fock{1}, {kRoot20, 0.0}, {0.4, 0.4});
  // Each entry of the lossy single-photon law is e^{-8} 4^{n+m}/(n! m!) [1 + ((n-m)^2 - 8)/20];
  // summed over all (n, m) this is exactly 1.
  const double sum_a = q.total() + q.tail_mass();
  const bool a_ok = std::abs(sum_a - 1.0) <= 1e-10;

  struct Ref {
    const char* name;
    StatePrep prep;
    double beta, phase, eta;
  };
  const std::vector<Ref> refs{{"coherent", Coherent{{1.03, 0.0}}, kBeta, 0.7, 1.0},
                              {"phav", Phav{1.08}, kBeta, 0.0, 1.0},
                              {"fock1", Fock{1}, kRoot20, 0.0, 1.0},
                              {"fock1_eta0.4", Fock{1}, kRoot20, 0.0, 0.4},
                              {"vacuum", Fock{0}, kBeta, 0.0, 1.0}};
  double worst_tv = 0.0;
  std::string tvs;
  for (const auto& ref : refs) {
    const DetectorEfficiency eff{ref.eta, ref.eta};
    const auto samples = sample_trace(ref.prep, ref.beta, std::vector<double>(1000000, ref.phase), eff, 505);
    const auto p = hl_distribution(joint_statistics(ref.prep, {ref.beta, ref.phase}, eff));
    std::map<std::int64_t, double> hist;
    for (const auto& s : samples) hist[s.delta] += 1e-6;
    double tv = 0.0;
    for (int d = p.min_delta(); d <= p.max_delta(); ++d) tv += std::abs((hist.count(d) ? hist[d] : 0.0) - p(d));
    for (const auto& [d, c] : hist)
      if (d < p.min_delta() || d > p.max_delta()) tv += c;
    tv *= 0.5;
    worst_tv = std::max(worst_tv, tv);
    tvs += fmt::format(" {}={:.2e}", ref.name, tv);
  }
  double worst_skellam = 0.0;
  for (double beta : {1.0, kBeta, kRoot20}) {
    const double mu = beta * beta / 2;
    const auto p = hl_distribution(joint_statistics(Coherent{{0.0, 0.0}}, {beta, 0.0}, {1.0, 1.0}));
    for (int d = p.min_delta(); d <= p.max_delta(); ++d)
      worst_skellam = std::max(worst_skellam,
                               std::abs(p(d) - std::exp(-2 * mu) * std::cyl_bessel_i(std::abs(d), 2 * mu)));
  }
  verdict(5, a_ok && worst_tv <= 5e-3 && worst_skellam <= 1e-10,
          fmt::format("(a) |sum q - 1|={:.1e} (<=1e-10) (b) max TV={:.2e} (<=5e-3) (c) max |p - Skellam|={:.1e} "
                      "(<=1e-10)",
                      std::abs(sum_a - 1.0), worst_tv, worst_skellam));
  note("TV by prep:" + tvs);
}

// ------------------------------------------------------------------ 6
void criterion_phase_noise(const CoherentRun& coherent, const std::vector<HLSample>& phav_samples,
                           const ReconstructionResult& phav_clean, const MomentEstimate& phav_moments) {
  const double sigma = 0.3;
  const auto clean = estimate_moments(coherent.samples, 0.0);
  const auto noisy_samples = inject_phase_noise(coherent.samples, sigma, 606);
  const auto noisy = estimate_moments(noisy_samples, 0.0);
  const bool coherent_ok = noisy.var_x > clean.var_x && noisy.var_x > 0.556;

  const auto phav_noisy_samples = inject_phase_noise(phav_samples, sigma, 607);
  const auto phav_noisy = reconstruct(phav_noisy_samples, 8);
  const auto phav_noisy_m = estimate_moments(phav_noisy_samples, 0.0);
  double worst = 0.0;
  for (int n = 0; n < 8; ++n)
    for (int m = 0; m < 8; ++m)
      worst = std::max(worst, std::abs(phav_noisy.rho(n, m) - phav_clean.rho(n, m)) /
                                  std::max(phav_clean.err(n, m), 1e-12));
  const double var_shift = std::abs(phav_noisy_m.var_x - phav_moments.var_x) / phav_moments.var_err;
  const bool phav_ok = worst <= 3.0 && var_shift <= 3.0;
  verdict(6, coherent_ok && phav_ok,
          fmt::format("sigma=0.3: coherent var {:.4f}+-{:.4f} -> {:.4f}+-{:.4f} (must exceed 0.556); PHAV max "
                      "|drho|/err={:.2f} (<=3) |dvar|/err={:.2f} (<=3)",
                      clean.var_x, clean.var_err, noisy.var_x, noisy.var_err, worst, var_shift));
  // Phase diffusion multiplies <a> by e^{-s^2/2} and <a^2> by e^{-2 s^2}, so
  // var[x_0] grows by |alpha|^2 (1 - e^{-s^2})^2 while var[x_pi/2] grows by |alpha|^2 (1 - e^{-2 s^2}).
  const double a2 = 1.03 * 1.03;
  const double base = 0.5 + a2 / (2 * kBeta * kBeta);
  note(fmt::format("phase-diffusion model: var[x_0]={:.4f}, var[x_pi/2]={:.4f} at sigma=0.3",
                   base + a2 * std::pow(1 - std::exp(-sigma * sigma), 2), base + a2 * (1 - std::exp(-2 * sigma * sigma))));
  note(fmt::format("measured var[x_pi/2] with jitter: {:.4f}", estimate_moments(noisy_samples, std::numbers::pi / 2).var_x));
  for (double s : {0.4, 0.5, 0.7}) {
    const auto m = estimate_moments(inject_phase_noise(coherent.samples, s, 606), 0.0);
    note(fmt::format("sigma={:.1f}: var[x_0]={:.4f}+-{:.4f}", s, m.var_x, m.var_err));
  }
}

// ------------------------------------------------------------------ 7
void criterion_double_integral() {
  const PatternFunctionEvaluator f(1, 12.0);
  const double h = 1e-3;
  double rho[2][2] = {{0, 0}, {0, 0}};  // [state][element]
  for (double x = -12.0; x <= 12.0; x += h) {
    const double w0 = std::exp(-x * x) / std::sqrt(std::numbers::pi);
    const double w1 = 2 * x * x * w0;
    for (int n = 0; n < 2; ++n) {
      rho[0][n] += w0 * f(n, n, x) * h;
      rho[1][n] += w1 * f(n, n, x) * h;
    }
  }
  // The quadrature laws of number states do not depend on phi, so the phase integral is trivial.
  const double err = std::max({std::abs(rho[0][0] - 1), std::abs(rho[0][1]), std::abs(rho[1][0]),
                               std::abs(rho[1][1] - 1)});
  verdict(7, err <= 1e-3,
          fmt::format("vacuum: rho00={:.6f} rho11={:.6f}; |1>: rho00={:.6f} rho11={:.6f}; max error {:.1e} (<=1e-3)",
                      rho[0][0], rho[0][1], rho[1][0], rho[1][1], err));
}

// ------------------------------------------------------------------ 8
void criterion_determinism() {
  const fs::path dir = fs::temp_directory_path() / "hlt_acceptance_determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  bool ok = true;
  for (const char* name : {"a", "b"}) {
    const std::string trace = (dir / (std::string(name) + ".csv")).string();
    ok &= run_cli("simulate --prep coherent:1.03 --n_samples 100000 --seed 808 --output " + trace) == 0;
    ok &= run_cli("reconstruct --input " + trace + " --target coherent:1.03") == 0;
  }
  const bool traces_equal = ok && slurp(dir / "a.csv") == slurp(dir / "b.csv") && !slurp(dir / "a.csv").empty();
  bool matrices_equal = false;
  if (ok) {
    const auto a = read_json(dir / "a.result.json");
    const auto b = read_json(dir / "b.result.json");
    matrices_equal = a["rho_re"] == b["rho_re"] && a["rho_im"] == b["rho_im"] && a["rho_err"] == b["rho_err"];
  }
  // Library path: bitwise comparison of the complex entries.
  const auto s1 = uniform_run(Phav{1.08}, kBeta, 50000, 809);
  const auto s2 = uniform_run(Phav{1.08}, kBeta, 50000, 809);
  const bool library_equal = reconstruct(s1, 6).rho == reconstruct(s2, 6).rho;
  fs::remove_all(dir);
  verdict(8, ok && traces_equal && matrices_equal && library_equal,
          fmt::format("CLI runs ok={} traces identical={} result matrices identical={} library identical={}", ok,
                      traces_equal, matrices_equal, library_equal));
}

// A criterion that throws is reported as failed; the others still run.
template <class Fn>
void guarded(int id, Fn&& fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    verdict(id, false, std::string("exception: ") + e.what());
  }
}

}  // namespace

int main() {
  CoherentRun coherent;
  MomentEstimate phav_moments;
  std::vector<HLSample> phav_samples;
  ReconstructionResult phav;
  guarded(1, [&] { coherent = criterion_coherent(); });
  guarded(2, [&] { phav = criterion_phav(phav_moments, phav_samples); });
  guarded(3, criterion_fock_ideal);
  guarded(4, criterion_fock_lossy);
  guarded(5, criterion_exact_model);
  guarded(6, [&] { criterion_phase_noise(coherent, phav_samples, phav, phav_moments); });
  guarded(7, criterion_double_integral);
  guarded(8, criterion_determinism);
  fmt::print("{} of 8 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
