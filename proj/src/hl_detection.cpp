#include "hlt/hl_detection.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include <boost/math/special_functions/gamma.hpp>
#include <fmt/core.h>

#include "chunked.hpp"
#include "hlt/errors.hpp"
#include "hlt/rng.hpp"
#include "hlt/simd/kernels.hpp"

namespace hlt {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

constexpr int kPhavInitialNodes = 16;
constexpr int kPhavMaxNodes = 1 << 16;
constexpr double kPhavConvergence = 1e-12;
constexpr double kSamplingTailMass = 1e-12;

std::vector<double> poisson_pmf(double mean, int n_max) {
  std::vector<double> pmf(static_cast<std::size_t>(n_max) + 1, 0.0);
  if (mean <= 0.0) {
    pmf[0] = 1.0;
    return pmf;
  }
  const double log_mean = std::log(mean);
  for (int k = 0; k <= n_max; ++k) pmf[k] = std::exp(-mean + k * log_mean - std::lgamma(k + 1.0));
  return pmf;
}

// P(N > n_max)
double poisson_upper_tail(double mean, int n_max) {
  if (mean <= 0.0) return 0.0;
  return boost::math::gamma_p(static_cast<double>(n_max) + 1.0, mean);
}

int initial_cutoff(double largest_mean) {
  return static_cast<int>(std::ceil(largest_mean + 12.0 * std::sqrt(largest_mean))) + 10;
}

struct MeanPair {
  double c;
  double d;
};

MeanPair coherent_means(Complex alpha, const LOField& lo, const DetectorEfficiency& eff) {
  const Complex beta = std::polar(lo.magnitude, lo.phase);
  return {0.5 * eff.eta_c * std::norm(beta + alpha), 0.5 * eff.eta_d * std::norm(beta - alpha)};
}

// q += weight * pc (x) pd
void accumulate_product(std::vector<double>& table, int n_max, double weight,
                        const std::vector<double>& pc, const std::vector<double>& pd) {
  const auto& kernels = simd::active_kernels();
  const std::size_t width = static_cast<std::size_t>(n_max) + 1;
  for (std::size_t n = 0; n < width; ++n) {
    kernels.axpy(weight * pc[n], pd, std::span<double>(table).subspan(n * width, width));
  }
}

struct Table {
  std::vector<double> values;
  double tail = 0.0;
};

Table product_poisson(MeanPair mu, int n_max) {
  Table t;
  t.values.assign(static_cast<std::size_t>(n_max + 1) * (n_max + 1), 0.0);
  accumulate_product(t.values, n_max, 1.0, poisson_pmf(mu.c, n_max), poisson_pmf(mu.d, n_max));
  const double qc = poisson_upper_tail(mu.c, n_max);
  const double qd = poisson_upper_tail(mu.d, n_max);
  t.tail = qc + qd - qc * qd;
  return t;
}

// Average of the coherent table over the signal phase, periodic trapezoid
// rule with node doubling until no entry moves by more than kPhavConvergence.
Table phav_table(double modulus, const LOField& lo, const DetectorEfficiency& eff, int n_max) {
  auto node_sum = [&](int nodes, int first, int step, Table& acc) {
    for (int j = first; j < nodes; j += step) {
      const double theta = 2.0 * std::numbers::pi * j / nodes;
      const MeanPair mu = coherent_means(std::polar(modulus, theta), lo, eff);
      accumulate_product(acc.values, n_max, 1.0, poisson_pmf(mu.c, n_max), poisson_pmf(mu.d, n_max));
      const double qc = poisson_upper_tail(mu.c, n_max);
      const double qd = poisson_upper_tail(mu.d, n_max);
      acc.tail += qc + qd - qc * qd;
    }
  };
  const std::size_t size = static_cast<std::size_t>(n_max + 1) * (n_max + 1);
  int nodes = kPhavInitialNodes;
  Table sum{std::vector<double>(size, 0.0), 0.0};
  node_sum(nodes, 0, 1, sum);
  Table average{sum.values, sum.tail / nodes};
  for (double& v : average.values) v /= nodes;
  while (nodes < kPhavMaxNodes) {
    const int doubled = 2 * nodes;
    node_sum(doubled, 1, 2, sum);
    double change = 0.0;
    for (std::size_t i = 0; i < size; ++i) {
      const double next = sum.values[i] / doubled;
      change = std::max(change, std::abs(next - average.values[i]));
      average.values[i] = next;
    }
    average.tail = sum.tail / doubled;
    nodes = doubled;
    if (change <= kPhavConvergence) break;
  }
  return average;
}

// eta_s |1><1| + (1 - eta_s)|0><0| through detectors of efficiency eta:
// q = Pois(n; mu) Pois(m; mu) [1 - eta_s eta + eta_s (n - m)^2 / |beta|^2],
// mu = eta |beta|^2 / 2. eta_s = 1 is the single-photon Fock state.
Table single_photon_table(double eta_signal, double lo_magnitude, double eta, int n_max) {
  const double beta2 = lo_magnitude * lo_magnitude;
  const double mu = 0.5 * eta * beta2;
  const auto pmf = poisson_pmf(mu, n_max);
  Table t;
  t.values.assign(static_cast<std::size_t>(n_max + 1) * (n_max + 1), 0.0);
  double total = 0.0;
  for (int n = 0; n <= n_max; ++n) {
    for (int m = 0; m <= n_max; ++m) {
      const double diff = static_cast<double>(n - m);
      const double bracket = 1.0 - eta_signal * eta + eta_signal * diff * diff / beta2;
      const double value = pmf[n] * pmf[m] * bracket;
      t.values[static_cast<std::size_t>(n) * (n_max + 1) + m] = value;
      total += value;
    }
  }
  t.tail = std::max(0.0, 1.0 - total);
  return t;
}

double largest_mean(const StatePrep& prep, const LOField& lo, const DetectorEfficiency& eff) {
  const double eta = std::max(eff.eta_c, eff.eta_d);
  return std::visit(Overloaded{
                        [&](const Coherent& c) {
                          const double r = lo.magnitude + std::abs(c.amplitude);
                          return 0.5 * eta * r * r;
                        },
                        [&](const Phav& p) {
                          const double r = lo.magnitude + p.modulus;
                          return 0.5 * eta * r * r;
                        },
                        [&](const auto&) { return 0.5 * eta * lo.magnitude * lo.magnitude; },
                    },
                    prep);
}

Table build_table(const StatePrep& prep, const LOField& lo, const DetectorEfficiency& eff, int n_max) {
  auto photon = [&](double eta_signal) {
    if (eff.eta_c != eff.eta_d) {
      fail(ErrorCode::kUnequalEfficiencies,
           "single-photon statistics require equal detector efficiencies");
    }
    return single_photon_table(eta_signal, lo.magnitude, eff.eta_c, n_max);
  };
  return std::visit(Overloaded{
                        [&](const Coherent& c) {
                          return product_poisson(coherent_means(c.amplitude, lo, eff), n_max);
                        },
                        [&](const Phav& p) { return phav_table(p.modulus, lo, eff, n_max); },
                        [&](const Fock& f) {
                          return f.n == 0 ? product_poisson(coherent_means({}, lo, eff), n_max)
                                          : photon(1.0);
                        },
                        [&](const AttenuatedFock1& a) { return photon(a.eta); },
                    },
                    prep);
}

}  // namespace

void validate(const LOField& lo) {
  if (!(lo.magnitude > 0.0) || !std::isfinite(lo.magnitude))
    fail(ErrorCode::kInvalidArgument, "LO magnitude must be positive and finite");
  if (!std::isfinite(lo.phase)) fail(ErrorCode::kInvalidArgument, "LO phase must be finite");
}

void validate(const DetectorEfficiency& eff) {
  if (!(eff.eta_c > 0.0 && eff.eta_c <= 1.0) || !(eff.eta_d > 0.0 && eff.eta_d <= 1.0))
    fail(ErrorCode::kInvalidArgument, "detector efficiencies must lie in (0, 1]");
}

double detected_lo_magnitude(double lo_magnitude, const DetectorEfficiency& eff) {
  return std::sqrt(0.5 * (eff.eta_c + eff.eta_d)) * lo_magnitude;
}

JointCountDistribution::JointCountDistribution(int n_max, std::vector<double> table, double tail_mass)
    : n_max_(n_max), table_(std::move(table)), tail_mass_(tail_mass) {
  if (table_.size() != static_cast<std::size_t>(n_max + 1) * (n_max + 1))
    fail(ErrorCode::kInvalidArgument, "joint table size does not match n_max");
}

double JointCountDistribution::total() const {
  return std::accumulate(table_.begin(), table_.end(), 0.0);
}

HLDistribution::HLDistribution(int min_delta, std::vector<double> probs, double tail_mass)
    : min_delta_(min_delta), probs_(std::move(probs)), tail_mass_(tail_mass) {}

double HLDistribution::operator()(int delta) const {
  if (delta < min_delta() || delta > max_delta()) return 0.0;
  return probs_[static_cast<std::size_t>(delta - min_delta_)];
}

double HLDistribution::mean() const {
  double sum = 0.0;
  for (std::size_t i = 0; i < probs_.size(); ++i) sum += (min_delta_ + static_cast<double>(i)) * probs_[i];
  return sum;
}

double HLDistribution::variance() const {
  const double mu = mean();
  double sum = 0.0;
  for (std::size_t i = 0; i < probs_.size(); ++i) {
    const double d = min_delta_ + static_cast<double>(i) - mu;
    sum += d * d * probs_[i];
  }
  return sum;
}

JointCountDistribution joint_statistics(const StatePrep& prep, const LOField& lo,
                                        const DetectorEfficiency& eff,
                                        const JointStatisticsOptions& options) {
  validate(prep);
  validate(lo);
  validate(eff);
  int n_max = options.n_max > 0 ? options.n_max : initial_cutoff(largest_mean(prep, lo, eff));
  n_max = std::min(n_max, options.n_max_cap);
  while (true) {
    Table t = build_table(prep, lo, eff, n_max);
    if (t.tail <= options.max_tail_mass)
      return JointCountDistribution(n_max, std::move(t.values), t.tail);
    if (n_max >= options.n_max_cap) {
      fail(ErrorCode::kCutoffCapExceeded, fmt::format("joint statistics tail {:.3g} still above {:.3g} at cutoff cap {}",
                                                      t.tail, options.max_tail_mass, options.n_max_cap));
    }
    n_max = std::min(2 * n_max, options.n_max_cap);
  }
}

HLDistribution hl_distribution(const JointCountDistribution& q) {
  const int n_max = q.n_max();
  std::vector<double> probs(static_cast<std::size_t>(2 * n_max + 1), 0.0);
  for (int delta = -n_max; delta <= n_max; ++delta) {
    double sum = 0.0;
    if (delta >= 0) {
      for (int k = 0; k + delta <= n_max; ++k) sum += q(delta + k, k);
    } else {
      for (int k = 0; k - delta <= n_max; ++k) sum += q(k, k - delta);
    }
    probs[static_cast<std::size_t>(delta + n_max)] = sum;
  }
  return HLDistribution(-n_max, std::move(probs), q.tail_mass());
}

double rescale_delta(std::int64_t delta, double lo_magnitude) {
  if (!(lo_magnitude > 0.0)) fail(ErrorCode::kInvalidArgument, "LO magnitude must be positive");
  return static_cast<double>(delta) / (std::numbers::sqrt2 * lo_magnitude);
}

std::vector<CountPair> sample_counts(const StatePrep& prep, double lo_magnitude,
                                     std::span<const double> phases,
                                     const DetectorEfficiency& eff, std::uint64_t seed) {
  validate(prep);
  validate(LOField{lo_magnitude, 0.0});
  validate(eff);
  std::vector<CountPair> out(phases.size());
  if (phases.empty()) return out;

  // Phase-independent states are drawn by inverse CDF over one exact table.
  std::vector<double> cdf;
  int width = 0;
  const bool tabulated = std::holds_alternative<Fock>(prep) || std::holds_alternative<AttenuatedFock1>(prep);
  if (tabulated) {
    JointStatisticsOptions options;
    options.max_tail_mass = kSamplingTailMass;
    const auto q = joint_statistics(prep, LOField{lo_magnitude, 0.0}, eff, options);
    width = q.n_max() + 1;
    cdf.resize(q.table().size());
    std::partial_sum(q.table().begin(), q.table().end(), cdf.begin());
  }

  detail::for_each_chunk(phases.size(), [&](std::uint64_t chunk, std::size_t begin, std::size_t end) {
    CounterRng rng(seed, StreamTag::kTraceSampling, chunk);
    for (std::size_t k = begin; k < end; ++k) {
      const LOField lo{lo_magnitude, phases[k]};
      if (tabulated) {
        const double u = rng.uniform();
        auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        if (it == cdf.end()) {
          // u fell into the (< 1e-12) truncated tail; take the last populated cell.
          it = std::prev(cdf.end());
          while (it != cdf.begin() && *it == *std::prev(it)) --it;
        }
        const auto cell = static_cast<int>(it - cdf.begin());
        out[k] = {cell / width, cell % width};
        continue;
      }
      Complex alpha;
      if (const auto* c = std::get_if<Coherent>(&prep)) {
        alpha = c->amplitude;
      } else {
        alpha = std::polar(std::get<Phav>(prep).modulus, 2.0 * std::numbers::pi * rng.uniform());
      }
      const MeanPair mu = coherent_means(alpha, lo, eff);
      const std::int64_t n_c = rng.poisson(mu.c);
      const std::int64_t n_d = rng.poisson(mu.d);
      out[k] = {n_c, n_d};
    }
  });
  return out;
}

std::vector<HLSample> sample_trace(const StatePrep& prep, double lo_magnitude,
                                   std::span<const double> phases, const DetectorEfficiency& eff,
                                   std::uint64_t seed) {
  const auto counts = sample_counts(prep, lo_magnitude, phases, eff, seed);
  const double scale = detected_lo_magnitude(lo_magnitude, eff);
  std::vector<HLSample> out(counts.size());
  for (std::size_t k = 0; k < counts.size(); ++k) {
    const std::int64_t delta = counts[k].n_c - counts[k].n_d;
    out[k] = {delta, rescale_delta(delta, scale), phases[k]};
  }
  return out;
}

std::vector<double> uniform_phases(std::size_t count, std::uint64_t seed) {
  std::vector<double> phases(count);
  detail::for_each_chunk(count, [&](std::uint64_t chunk, std::size_t begin, std::size_t end) {
    CounterRng rng(seed, StreamTag::kPhaseGeneration, chunk);
    for (std::size_t k = begin; k < end; ++k) phases[k] = std::numbers::pi * rng.uniform();
  });
  return phases;
}

}  // namespace hlt
