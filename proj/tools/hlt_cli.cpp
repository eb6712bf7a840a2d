// hlt: simulate HL traces, reconstruct states and moments, and tabulate runs.
//
//   hlt simulate    --prep coherent:1.03 --lo_magnitude 3.82 --n_samples 300000 --seed 7 --output run.csv
//   hlt reconstruct --input run.csv --mode calibrated-phases --dim 8 --target coherent:1.03
//   hlt moments     --input run.csv --mode random-phases --theta 0
//   hlt report      run.result.json other.result.json
//
// Every key can come from a JSON file given with --config; command-line values win.
// Exit codes: 0 ok, 2 configuration or input error, 3 model error, 4 data quality.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <iterator>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/core.h>

#include "config.hpp"
#include "hlt/errors.hpp"
#include "hlt/fock_core.hpp"
#include "hlt/hl_detection.hpp"
#include "hlt/ingestion.hpp"
#include "hlt/rng.hpp"
#include "hlt/serialization.hpp"
#include "hlt/simd/kernels.hpp"
#include "hlt/tomography.hpp"
#include "svg.hpp"

namespace fs = std::filesystem;
using namespace hlt;

namespace {

constexpr double kTargetTail = 1e-2;
constexpr int kEnvelopeBins = 60;

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kIo:
    case ErrorCode::kSchema:
      return 2;
    case ErrorCode::kPhaseCoverage:
    case ErrorCode::kFitFailure:
    case ErrorCode::kUncalibratedStep:
    case ErrorCode::kEmptyInput:
      return 4;
    default:
      return 3;
  }
}

int report_error(std::string_view code, const std::string& message, int exit_code) {
  Json doc = Json::object();
  doc["error"] = code;
  doc["message"] = message;
  doc["exit_code"] = exit_code;
  std::cerr << doc.dump() << '\n';
  return exit_code;
}

struct SimulateConfig {
  std::string prep = "coherent:1.03";
  double lo_magnitude = 3.82;
  double eta_c = 1.0;
  double eta_d = 1.0;
  std::int64_t n_samples = 300000;
  int n_steps = 60;
  std::string phase_mode = "piezo";
  double phase_offset = 0.0;
  double phase_span = std::numbers::pi;
  double spread_step = kDefaultSpreadStep;
  std::uint64_t seed = 0;
  std::string output = "trace.csv";

  Json to_json() const {
    return {{"command", "simulate"},     {"prep", prep},
            {"lo_magnitude", lo_magnitude}, {"eta_c", eta_c},
            {"eta_d", eta_d},             {"n_samples", n_samples},
            {"n_steps", n_steps},         {"phase_mode", phase_mode},
            {"phase_offset", phase_offset}, {"phase_span", phase_span},
            {"spread_step", spread_step}, {"seed", seed},
            {"output", output}};
  }
};

struct ReconstructConfig {
  std::string input;
  std::string mode = "calibrated-phases";
  double lo_magnitude = 3.82;
  double eta_c = 1.0;
  double eta_d = 1.0;
  int dim = 8;
  int n_blocks = kDefaultBlocks;
  std::string blocks = "interleaved";
  int n_steps = 0;
  std::string fringe_output = "c";
  double spread_step = kDefaultSpreadStep;
  std::uint64_t seed = 1;
  std::string calibration;
  std::string target;
  double theta = 0.0;
  double eta = 1.0;
  double phase_noise = 0.0;
  std::uint64_t noise_seed = 1;
  std::string output_prefix;
  bool svg = false;
  bool lenient = false;
  bool allow_partial_coverage = false;

  Json to_json(std::string_view command) const {
    return {{"command", command},
            {"input", input},
            {"mode", mode},
            {"lo_magnitude", lo_magnitude},
            {"eta_c", eta_c},
            {"eta_d", eta_d},
            {"dim", dim},
            {"n_blocks", n_blocks},
            {"blocks", blocks},
            {"n_steps", n_steps},
            {"fringe_output", fringe_output},
            {"spread_step", spread_step},
            {"seed", seed},
            {"calibration", calibration},
            {"target", target},
            {"theta", theta},
            {"eta", eta},
            {"phase_noise", phase_noise},
            {"noise_seed", noise_seed},
            {"output_prefix", output_prefix},
            {"svg", svg},
            {"lenient", lenient},
            {"allow_partial_coverage", allow_partial_coverage}};
  }
};

struct ReportConfig {
  std::vector<std::string> results;
  std::string output = "report.csv";
  std::string text;

  Json to_json() const {
    return {{"command", "report"}, {"results", results}, {"output", output}, {"text", text}};
  }
};

std::string hash_of(const Json& resolved) { return fnv1a_hex(resolved.dump()); }

void echo_config(const fs::path& path, Json resolved, const std::string& hash) {
  resolved["config_hash"] = hash;
  write_json(path, resolved);
}

// ---------------------------------------------------------------- simulate

int run_simulate(const SimulateConfig& cfg) {
  const Json resolved = cfg.to_json();
  const std::string hash = hash_of(resolved);
  const StatePrep prep = parse_prep(cfg.prep);
  const DetectorEfficiency eff{cfg.eta_c, cfg.eta_d};
  validate(eff);
  validate(LOField{cfg.lo_magnitude, 0.0});
  if (cfg.n_samples < 0) fail(ErrorCode::kInvalidArgument, "n_samples must be non-negative");
  if (cfg.n_steps < 1) fail(ErrorCode::kInvalidArgument, "n_steps must be positive");
  if (!(cfg.spread_step >= 0.0)) fail(ErrorCode::kInvalidArgument, "spread_step must be non-negative");

  const auto total = static_cast<std::size_t>(cfg.n_samples);
  const int steps = cfg.n_steps;
  std::vector<double> phases(total);
  std::vector<std::int64_t> step_of(total);
  std::vector<double> centers(static_cast<std::size_t>(steps));
  for (int s = 0; s < steps; ++s) centers[s] = cfg.phase_offset + cfg.phase_span * (s + 0.5) / steps;

  if (cfg.phase_mode == "piezo") {
    // Step-major order; each step scans a short window around its center.
    std::size_t k = 0;
    for (int s = 0; s < steps; ++s) {
      const std::size_t begin = total * static_cast<std::size_t>(s) / steps;
      const std::size_t end = total * static_cast<std::size_t>(s + 1) / steps;
      const double count = static_cast<double>(end - begin);
      for (std::size_t j = 0; j < end - begin; ++j, ++k) {
        phases[k] = centers[s] + (static_cast<double>(j) - 0.5 * count) * cfg.spread_step;
        step_of[k] = s;
      }
    }
  } else if (cfg.phase_mode == "uniform") {
    phases = uniform_phases(total, cfg.seed);
    for (std::size_t k = 0; k < total; ++k)
      step_of[k] = std::min<std::int64_t>(steps - 1, static_cast<std::int64_t>(phases[k] / std::numbers::pi * steps));
    for (int s = 0; s < steps; ++s) centers[s] = std::numbers::pi * (s + 0.5) / steps;
  } else {
    fail(ErrorCode::kInvalidArgument, "phase_mode must be 'piezo' or 'uniform'");
  }

  // Exact model at LO phase 0 for the metadata summary.
  const auto q = joint_statistics(prep, LOField{cfg.lo_magnitude, 0.0}, eff);
  const auto p = hl_distribution(q);

  const auto counts = sample_counts(prep, cfg.lo_magnitude, phases, eff, cfg.seed);
  std::vector<RawPulseRecord> records(total);
  for (std::size_t k = 0; k < total; ++k)
    records[k] = {static_cast<std::int64_t>(k), step_of[k], counts[k].n_c, counts[k].n_d};

  const fs::path out = cfg.output;
  write_trace(out, records);

  std::vector<double> folded(centers.size());
  for (std::size_t s = 0; s < centers.size(); ++s) folded[s] = fold_phase(centers[s]);
  Json meta = Json::object();
  meta["config_hash"] = hash;
  meta["rng"] = kRngAlgorithm;
  meta["seed"] = cfg.seed;
  meta["prep"] = format_prep(prep);
  meta["lo_magnitude"] = cfg.lo_magnitude;
  meta["detected_lo_magnitude"] = detected_lo_magnitude(cfg.lo_magnitude, eff);
  meta["eta_c"] = cfg.eta_c;
  meta["eta_d"] = cfg.eta_d;
  meta["n_samples"] = cfg.n_samples;
  meta["n_steps"] = steps;
  meta["phase_mode"] = cfg.phase_mode;
  meta["spread_step"] = cfg.spread_step;
  meta["phi_per_step"] = folded;
  meta["model_at_phase_zero"] = {{"n_max", q.n_max()},
                                 {"tail_mass", q.tail_mass()},
                                 {"delta_mean", p.mean()},
                                 {"delta_variance", p.variance()}};
  write_json(fs::path(cfg.output + ".meta.json"), meta);
  echo_config(fs::path(cfg.output + ".config.json"), resolved, hash);
  return 0;
}

// ---------------------------------------------------------- reconstruction

struct LoadedSamples {
  std::vector<HLSample> samples;
  std::optional<PhaseCalibration> calibration;
  std::vector<std::string> warnings;
  bool phase_sensitive_check = true;
};

BlockOptions block_options(const ReconstructConfig& cfg, bool require_coverage) {
  BlockOptions options{cfg.n_blocks, require_coverage, BlockAssignment::kInterleaved};
  if (cfg.blocks == "contiguous") {
    options.assignment = BlockAssignment::kContiguous;
  } else if (cfg.blocks != "interleaved") {
    fail(ErrorCode::kInvalidArgument, "blocks must be interleaved or contiguous");
  }
  return options;
}

FringeOutput parse_fringe_output(const std::string& text) {
  if (text == "c") return FringeOutput::kC;
  if (text == "d") return FringeOutput::kD;
  if (text == "average") return FringeOutput::kAverage;
  fail(ErrorCode::kInvalidArgument, "fringe_output must be c, d or average");
}

LoadedSamples load_samples(const ReconstructConfig& cfg) {
  if (cfg.input.empty()) fail(ErrorCode::kInvalidArgument, "--input is required");
  const DetectorEfficiency eff{cfg.eta_c, cfg.eta_d};
  validate(eff);
  validate(LOField{cfg.lo_magnitude, 0.0});
  const double scale = detected_lo_magnitude(cfg.lo_magnitude, eff);

  LoadedSamples out;
  const auto trace = load_trace(cfg.input, LoadOptions{cfg.lenient});
  if (!trace.malformed_lines.empty())
    out.warnings.push_back(fmt::format("skipped {} malformed line(s)", trace.malformed_lines.size()));
  const auto& records = trace.records;

  if (cfg.mode == "calibrated-phases") {
    int steps = cfg.n_steps;
    if (steps <= 0) {
      std::int64_t top = -1;
      for (const auto& r : records) top = std::max(top, r.piezo_step);
      steps = static_cast<int>(top + 1);
    }
    auto cal = fit_phase_calibration(records, steps, parse_fringe_output(cfg.fringe_output));
    out.samples = assign_phases(records, cal, scale, cfg.spread_step);
    out.warnings.insert(out.warnings.end(), cal.warnings.begin(), cal.warnings.end());
    out.calibration = std::move(cal);
  } else if (cfg.mode == "trust-file-phases") {
    const fs::path path = cfg.calibration.empty() ? fs::path(cfg.input + ".meta.json") : fs::path(cfg.calibration);
    auto cal = calibration_from_json(read_json(path));
    out.samples = assign_phases(records, cal, scale, cfg.spread_step);
    out.calibration = std::move(cal);
  } else if (cfg.mode == "random-phases") {
    out.samples = randomize_phases(records, scale, cfg.seed);
  } else {
    fail(ErrorCode::kInvalidArgument,
         "mode must be calibrated-phases, random-phases or trust-file-phases (got '" + cfg.mode + "')");
  }
  if (cfg.phase_noise > 0.0) out.samples = inject_phase_noise(out.samples, cfg.phase_noise, cfg.noise_seed);
  out.phase_sensitive_check = !cfg.allow_partial_coverage;
  return out;
}

std::string default_prefix(const ReconstructConfig& cfg) {
  if (!cfg.output_prefix.empty()) return cfg.output_prefix;
  fs::path base(cfg.input);
  if (base.extension() == ".csv") base.replace_extension();
  return base.string() + ".";
}

std::string envelope_csv(std::span<const HLSample> samples, const std::string& hash) {
  std::vector<double> sum(kEnvelopeBins, 0.0), sq(kEnvelopeBins, 0.0);
  std::vector<std::size_t> count(kEnvelopeBins, 0);
  for (const auto& s : samples) {
    double r = std::fmod(s.phase, std::numbers::pi);
    if (r < 0.0) r += std::numbers::pi;
    const int b = std::min(kEnvelopeBins - 1, static_cast<int>(r / std::numbers::pi * kEnvelopeBins));
    sum[b] += s.delta_phi;
    sq[b] += s.delta_phi * s.delta_phi;
    ++count[b];
  }
  std::string out = fmt::format("# config_hash {}\nphase,count,mean,std\n", hash);
  for (int b = 0; b < kEnvelopeBins; ++b) {
    const double center = std::numbers::pi * (b + 0.5) / kEnvelopeBins;
    if (count[b] == 0) {
      fmt::format_to(std::back_inserter(out), "{},0,,\n", center);
      continue;
    }
    const double n = static_cast<double>(count[b]);
    const double mean = sum[b] / n;
    const double var = count[b] > 1 ? std::max(0.0, (sq[b] - n * mean * mean) / (n - 1)) : 0.0;
    fmt::format_to(std::back_inserter(out), "{},{},{},{}\n", center, count[b], mean, std::sqrt(var));
  }
  return out;
}

std::string quadrature_csv(std::span<const HLSample> samples, const std::string& hash) {
  std::string out = fmt::format("# config_hash {}\nphase,delta,delta_phi\n", hash);
  out.reserve(out.size() + samples.size() * 40);
  for (const auto& s : samples) fmt::format_to(std::back_inserter(out), "{},{},{}\n", s.phase, s.delta, s.delta_phi);
  return out;
}

Json moments_block(const MomentEstimate& moments, const std::optional<StatePrep>& target, double lo) {
  Json doc = to_json(moments);
  if (target && (std::holds_alternative<Coherent>(*target) || std::holds_alternative<Phav>(*target))) {
    const auto theory = theory_moments(*target, lo, moments.theta);
    doc["theory_mean"] = theory.mean;
    doc["theory_var"] = theory.var;
  }
  return doc;
}

int run_reconstruct(const ReconstructConfig& cfg) {
  const Json resolved = cfg.to_json("reconstruct");
  const std::string hash = hash_of(resolved);
  std::optional<StatePrep> target;
  if (!cfg.target.empty()) target = parse_prep(cfg.target);

  LoadedSamples loaded = load_samples(cfg);
  const BlockOptions blocks = block_options(cfg, loaded.phase_sensitive_check);
  ReconstructionResult result = reconstruct(loaded.samples, cfg.dim, blocks);
  result.metadata.source = cfg.input;
  if (cfg.mode == "random-phases") result.metadata.seed = cfg.seed;
  const double lo = detected_lo_magnitude(cfg.lo_magnitude, {cfg.eta_c, cfg.eta_d});
  result.metadata.lo_magnitude = lo;
  result.warnings.insert(result.warnings.begin(), loaded.warnings.begin(), loaded.warnings.end());
  const MomentEstimate moments = estimate_moments(loaded.samples, cfg.theta, cfg.eta, blocks);

  Json doc = to_json(result);
  doc["mode"] = cfg.mode;
  doc["rng"] = kRngAlgorithm;
  doc["simd"] = simd::active_kernels().name;
  doc["trace"] = result.rho.trace().real();
  doc["mean_photon_number"] = mean_photon_number(result.rho);
  doc["photon_number_distribution"] = photon_number_distribution(result.rho).probs;
  doc["moments"] = moments_block(moments, target, lo);
  if (target) {
    const auto ideal = build_state(*target, cfg.dim, kTargetTail);
    doc["target"] = format_prep(*target);
    doc["target_tail_mass"] = ideal.tail_mass;
    doc["fidelity"] = fidelity(result.rho, ideal.rho);
    doc["fidelity_raw"] = fidelity_raw(result.rho, ideal.rho);
  }
  if (loaded.calibration) doc["calibration"] = to_json(*loaded.calibration);
  doc["config_hash"] = hash;

  const std::string prefix = default_prefix(cfg);
  write_json(prefix + "result.json", doc);
  write_text(prefix + "abs.csv", fmt::format("# config_hash {}\n", hash) + abs_csv(result.rho));
  write_text(prefix + "quadrature.csv", quadrature_csv(loaded.samples, hash));
  write_text(prefix + "envelope.csv", envelope_csv(loaded.samples, hash));
  if (cfg.svg) write_text(prefix + "scatter.svg", cli::scatter_svg(loaded.samples, cfg.input, hash));
  echo_config(prefix + "config.json", resolved, hash);
  for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
  return 0;
}

int run_moments(const ReconstructConfig& cfg) {
  const Json resolved = cfg.to_json("moments");
  const std::string hash = hash_of(resolved);
  std::optional<StatePrep> target;
  if (!cfg.target.empty()) target = parse_prep(cfg.target);
  LoadedSamples loaded = load_samples(cfg);
  const MomentEstimate moments =
      estimate_moments(loaded.samples, cfg.theta, cfg.eta, block_options(cfg, loaded.phase_sensitive_check));
  const double lo = detected_lo_magnitude(cfg.lo_magnitude, {cfg.eta_c, cfg.eta_d});
  Json doc = moments_block(moments, target, lo);
  doc["source"] = cfg.input;
  doc["mode"] = cfg.mode;
  doc["config_hash"] = hash;
  const std::string prefix = default_prefix(cfg);
  write_json(prefix + "moments.json", doc);
  echo_config(prefix + "moments.config.json", resolved, hash);
  std::cout << doc.dump(2) << '\n';
  for (const auto& w : loaded.warnings) std::cerr << "warning: " << w << '\n';
  for (const auto& w : moments.warnings) std::cerr << "warning: " << w << '\n';
  return 0;
}

// ------------------------------------------------------------------ report

std::string cell(const Json& doc, const char* key) {
  if (!doc.contains(key) || !doc[key].is_number()) return "";
  return fmt::format("{:.6g}", doc[key].get<double>());
}

int run_report(const ReportConfig& cfg) {
  if (cfg.results.empty()) fail(ErrorCode::kInvalidArgument, "report needs at least one result file");
  const Json resolved = cfg.to_json();
  const std::string hash = hash_of(resolved);

  std::string csv = fmt::format("# config_hash {}\n", hash);
  csv += "run_id,mean,mean_err,mean_theory,var,var_err,var_theory,fidelity,mean_photon_number\n";
  std::string text = fmt::format("{:<24} {:>22} {:>10} {:>22} {:>10} {:>9} {:>8}\n", "run", "<x_theta>", "theory",
                                 "var", "theory", "fidelity", "<n>");
  for (const auto& path : cfg.results) {
    const Json doc = read_json(path);
    const ReconstructionResult result = result_from_json(doc);
    std::string id = fs::path(path).filename().string();
    if (id.ends_with(".result.json")) id.resize(id.size() - 12);
    const Json moments = doc.contains("moments") ? doc["moments"] : Json::object();
    const std::string n = fmt::format("{:.6g}", mean_photon_number(result.rho));
    const std::vector<std::string> row{id,
                                       cell(moments, "mean"),
                                       cell(moments, "mean_err"),
                                       cell(moments, "theory_mean"),
                                       cell(moments, "var"),
                                       cell(moments, "var_err"),
                                       cell(moments, "theory_var"),
                                       cell(doc, "fidelity"),
                                       n};
    for (std::size_t i = 0; i < row.size(); ++i) csv += row[i] + (i + 1 < row.size() ? "," : "\n");
    auto pm = [](const std::string& v, const std::string& e) { return v.empty() ? std::string("-") : v + " +- " + e; };
    auto dash = [](const std::string& v) { return v.empty() ? std::string("-") : v; };
    text += fmt::format("{:<24} {:>22} {:>10} {:>22} {:>10} {:>9} {:>8}\n", id, pm(row[1], row[2]), dash(row[3]),
                        pm(row[4], row[5]), dash(row[6]), dash(row[7]), n);
  }
  write_text(cfg.output, csv);
  if (!cfg.text.empty()) write_text(cfg.text, text);
  std::cout << text;
  return 0;
}

void add_reconstruct_options(CLI::App* cmd, ReconstructConfig& cfg) {
  cmd->add_option("--input", cfg.input, "trace CSV");
  cmd->add_option("--mode", cfg.mode, "calibrated-phases | random-phases | trust-file-phases");
  cmd->add_option("--lo_magnitude", cfg.lo_magnitude, "|beta| used to rescale Delta");
  cmd->add_option("--eta_c", cfg.eta_c, "efficiency of detector c");
  cmd->add_option("--eta_d", cfg.eta_d, "efficiency of detector d");
  cmd->add_option("--dim", cfg.dim, "Fock cutoff of the reconstruction");
  cmd->add_option("--n_blocks", cfg.n_blocks, "data blocks for error bars");
  cmd->add_option("--blocks", cfg.blocks, "interleaved | contiguous assignment of samples to blocks");
  cmd->add_option("--n_steps", cfg.n_steps, "piezo steps (0: largest step index + 1)");
  cmd->add_option("--fringe_output", cfg.fringe_output, "c | d | average");
  cmd->add_option("--spread_step", cfg.spread_step, "phase increment between samples of one step [rad]");
  cmd->add_option("--seed", cfg.seed, "seed for random-phases");
  cmd->add_option("--calibration", cfg.calibration, "phase file for trust-file-phases (default INPUT.meta.json)");
  cmd->add_option("--target", cfg.target, "expected state, e.g. coherent:1.03");
  cmd->add_option("--theta", cfg.theta, "quadrature angle for moments");
  cmd->add_option("--eta", cfg.eta, "efficiency assumed by the second-moment kernel");
  cmd->add_option("--phase_noise", cfg.phase_noise, "Gaussian phase jitter added before reconstruction [rad]");
  cmd->add_option("--noise_seed", cfg.noise_seed, "seed for phase jitter");
  cmd->add_option("--output_prefix", cfg.output_prefix, "prefix of output files (default INPUT without .csv plus '.')");
  cmd->add_flag("--svg", cfg.svg, "also write a scatter plot");
  cmd->add_flag("--lenient", cfg.lenient, "skip malformed trace lines");
  cmd->add_flag("--allow_partial_coverage", cfg.allow_partial_coverage,
                "only warn when a pi/12 phase bin holds under 1% of the data");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Homodyne-like detection: simulation and pattern-function tomography"};
  app.footer("Options may also come from a JSON object given with --config FILE.");
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1, 1);

  SimulateConfig sim;
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo HL trace");
  simulate->add_option("--prep", sim.prep, "coherent:RE[,IM] | phav:R | fock:0|1 | attenuated-fock1:ETA");
  simulate->add_option("--lo_magnitude", sim.lo_magnitude, "|beta|");
  simulate->add_option("--eta_c", sim.eta_c, "efficiency of detector c");
  simulate->add_option("--eta_d", sim.eta_d, "efficiency of detector d");
  simulate->add_option("--n_samples", sim.n_samples, "number of pulses");
  simulate->add_option("--n_steps", sim.n_steps, "piezo steps");
  simulate->add_option("--phase_mode", sim.phase_mode, "piezo | uniform");
  simulate->add_option("--phase_offset", sim.phase_offset, "LO phase before the first step [rad]");
  simulate->add_option("--phase_span", sim.phase_span, "LO phase covered by the scan [rad]");
  simulate->add_option("--spread_step", sim.spread_step, "phase increment between pulses of one step [rad]");
  simulate->add_option("--seed", sim.seed, "RNG seed")->required();
  simulate->add_option("--output", sim.output, "trace CSV path");

  ReconstructConfig rec;
  auto* reconstruct_cmd = app.add_subcommand("reconstruct", "density matrix from a trace");
  add_reconstruct_options(reconstruct_cmd, rec);

  ReconstructConfig mom;
  auto* moments_cmd = app.add_subcommand("moments", "quadrature mean and variance from a trace");
  add_reconstruct_options(moments_cmd, mom);

  ReportConfig rep;
  auto* report = app.add_subcommand("report", "table of results against theory");
  report->add_option("results,--results", rep.results, "result JSON files")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  report->add_option("--output", rep.output, "CSV path");
  report->add_option("--text", rep.text, "also write the text table here");

  try {
    const auto expanded = cli::expand_config_args(argc, argv);
    std::vector<const char*> ptrs;
    for (const auto& s : expanded) ptrs.push_back(s.c_str());
    try {
      app.parse(static_cast<int>(ptrs.size()), ptrs.data());
    } catch (const CLI::CallForHelp& e) {
      return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
      return app.exit(e);
    } catch (const CLI::ParseError& e) {
      return report_error("usage", e.what(), 2);
    }
    if (simulate->parsed()) return run_simulate(sim);
    if (reconstruct_cmd->parsed()) return run_reconstruct(rec);
    if (moments_cmd->parsed()) return run_moments(mom);
    return run_report(rep);
  } catch (const Error& e) {
    return report_error(to_string(e.code()), e.what(), exit_code_for(e.code()));
  } catch (const std::exception& e) {
    return report_error("internal", e.what(), 3);
  }
}
