#include "hlt/serialization.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <sstream>

#include <fmt/core.h>

#include "hlt/errors.hpp"

namespace hlt {

namespace {

double parse_number(std::string_view text, std::string_view context) {
  double value = 0.0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc() || end != text.data() + text.size())
    fail(ErrorCode::kInvalidArgument, fmt::format("cannot read a number from '{}' in '{}'", text, context));
  return value;
}

template <class T>
T field(const Json& doc, const char* key) {
  if (!doc.contains(key)) fail(ErrorCode::kSchema, fmt::format("missing field '{}'", key));
  try {
    return doc.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kSchema, fmt::format("field '{}': {}", key, e.what()));
  }
}

}  // namespace

StatePrep parse_prep(std::string_view text) {
  const std::size_t colon = text.find(':');
  if (colon == std::string_view::npos)
    fail(ErrorCode::kInvalidArgument, fmt::format("state '{}' needs the form kind:parameters", text));
  const std::string_view kind = text.substr(0, colon);
  const std::string_view args = text.substr(colon + 1);
  StatePrep prep;
  if (kind == "coherent") {
    const std::size_t comma = args.find(',');
    const double re = parse_number(args.substr(0, comma), text);
    const double im = comma == std::string_view::npos ? 0.0 : parse_number(args.substr(comma + 1), text);
    prep = Coherent{{re, im}};
  } else if (kind == "phav") {
    prep = Phav{parse_number(args, text)};
  } else if (kind == "fock") {
    const double n = parse_number(args, text);
    if (n != 0.0 && n != 1.0) fail(ErrorCode::kInvalidArgument, "only fock:0 and fock:1 are supported");
    prep = Fock{static_cast<int>(n)};
  } else if (kind == "attenuated-fock1") {
    prep = AttenuatedFock1{parse_number(args, text)};
  } else {
    fail(ErrorCode::kInvalidArgument, fmt::format("unknown state kind '{}'", kind));
  }
  validate(prep);
  return prep;
}

std::string format_prep(const StatePrep& prep) {
  if (const auto* c = std::get_if<Coherent>(&prep)) {
    if (c->amplitude.imag() == 0.0) return fmt::format("coherent:{}", c->amplitude.real());
    return fmt::format("coherent:{},{}", c->amplitude.real(), c->amplitude.imag());
  }
  if (const auto* p = std::get_if<Phav>(&prep)) return fmt::format("phav:{}", p->modulus);
  if (const auto* f = std::get_if<Fock>(&prep)) return fmt::format("fock:{}", f->n);
  return fmt::format("attenuated-fock1:{}", std::get<AttenuatedFock1>(prep).eta);
}

std::string fnv1a_hex(std::string_view text) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", hash);
}

Json to_json(const ReconstructionResult& result) {
  const int dim = result.rho.dim();
  Json re = Json::array(), im = Json::array(), err = Json::array();
  for (int n = 0; n < dim; ++n) {
    for (int m = 0; m < dim; ++m) {
      re.push_back(result.rho(n, m).real());
      im.push_back(result.rho(n, m).imag());
      err.push_back(result.err(n, m));
    }
  }
  Json meta = Json::object();
  meta["source"] = result.metadata.source;
  if (result.metadata.seed) {
    meta["seed"] = *result.metadata.seed;
  } else {
    meta["seed"] = nullptr;
  }
  meta["lo_magnitude"] = result.metadata.lo_magnitude;
  meta["dim"] = result.metadata.dim;
  Json doc = Json::object();
  doc["dim"] = dim;
  doc["n_blocks"] = result.n_blocks;
  doc["n_samples"] = result.n_samples;
  doc["rho_re"] = std::move(re);
  doc["rho_im"] = std::move(im);
  doc["rho_err"] = std::move(err);
  doc["metadata"] = std::move(meta);
  doc["phase_coverage"] = result.coverage.fractions;
  doc["warnings"] = result.warnings;
  return doc;
}

ReconstructionResult result_from_json(const Json& doc) {
  ReconstructionResult result;
  const int dim = field<int>(doc, "dim");
  if (dim < 1) fail(ErrorCode::kSchema, "dim must be positive");
  const auto re = field<std::vector<double>>(doc, "rho_re");
  const auto im = field<std::vector<double>>(doc, "rho_im");
  auto err = field<std::vector<double>>(doc, "rho_err");
  const auto size = static_cast<std::size_t>(dim) * dim;
  if (re.size() != size || im.size() != size || err.size() != size)
    fail(ErrorCode::kSchema, "matrix arrays do not have dim * dim entries");
  result.rho = FockMatrix(dim);
  for (int n = 0; n < dim; ++n)
    for (int m = 0; m < dim; ++m) result.rho(n, m) = {re[n * dim + m], im[n * dim + m]};
  result.rho_err = std::move(err);
  result.n_blocks = field<int>(doc, "n_blocks");
  result.n_samples = field<std::size_t>(doc, "n_samples");
  if (doc.contains("metadata")) {
    const Json& meta = doc["metadata"];
    if (meta.contains("source")) result.metadata.source = field<std::string>(meta, "source");
    if (meta.contains("seed") && !meta["seed"].is_null()) result.metadata.seed = field<std::uint64_t>(meta, "seed");
    if (meta.contains("lo_magnitude")) result.metadata.lo_magnitude = field<double>(meta, "lo_magnitude");
  }
  result.metadata.dim = dim;
  return result;
}

Json to_json(const MomentEstimate& moments) {
  Json doc = Json::object();
  doc["theta"] = moments.theta;
  doc["eta"] = moments.eta_assumed;
  doc["mean"] = moments.mean_x;
  doc["mean_err"] = moments.mean_err;
  doc["var"] = moments.var_x;
  doc["var_err"] = moments.var_err;
  doc["n_blocks"] = moments.n_blocks;
  doc["n_samples"] = moments.n_samples;
  return doc;
}

Json to_json(const PhaseCalibration& calibration) {
  Json doc = Json::object();
  doc["phi_per_step"] = calibration.phi_per_step;
  doc["fit_params"] = {{"A", calibration.fit.A},
                       {"B", calibration.fit.B},
                       {"omega", calibration.fit.omega},
                       {"delta", calibration.fit.delta}};
  doc["residual_rms"] = calibration.residual_rms;
  return doc;
}

PhaseCalibration calibration_from_json(const Json& doc) {
  PhaseCalibration cal;
  cal.phi_per_step = field<std::vector<double>>(doc, "phi_per_step");
  for (double phi : cal.phi_per_step) {
    if (!std::isfinite(phi)) fail(ErrorCode::kSchema, "phi_per_step holds a non-finite phase");
  }
  if (doc.contains("fit_params")) {
    const Json& fit = doc["fit_params"];
    cal.fit = {field<double>(fit, "A"), field<double>(fit, "B"), field<double>(fit, "omega"),
               field<double>(fit, "delta")};
  }
  if (doc.contains("residual_rms")) cal.residual_rms = field<double>(doc, "residual_rms");
  return cal;
}

Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kSchema, fmt::format("{}: {}", path.string(), e.what()));
  }
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIo, "cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) fail(ErrorCode::kIo, "failed while writing " + path.string());
}

void write_json(const std::filesystem::path& path, const Json& doc) { write_text(path, doc.dump(2) + "\n"); }

std::string abs_csv(const FockMatrix& rho) {
  std::string out = "n,m,abs\n";
  for (int n = 0; n < rho.dim(); ++n)
    for (int m = 0; m < rho.dim(); ++m) fmt::format_to(std::back_inserter(out), "{},{},{}\n", n, m, std::abs(rho(n, m)));
  return out;
}

}  // namespace hlt
