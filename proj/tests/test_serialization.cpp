#include <gtest/gtest.h>

#include <filesystem>

#include "hlt/errors.hpp"
#include "hlt/serialization.hpp"

using namespace hlt;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no hlt::Error thrown";
  return ErrorCode::kInvalidArgument;
}

}  // namespace

TEST(Prep, ParseAndFormat) {
  for (const char* text : {"coherent:1.03", "coherent:0.5,-0.25", "phav:1.08", "fock:0", "fock:1",
                           "attenuated-fock1:0.4"})
    EXPECT_EQ(format_prep(parse_prep(text)), text);
  const auto c = std::get<Coherent>(parse_prep("coherent:0.5,-0.25"));
  EXPECT_EQ(c.amplitude, Complex(0.5, -0.25));
}

TEST(Prep, Rejects) {
  for (const char* text : {"coherent", "squeezed:1", "fock:2", "phav:abc", "attenuated-fock1:1.5", "phav:1.0x"})
    EXPECT_EQ(code_of([&] { parse_prep(text); }), ErrorCode::kInvalidArgument) << text;
}

TEST(Fnv1a, ReferenceVectors) {
  EXPECT_EQ(fnv1a_hex(""), "cbf29ce484222325");
  EXPECT_EQ(fnv1a_hex("a"), "af63dc4c8601ec8c");
  EXPECT_EQ(fnv1a_hex("foobar"), "85944171f73967e8");
}

TEST(ResultJson, RoundTrip) {
  ReconstructionResult r;
  r.rho = FockMatrix(3);
  r.rho(0, 0) = 0.7;
  r.rho(1, 1) = 0.3;
  r.rho(0, 1) = {0.1, -0.2};
  r.rho(1, 0) = {0.1, 0.2};
  r.rho_err = {0.01, 0.02, 0.03, 0.02, 0.01, 0.04, 0.03, 0.04, 1.0 / 3};
  r.n_blocks = 10;
  r.n_samples = 123456;
  r.metadata = {"trace.csv", 42u, 3.82, 3};
  r.warnings = {"something"};
  const auto path = std::filesystem::temp_directory_path() / "hlt_serialization_result.json";
  write_json(path, to_json(r));
  const auto back = result_from_json(read_json(path));
  EXPECT_EQ(back.rho, r.rho);
  EXPECT_EQ(back.rho_err, r.rho_err);
  EXPECT_EQ(back.n_blocks, 10);
  EXPECT_EQ(back.n_samples, 123456u);
  EXPECT_EQ(back.metadata.source, "trace.csv");
  EXPECT_EQ(back.metadata.seed, 42u);
  EXPECT_EQ(back.metadata.lo_magnitude, 3.82);
}

TEST(ResultJson, SchemaErrors) {
  EXPECT_EQ(code_of([] { result_from_json(Json::object()); }), ErrorCode::kSchema);
  Json doc = {{"dim", 2}, {"rho_re", {1, 0, 0}}, {"rho_im", {0, 0, 0, 0}}, {"rho_err", {0, 0, 0, 0}},
              {"n_blocks", 10}, {"n_samples", 5}};
  EXPECT_EQ(code_of([&] { result_from_json(doc); }), ErrorCode::kSchema);
  EXPECT_EQ(code_of([] { read_json(std::filesystem::temp_directory_path() / "hlt_missing.json"); }), ErrorCode::kIo);
}

TEST(CalibrationJson, RoundTrip) {
  PhaseCalibration cal;
  cal.phi_per_step = {0.0, 0.5, 3.14};
  cal.fit = {7.5, 3.9, 0.0523, 0.026};
  cal.residual_rms = 0.04;
  const auto back = calibration_from_json(to_json(cal));
  EXPECT_EQ(back.phi_per_step, cal.phi_per_step);
  EXPECT_EQ(back.fit.omega, 0.0523);
  EXPECT_EQ(back.residual_rms, 0.04);
  EXPECT_EQ(code_of([] { calibration_from_json(Json{{"fit_params", Json::object()}}); }), ErrorCode::kSchema);
}

TEST(AbsCsv, RowMajor) {
  FockMatrix rho(2);
  rho(0, 0) = 0.6;
  rho(0, 1) = {0.3, 0.4};
  rho(1, 0) = {0.3, -0.4};
  rho(1, 1) = 0.4;
  const auto csv = abs_csv(rho);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "n,m,abs");
  EXPECT_NE(csv.find("0,1,0.5"), std::string::npos);
  EXPECT_NE(csv.find("1,0,0.5"), std::string::npos);
}
