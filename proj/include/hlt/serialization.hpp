#pragma once

// JSON and CSV forms of results, calibrations and state descriptions.

#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

#include "hlt/fock_core.hpp"
#include "hlt/ingestion.hpp"
#include "hlt/tomography.hpp"

namespace hlt {

using Json = nlohmann::ordered_json;

/// "coherent:RE[,IM]", "phav:MODULUS", "fock:N", "attenuated-fock1:ETA".
StatePrep parse_prep(std::string_view text);
std::string format_prep(const StatePrep& prep);

/// 64-bit FNV-1a of `text`, as 16 lowercase hex digits.
std::string fnv1a_hex(std::string_view text);

Json to_json(const ReconstructionResult& result);
ReconstructionResult result_from_json(const Json& doc);

Json to_json(const MomentEstimate& moments);
Json to_json(const PhaseCalibration& calibration);
PhaseCalibration calibration_from_json(const Json& doc);

Json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const Json& doc);
void write_text(const std::filesystem::path& path, std::string_view text);

/// "n,m,abs" rows in row-major order.
std::string abs_csv(const FockMatrix& rho);

}  // namespace hlt
