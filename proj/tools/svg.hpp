#pragma once

#include <span>
#include <string>
#include <string_view>

#include "hlt/hl_detection.hpp"

namespace hlt::cli {

/// Static scatter of delta_phi against phase, at most `max_points` points
/// taken at an even stride.
std::string scatter_svg(std::span<const HLSample> samples, std::string_view title,
                        std::string_view config_hash, std::size_t max_points = 4000);

}  // namespace hlt::cli
