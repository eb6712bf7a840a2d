#include "svg.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <numbers>

#include <fmt/core.h>

namespace hlt::cli {

std::string scatter_svg(std::span<const HLSample> samples, std::string_view title,
                        std::string_view config_hash, std::size_t max_points) {
  constexpr double kWidth = 640, kHeight = 400, kMargin = 48;
  double reach = 1.0;
  for (const auto& s : samples) reach = std::max(reach, std::abs(s.delta_phi));
  reach = std::ceil(reach);
  const std::size_t stride = std::max<std::size_t>(1, (samples.size() + max_points - 1) / std::max<std::size_t>(1, max_points));

  auto px = [&](double phase) { return kMargin + (kWidth - 2 * kMargin) * phase / std::numbers::pi; };
  auto py = [&](double x) { return kHeight / 2 - (kHeight / 2 - kMargin) * x / reach; };

  std::string out;
  auto put = std::back_inserter(out);
  fmt::format_to(put, "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\">\n", kWidth, kHeight);
  fmt::format_to(put, "<!-- config_hash {} -->\n", config_hash);
  fmt::format_to(put, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
  fmt::format_to(put, "<text x=\"{}\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\">{}</text>\n", kMargin, title);
  fmt::format_to(put, "<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"#888\"/>\n", kMargin, py(0.0),
                 kWidth - kMargin);
  fmt::format_to(put, "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\">phase [0, pi)</text>\n",
                 kWidth / 2 - 40, kHeight - 12);
  fmt::format_to(put, "<text x=\"4\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\">+{}</text>\n", py(reach) + 4, reach);
  fmt::format_to(put, "<text x=\"4\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\">-{}</text>\n", py(-reach) + 4, reach);
  out += "<g fill=\"#1f5fa8\" fill-opacity=\"0.35\">\n";
  for (std::size_t k = 0; k < samples.size(); k += stride) {
    const double phase = std::fmod(std::fmod(samples[k].phase, std::numbers::pi) + std::numbers::pi, std::numbers::pi);
    fmt::format_to(put, "<circle cx=\"{:.1f}\" cy=\"{:.1f}\" r=\"1.5\"/>\n", px(phase), py(samples[k].delta_phi));
  }
  out += "</g>\n</svg>\n";
  return out;
}

}  // namespace hlt::cli
