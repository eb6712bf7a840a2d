#include "config.hpp"

#include <string_view>

#include <fmt/core.h>

#include "hlt/errors.hpp"
#include "hlt/serialization.hpp"

namespace hlt::cli {

namespace {

std::string scalar_text(const Json& value, const std::string& key) {
  if (value.is_string()) return value.get<std::string>();
  if (value.is_number_integer() || value.is_number_unsigned()) return value.dump();
  if (value.is_number_float()) return fmt::format("{}", value.get<double>());
  fail(ErrorCode::kSchema, fmt::format("config key '{}' must hold a string, number, boolean or array", key));
}

}  // namespace

std::vector<std::string> expand_config_args(int argc, const char* const* argv) {
  std::vector<std::string> original(argv, argv + argc);
  std::vector<std::string> rest;
  std::string config_path;
  for (std::size_t i = 0; i < original.size(); ++i) {
    const std::string_view arg = original[i];
    if (arg == "--config") {
      if (i + 1 >= original.size()) fail(ErrorCode::kInvalidArgument, "--config needs a file path");
      config_path = original[++i];
    } else if (arg.starts_with("--config=")) {
      config_path = std::string(arg.substr(9));
    } else {
      rest.push_back(original[i]);
    }
  }
  if (config_path.empty()) return rest;

  const Json doc = read_json(config_path);
  if (!doc.is_object()) fail(ErrorCode::kSchema, config_path + ": config must be a JSON object");

  // Program name and subcommand stay in front.
  std::vector<std::string> out;
  std::size_t head = std::min<std::size_t>(rest.size(), 2);
  if (head == 2 && rest[1].starts_with("-")) head = 1;
  out.assign(rest.begin(), rest.begin() + static_cast<std::ptrdiff_t>(head));
  for (const auto& [key, value] : doc.items()) {
    const std::string flag = "--" + key;
    if (value.is_boolean()) {
      if (value.get<bool>()) out.push_back(flag);
    } else if (value.is_array()) {
      if (value.empty()) continue;
      out.push_back(flag);
      for (const auto& item : value) out.push_back(scalar_text(item, key));
    } else if (!value.is_null()) {
      out.push_back(flag);
      out.push_back(scalar_text(value, key));
    }
  }
  out.insert(out.end(), rest.begin() + static_cast<std::ptrdiff_t>(head), rest.end());
  return out;
}

}  // namespace hlt::cli
