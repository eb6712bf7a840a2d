#pragma once

#include <string>
#include <vector>

namespace hlt::cli {

/// Rewrites argv so that the entries of a JSON config file (`--config PATH`)
/// come first as `--key value` pairs, followed by the original arguments.
/// With last-wins option parsing this makes the command line override the
/// file. Arrays expand to repeated values; `true` becomes a bare flag and
/// `false` is dropped.
std::vector<std::string> expand_config_args(int argc, const char* const* argv);

}  // namespace hlt::cli
