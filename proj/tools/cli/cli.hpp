#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pim::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitNumerical = 2;

/// Runs one subcommand. `args` excludes the program name. Returns the process
/// exit code: 0 success, 1 validation error, 2 numerical failure.
int parse_and_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Reads a plain-text config file of `key = value` lines ('#' comments) and
/// returns the equivalent `--key=value` arguments.
std::vector<std::string> config_file_args(const std::string& path);

}  // namespace pim::cli
