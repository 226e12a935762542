#pragma once
// Command-line front end. Kept in the library so tests can drive it in-process.

#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "gear/error.hpp"

namespace gear::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitIo = 2;
inline constexpr int kExitConfig = 3;

int exit_code(ErrorCategory c);

// Flat "key = value" text; '#' starts a comment line. Throws ConfigError on
// malformed lines and repeated keys.
std::map<std::string, std::string> parse_config(std::string_view text, const std::string& source);

// args excludes the program name. Never throws: failures print one
// "gear: error: <category>: <message>" line to err and return the exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace gear::cli
