#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>

namespace mhd::cli {

enum ExitCode : int { kOk = 0, kFailure = 1, kConfigError = 2, kBlowUp = 3 };

// Resolved flat configuration (dotted keys).
using Settings = std::map<std::string, std::string>;

// key = value lines; '#' starts a comment.
Settings parse_config_text(const std::string& text);
Settings load_config_file(const std::string& path);

// FNV-1a 64 over the sorted "key=value\n" lines, as 16 hex digits.
std::string config_hash(const Settings& s);

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mhd::cli
