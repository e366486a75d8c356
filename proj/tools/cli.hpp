#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace skinburst::cli {

enum ExitCode : int { kOk = 0, kSuiteFailed = 1, kUsage = 2, kNumerical = 3 };

/// Runs one command line (args[0] is the subcommand, no program name).
/// Human-readable progress goes to `out`; error records go to `err` as a
/// single JSON line.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Hex SHA-256 of a byte string.
std::string sha256_hex(const std::string& bytes);

}  // namespace skinburst::cli
