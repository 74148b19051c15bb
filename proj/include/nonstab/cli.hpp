#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace nonstab::cli {

inline constexpr int kExitCertified = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitInconclusive = 2;

/// Runs one command. args excludes the program name, e.g.
/// {"certify", "net.json", "--format", "json"}.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace nonstab::cli
