#pragma once

#include <iosfwd>
#include <string>

namespace fch::cli {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int { kOk = 0, kUsage = 2, kInfeasible = 3, kNumerical = 4 };

// Entry point shared by the executable and the tests. Summaries go to `out`, errors (as one
// JSON object) to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// Exit code for a library error kind.
int exit_code_for(const std::string& kind);

}  // namespace fch::cli
