#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace perdiff::cli {

inline constexpr const char* kVersion = "1.0.0";

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitParse = 2,
  kExitSolver = 3,
  kExitHypothesis = 4,
};

/// Runs one command line. `args` excludes the program name. Reports go to `out`,
/// diagnostics for usage errors to `err`. Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace perdiff::cli
