#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace omcspin::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailedCriteria = 1;  // repro only
inline constexpr int kExitUsage = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitFit = 4;

/// Runs one subcommand. `args` excludes the program name. Reports go to the
/// --out file when given, otherwise to `out`; diagnostics go to `err`.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace omcspin::cli
