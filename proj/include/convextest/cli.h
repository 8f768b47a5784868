#ifndef CONVEXTEST_CLI_H
#define CONVEXTEST_CLI_H

#include <iosfwd>
#include <string>
#include <vector>

namespace convextest {

// Exit codes shared by all subcommands.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 1;   // parse or validation failure
inline constexpr int kExitOverlap = 2;   // overlapping hypotheses or degenerate pair
inline constexpr int kExitNoConverge = 3;

/// Runs the command line `args` (without the program name). Output files go
/// to --out; without it the result is written to `out`. Diagnostics go to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace convextest

#endif  // CONVEXTEST_CLI_H
