#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace poisonbench {

/// Exit codes of the command line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 1;  // bad flags, config or input data
inline constexpr int kExitFailure = 2;  // runtime failure

/// Entry point of the `poisonbench` tool. `args` excludes the program name.
/// Subcommands: generate, attack, train, eval, purify, certify, run, report.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace poisonbench
