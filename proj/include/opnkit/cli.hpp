#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace opnkit {

/// Exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitFindings = 1,  // sieve violations, refuter or search solutions
  kExitUsage = 2,     // bad arguments, domain errors, refusals, unwritable output
  kExitInconsistent = 3,
};

/// Runs one command. args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace opnkit
