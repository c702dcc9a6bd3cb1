#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace garchpd::cli {

enum ExitCode { kOk = 0, kUsage = 1, kFailure = 2 };

// Parses args (without the program name), runs the subcommand and writes
// the result to `out` (or --out). Diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace garchpd::cli
