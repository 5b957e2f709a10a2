#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qcs::cli {

enum ExitCode : int { kOk = 0, kUsage = 2, kData = 3, kNumerical = 4 };

// Runs one subcommand. `args` excludes the program name. Reads observations
// from `in` unless --input is given and writes to `out` unless --out is.
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace qcs::cli
