#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace disc_bench {

enum ExitCode : int
{
    kOk = 0,
    kUsage = 1,
    kUnknownTest = 2,
    kInvalidParameter = 3,
    kNotConverged = 4,
};

/// Parses `args` (without the program name), runs one experiment and returns an ExitCode.
/// Progress and the summary go to `out`, diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace disc_bench
