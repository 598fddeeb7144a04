#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace sigclass::cli {

/// Exit codes: 0 success, 1 runtime or numeric failure, 2 usage or
/// validation failure.
inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

/// Runs the command line `args` (without the program name). Human-readable
/// summaries go to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace sigclass::cli
