#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace looplc {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitRuntime = 3;

/// Runs the `looplc` command line with `args` (program name excluded).
/// Normal output goes to `out`, diagnostics to `err`. Returns the exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace looplc
