#pragma once

#include <iosfwd>

namespace pemq {

/// Exit codes of the `pemq` command.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitSolver = 3;

/// Entry point of the `pemq` command, usable in-process. Messages go to
/// `err`, reports to `out`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace pemq
