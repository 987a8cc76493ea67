// Command-line front end. The executable is a thin wrapper around run_cli so
// the whole grammar can be exercised in-process.
//
// Exit codes: 0 success, 1 solver stopped at a limit, 2 usage error,
// 3 invalid or infeasible input, 4 internal error.

#pragma once

#include <iosfwd>

namespace capmax {

inline constexpr const char* kVersion = "0.1.0";

inline constexpr int kExitOk = 0;
inline constexpr int kExitLimit = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitInput = 3;
inline constexpr int kExitInternal = 4;

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace capmax
