#pragma once

#include <iosfwd>

namespace wavedecay {

inline constexpr int kExitPass = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitViolation = 2;

/// Entry point of the `wavedecay` tool. Returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace wavedecay
