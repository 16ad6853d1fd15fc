#pragma once

#include <ostream>

namespace gradflow::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitInput = 2;
inline constexpr int kExitCheck = 3;

/// Runs one command; diagnostics go to `err`, progress lines to `out`.
int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err);

} // namespace gradflow::cli
