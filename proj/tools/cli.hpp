#pragma once

#include <iosfwd>

namespace cascade::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kValidationFailed = 1;
inline constexpr int kUsage = 2;
inline constexpr int kIo = 3;

/// Entry point of `cascade_lab`; machine-readable output goes to `out`,
/// diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace cascade::cli
