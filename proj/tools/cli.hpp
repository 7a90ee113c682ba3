#pragma once

#include <iosfwd>

namespace ralb::cli {

/// Exit codes of the command-line tool.
inline constexpr int kOk = 0;
inline constexpr int kInputError = 2;
inline constexpr int kBudgetExceeded = 3;

/// Runs one `ralb` invocation. Results go to `out` and to files under --out;
/// timings and diagnostics go to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ralb::cli
