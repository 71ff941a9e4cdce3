#ifndef MMP_TOOLS_CLI_HPP
#define MMP_TOOLS_CLI_HPP

#include <iosfwd>

namespace mmp::cli {

inline constexpr const char* kVersion = "1.0.0";

enum ExitCode : int { ok = 0, usage_error = 1, numeric_error = 2 };

/// Entry point shared by the executable and the tests. Structured output goes
/// to `out`, diagnostics and usage text to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mmp::cli

#endif  // MMP_TOOLS_CLI_HPP
