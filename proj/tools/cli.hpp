#ifndef SVSS_TOOLS_CLI_HPP
#define SVSS_TOOLS_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace svss::cli {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitNumerical = 4;
inline constexpr int kExitTooLarge = 5;

/// Runs one invocation; `args` excludes the program name. Results go to
/// `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Applies SVSS_NUM_THREADS, if set, to Eigen and OpenMP.
void apply_thread_env();

}  // namespace svss::cli

#endif  // SVSS_TOOLS_CLI_HPP
