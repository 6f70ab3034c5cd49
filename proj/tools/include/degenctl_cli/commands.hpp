#pragma once

#include "degenctl_cli/config.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace degenctl::cli {

/// Process exit codes shared by every subcommand.
enum ExitCode : int {
    kOk = 0,
    /// A checked property failed or CG stopped early; artifacts are still written.
    kCheckFailed = 1,
    /// Bad command line, configuration or input file.
    kUsage = 2,
    /// Numerical failure inside a solver.
    kSolverFailure = 3,
};

/// Data files for `solve`. Unset slices come from the configured initial datum
/// (forward u0, adjoint vT); unset fields are zero.
struct SolveInputs {
    std::string mode = "forward";
    std::optional<std::filesystem::path> initial;   ///< u0 (forward) or vT (adjoint), slice CSV
    std::optional<std::filesystem::path> source;    ///< f (forward) or h (adjoint), field CSV
};

struct CommandContext {
    RunConfig config;
    std::filesystem::path out_dir;
    std::ostream& log;
};

int cmd_validate(const CommandContext& ctx);
int cmd_solve(const CommandContext& ctx, const SolveInputs& inputs);
int cmd_carleman(const CommandContext& ctx);
int cmd_observability(const CommandContext& ctx);
int cmd_hum(const CommandContext& ctx);
int cmd_sweep(const CommandContext& ctx);
int cmd_identity_check(const CommandContext& ctx);

/// Parses argv, dispatches, and maps exceptions to exit codes. Diagnostics go
/// to `err`, human-readable progress to `out`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace degenctl::cli
