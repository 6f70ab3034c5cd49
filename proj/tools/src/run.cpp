#include "degenctl_cli/commands.hpp"

#include "degenctl/solver.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <functional>
#include <ostream>

namespace degenctl::cli {

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Numerical experiments for null controllability of super strongly degenerate "
                 "parabolic equations"};
    app.name("degenctl");
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    app.add_option("--config", config_path, "Run configuration (JSON)")->required();
    auto* out_opt = app.add_option("--out", out_dir, "Output directory (overrides output_dir)");
    auto* seed_opt = app.add_option("--seed", seed, "Study seed (overrides carleman.seed)");

    SolveInputs solve_inputs;
    std::string initial_path, source_path;
    auto* validate = app.add_subcommand("validate", "Check the structural hypotheses on (a, omega)");
    auto* solve = app.add_subcommand("solve", "Forward or adjoint solve; writes trajectory CSV");
    solve->add_option("--mode", solve_inputs.mode, "forward | adjoint")
        ->check(CLI::IsMember({"forward", "adjoint"}));
    auto* initial_opt =
        solve->add_option("--initial", initial_path, "Slice CSV: u0 (forward) or vT (adjoint)");
    auto* source_opt =
        solve->add_option("--source", source_path, "Field CSV: f (forward) or h (adjoint)");
    auto* carleman = app.add_subcommand("carleman", "Carleman ratio study");
    auto* observability = app.add_subcommand("observability", "Observability quotient study");
    auto* hum = app.add_subcommand("hum", "Penalized HUM control for hum.eps");
    auto* sweep = app.add_subcommand("sweep", "HUM epsilon sweep over hum.eps_list");
    auto* identity = app.add_subcommand("identity-check", "Conjugated-operator identity residual");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kUsage;
    }

    try {
        RunConfig config = load_config(config_path);
        if (*out_opt) config.output_dir = out_dir;
        if (*seed_opt) config.carleman.seed = seed;
        if (*initial_opt) solve_inputs.initial = initial_path;
        if (*source_opt) solve_inputs.source = source_path;
        const CommandContext ctx{config, config.output_dir, out};

        const std::vector<std::pair<CLI::App*, std::function<int()>>> table{
            {validate, [&] { return cmd_validate(ctx); }},
            {solve, [&] { return cmd_solve(ctx, solve_inputs); }},
            {carleman, [&] { return cmd_carleman(ctx); }},
            {observability, [&] { return cmd_observability(ctx); }},
            {hum, [&] { return cmd_hum(ctx); }},
            {sweep, [&] { return cmd_sweep(ctx); }},
            {identity, [&] { return cmd_identity_check(ctx); }},
        };
        for (const auto& [sub, fn] : table)
            if (sub->parsed()) {
                out << sub->get_name() << "\n";
                return fn();
            }
        err << "no subcommand given\n";
        return kUsage;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kUsage;
    } catch (const SolverError& e) {
        err << "solver error: " << e.what() << "\n";
        return kSolverFailure;
    } catch (const std::invalid_argument& e) {
        err << "invalid input: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kSolverFailure;
    }
}

}  // namespace degenctl::cli
