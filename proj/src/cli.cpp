#include <CLI11.hpp>

#include <iostream>

#include "opo/commands.hpp"
#include "opo/error.hpp"

namespace opo {

int run_cli(int argc, const char* const* argv, std::ostream& err) {
    CLI::App app{"Multimode OPO squeezing simulator"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string scenario_path;
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed;
    app.add_option("--scenario", scenario_path, "Scenario file")->required();
    app.add_option("--out", out_dir, "Output directory");
    app.add_option("--seed", seed, "Master RNG seed (overrides sde.seed)");

    int mode = 1;
    TrajectoryOptions traj;
    std::size_t ensemble = 0;

    auto* supermodes = app.add_subcommand("supermodes", "Supermode table");
    auto* spectrum = app.add_subcommand("spectrum", "Quadrature noise spectra of one supermode");
    spectrum->add_option("--mode", mode, "Supermode index (1-based)");
    auto* scan = app.add_subcommand("threshold-scan", "Squeezing versus pump power");
    scan->add_option("--mode", mode, "Supermode index (1-based)");
    auto* trajectory = app.add_subcommand("trajectory", "Stochastic simulation and PSD estimate");
    trajectory->add_option("--mode", mode, "Supermode index (1-based)");
    trajectory->add_option("--duration", traj.duration, "Simulated time per trajectory in s");
    trajectory->add_option("--ensemble", ensemble, "Number of trajectories (overrides sde.ensemble)");
    trajectory->add_flag("--raw", traj.raw_records, "Also write each photocurrent record");
    trajectory->add_option("--threads", traj.threads, "Worker threads (0: all cores)");
    auto* wavelengths = app.add_subcommand("wavelengths", "Phase-matched signal/idler pair");
    auto* error = app.add_subcommand("error-signal", "Phase-lock error signal sweep");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, std::cout, err);
        return code == 0 ? 0 : 2;
    }

    try {
        CommandContext ctx;
        ctx.scenario = load_scenario(scenario_path);
        if (seed)
            ctx.scenario.seed = *seed;
        ctx.scenario_dir = std::filesystem::path(scenario_path).parent_path();
        ctx.out_dir = out_dir;
        ctx.diagnostics = &err;

        if (supermodes->parsed())
            cmd_supermodes(ctx);
        else if (spectrum->parsed())
            cmd_spectrum(ctx, mode);
        else if (scan->parsed())
            cmd_threshold_scan(ctx, mode);
        else if (trajectory->parsed()) {
            traj.k = mode;
            if (ensemble > 0)
                traj.ensemble = ensemble;
            cmd_trajectory(ctx, traj);
        } else if (wavelengths->parsed())
            cmd_wavelengths(ctx);
        else if (error->parsed())
            cmd_error_signal(ctx);
        return 0;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        err << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 3;
    }
}

} // namespace opo
