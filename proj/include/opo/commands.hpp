#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "opo/coupling.hpp"
#include "opo/dynamics.hpp"
#include "opo/phasematch.hpp"
#include "opo/scenario.hpp"

namespace opo {

// Everything derived from a scenario before any command-specific work.
struct Model {
    ModeBasis basis;
    CouplingMatrix coupling;
    Supermodes supermodes;
    CavityParams params;
    PumpDrive pump;
    OperatingPoint operating_point;
};

Model build_model(const Scenario& scenario);

struct CommandContext {
    Scenario scenario;
    std::filesystem::path scenario_dir;  // relative coefficient paths resolve here
    std::filesystem::path out_dir = ".";
    std::ostream* diagnostics = nullptr;  // warnings; nullptr drops them
};

/// Coefficient file named by the scenario: relative to the scenario
/// directory, then to the bundled data directory.
std::filesystem::path resolve_coefficients(const CommandContext& ctx);

/// Poling period in use: the configured one, or the period calibrated for
/// degenerate operation at the nominal temperature.
double poling_period(const Scenario& scenario, const SellmeierModel& model);

// CSV/report text for each command. The cmd_* functions write these to
// files under out_dir and return the paths written. Supermode indices `k`
// are 1-based here, as on the command line.
std::string supermodes_csv(const CommandContext& ctx);
std::string spectrum_csv(const CommandContext& ctx, int k);
std::string threshold_scan_csv(const CommandContext& ctx, int k);
std::string wavelengths_report(const CommandContext& ctx);
std::string tuning_curve_csv(const CommandContext& ctx);
std::string error_signal_csv(const CommandContext& ctx);
std::string lock_points_report(const CommandContext& ctx);

struct TrajectoryOptions {
    int k = 1;
    double duration = 0.0;  // s per trajectory; 0 picks 100 half-overlapped segments
    std::optional<std::size_t> ensemble;  // overrides sde.ensemble
    bool raw_records = false;
    unsigned threads = 0;
};

struct TrajectoryResult {
    std::string psd_csv;
    std::vector<std::string> records;  // one CSV per trajectory when requested
};

TrajectoryResult trajectory_output(const CommandContext& ctx, const TrajectoryOptions& options);

std::vector<std::filesystem::path> cmd_supermodes(const CommandContext& ctx);
std::vector<std::filesystem::path> cmd_spectrum(const CommandContext& ctx, int k);
std::vector<std::filesystem::path> cmd_threshold_scan(const CommandContext& ctx, int k);
std::vector<std::filesystem::path> cmd_trajectory(const CommandContext& ctx, const TrajectoryOptions& options);
std::vector<std::filesystem::path> cmd_wavelengths(const CommandContext& ctx);
std::vector<std::filesystem::path> cmd_error_signal(const CommandContext& ctx);

/// Command-line entry point. Returns 0 on success, 2 for configuration
/// errors and 3 for solver or physics failures; diagnostics go to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& err);

} // namespace opo
