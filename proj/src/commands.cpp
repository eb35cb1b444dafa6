#include "opo/commands.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "opo/constants.hpp"
#include "opo/error.hpp"
#include "opo/locking.hpp"
#include "opo/sde.hpp"

namespace opo {

namespace {

std::string join(const std::vector<std::string>& cells) {
    std::string out;
    for (std::size_t i = 0; i < cells.size(); ++i)
        out += (i ? "," : "") + cells[i];
    return out + "\n";
}

Eigen::Index supermode_index(const Model& model, int k) {
    if (k < 1 || k > model.supermodes.size())
        throw ConfigError("supermode " + std::to_string(k) + " out of range 1.." +
                              std::to_string(model.supermodes.size()),
                          "mode");
    return k - 1;
}

double homodyne_detection(const Scenario& sc) {
    return homodyne_efficiency(sc.detection_efficiency, sc.visibility);
}

std::string mode_label(const ModeSpec& m) {
    char sign = m.frequency_offset_hz < 0 ? '-' : '+';
    return "c_TEM" + std::to_string(m.m) + std::to_string(m.n) + "[" + sign +
           format_number(std::abs(m.frequency_offset_hz)) + "Hz]";
}

std::filesystem::path write_file(const CommandContext& ctx, const std::string& name, const std::string& content) {
    std::filesystem::create_directories(ctx.out_dir);
    const auto path = ctx.out_dir / name;
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw ConfigError("cannot write '" + path.string() + "'", "out");
    out << content;
    if (!out)
        throw ConfigError("write failed for '" + path.string() + "'", "out");
    return path;
}

void warn(const CommandContext& ctx, const std::string& message) {
    if (ctx.diagnostics)
        *ctx.diagnostics << "warning: " << message << "\n";
}

PolingSpec poling_for(const Scenario& sc, const SellmeierModel& model) {
    return {poling_period(sc, model), sc.crystal_length_mm * 1e-3, sc.crystal_temperature_k};
}

double gouy_correction(const Scenario& sc, const SellmeierModel& model) {
    if (sc.transverse_order_difference == 0)
        return 0.0;
    const double degenerate = 2.0 * sc.pump_wavelength_nm * 1e-9;
    const double n = refractive_index(model, degenerate, sc.crystal_temperature_k);
    return gouy_wavevector_offset(sc.cavity_geometry(), sc.crystal_length_mm * 1e-3, n,
                                  sc.transverse_order_difference);
}

} // namespace

Model build_model(const Scenario& scenario) {
    scenario.validate();
    Model m;
    m.basis = scenario.basis();
    m.coupling = build_coupling_matrix(m.basis);
    m.supermodes = diagonalize(m.coupling);
    m.params = scenario.cavity_params();
    m.pump = scenario.pump();
    m.operating_point = steady_state(m.pump, m.supermodes, m.params);
    return m;
}

std::filesystem::path resolve_coefficients(const CommandContext& ctx) {
    const std::filesystem::path name = ctx.scenario.coefficients;
    if (name.is_absolute())
        return name;
    const auto local = ctx.scenario_dir / name;
    if (std::filesystem::exists(local))
        return local;
    const auto bundled = std::filesystem::path(OPO_DATA_DIR) / name.filename();
    if (std::filesystem::exists(bundled))
        return bundled;
    throw ConfigError("coefficient file '" + name.string() + "' not found", "phasematch.coefficients");
}

double poling_period(const Scenario& scenario, const SellmeierModel& model) {
    if (scenario.poling_period_um)
        return *scenario.poling_period_um * 1e-6;
    return calibrate_poling_period(model, scenario.pump_wavelength_nm * 1e-9, scenario.nominal_temperature_k);
}

std::string supermodes_csv(const CommandContext& ctx) {
    const Model model = build_model(ctx.scenario);
    const auto& s = model.supermodes;
    const auto thresholds = threshold_powers(s, model.pump.threshold_power_ref);

    std::vector<std::string> header{"index", "lambda_relative", "threshold_w"};
    for (const auto& m : ctx.scenario.modes)
        header.push_back(mode_label(m));
    std::string out = join(header);
    for (Eigen::Index k = 0; k < s.size(); ++k) {
        std::vector<std::string> row{std::to_string(k + 1), format_number(s.eigenvalues(k) / s.leading()),
                                     format_number(thresholds[static_cast<std::size_t>(k)])};
        for (Eigen::Index i = 0; i < s.size(); ++i)
            row.push_back(format_number(s.eigenvectors(i, k)));
        out += join(row);
    }

    if (ctx.scenario.secondary_threshold_mw && s.size() > 1) {
        // the first supermode whose coupling differs from the leading pair
        for (Eigen::Index k = 1; k < s.size(); ++k) {
            const double ratio = std::abs(s.eigenvalues(k) / s.leading());
            if (ratio > 1.0 - 1e-9 || ratio == 0.0)
                continue;
            const double predicted = thresholds[static_cast<std::size_t>(k)] * 1e3;
            const double measured = *ctx.scenario.secondary_threshold_mw;
            if (std::abs(predicted - measured) > 0.1 * measured)
                warn(ctx, "coupling ratio " + format_number(ratio) + " predicts a threshold of " +
                              format_number(std::round(predicted)) + " mW for supermode " + std::to_string(k + 1) +
                              ", the scenario states " + format_number(measured) + " mW");
            break;
        }
    }
    return out;
}

std::string spectrum_csv(const CommandContext& ctx, int k) {
    const Model model = build_model(ctx.scenario);
    const Eigen::Index index = supermode_index(model, k);
    const double sigma = supermode_sigma(index, model.supermodes, model.operating_point, model.params);
    if (!(model.operating_point.regime == Regime::above && index == 0) && sigma >= 1.0)
        throw PhysicsError("inconsistent operating point: supermode " + std::to_string(k) +
                           " has sigma = " + format_number(sigma) + " >= 1");
    const auto freqs = ctx.scenario.frequency_grid();
    const auto spec = quadrature_spectrum(index, model.supermodes, model.operating_point, model.params,
                                          homodyne_detection(ctx.scenario), freqs);
    std::string out = join({"frequency_hz", "v_min", "v_max", "v_min_db", "v_max_db"});
    for (std::size_t i = 0; i < freqs.size(); ++i)
        out += join({format_number(freqs[i]), format_number(spec.v_min[i]), format_number(spec.v_max[i]),
                     format_number(to_db(spec.v_min[i])), format_number(to_db(spec.v_max[i]))});
    return out;
}

std::string threshold_scan_csv(const CommandContext& ctx, int k) {
    const Model model = build_model(ctx.scenario);
    const Eigen::Index index = supermode_index(model, k);
    const double clamp = model.params.gamma() / std::abs(model.supermodes.leading());
    const double zero[] = {0.0};

    std::string out = join({"power_w", "pump_parameter", "regime", "pump_mean_rel_clamp", "v_min", "v_min_db"});
    for (double factor : ctx.scenario.power_factors) {
        PumpDrive pump = model.pump;
        pump.power = factor * pump.threshold_power_ref;
        const auto op = steady_state(pump, model.supermodes, model.params);
        const auto spec = quadrature_spectrum(index, model.supermodes, op, model.params,
                                              homodyne_detection(ctx.scenario), zero);
        out += join({format_number(pump.power), format_number(op.pump_parameter), to_string(op.regime),
                     format_number(std::abs(op.intracavity_pump_mean) / clamp), format_number(spec.v_min[0]),
                     format_number(to_db(spec.v_min[0]))});
    }
    return out;
}

TrajectoryResult trajectory_output(const CommandContext& ctx, const TrajectoryOptions& options) {
    const Scenario& sc = ctx.scenario;
    const Model model = build_model(sc);
    const Eigen::Index index = supermode_index(model, options.k);
    const double zero[] = {0.0};
    const auto spec = quadrature_spectrum(index, model.supermodes, model.operating_point, model.params,
                                          homodyne_detection(sc), zero);
    if (spec.sigma >= 1.0)
        throw PhysicsError("inconsistent operating point: supermode " + std::to_string(options.k) +
                           " has sigma >= 1");

    EnsembleSpec ens;
    ens.supermodes = {index};
    ens.lo.mode = Eigen::VectorXd::Unit(model.supermodes.size(), index);
    ens.lo.phase = spec.squeezed_quadrature_angle + (sc.quadrature == "antisqueezed" ? 0.5 * constants::pi : 0.0);
    ens.lo.power = sc.lo_power_mw * 1e-3;
    ens.lo.bright_power = model.operating_point.regime == Regime::above ? sc.bright_power_mw * 1e-3 : 0.0;
    ens.lo.visibility = sc.visibility;
    ens.lo.detection_efficiency = sc.detection_efficiency;
    ens.settings.dt = model.params.round_trip_time / (sc.dt_divisor * model.params.gamma());
    const double duration =
        options.duration > 0.0 ? options.duration
                               : ens.settings.dt * static_cast<double>(sc.segment_length) * 50.5;
    ens.settings.steps = static_cast<std::size_t>(std::ceil(duration / ens.settings.dt));
    ens.settings.seed = sc.seed;
    ens.settings.trajectory_index = 0;
    ens.count = options.ensemble.value_or(sc.ensemble);
    ens.segment_length = sc.segment_length;
    ens.threads = options.threads;
    if (ens.count == 0)
        throw ConfigError("must be at least 1", "ensemble");

    const auto estimate = ensemble_psd(ens, model.operating_point, model.supermodes, model.params);
    const double correction = shot_noise_correction(ens.lo.power, ens.lo.bright_power);
    const double bright_ratio = ens.lo.bright_power / ens.lo.power;
    const auto analytic = quadrature_spectrum(index, model.supermodes, model.operating_point, model.params,
                                              homodyne_detection(sc), estimate.frequencies);
    const auto& expected = sc.quadrature == "antisqueezed" ? analytic.v_max : analytic.v_min;

    TrajectoryResult result;
    result.psd_csv = join({"frequency_hz", "psd", "psd_se", "psd_corrected", "psd_corrected_se", "analytic_corrected"});
    for (std::size_t i = 0; i < estimate.frequencies.size(); ++i) {
        const double p = estimate.psd[i];
        const double se = p * estimate.standard_error[i];
        const double corrected = (expected[i] + bright_ratio) / (1.0 + bright_ratio);
        result.psd_csv += join({format_number(estimate.frequencies[i]), format_number(p), format_number(se),
                                format_number(p / correction), format_number(se / correction),
                                format_number(corrected)});
    }

    if (options.raw_records) {
        for (std::size_t t = 0; t < ens.count; ++t) {
            IntegrationSettings settings = ens.settings;
            settings.trajectory_index = ens.settings.trajectory_index + t;
            const auto traj = simulate_supermodes(ens.supermodes, model.operating_point, model.supermodes,
                                                  model.params, settings);
            const auto record = homodyne_record(traj, ens.lo);
            std::string csv = join({"time_s", "photocurrent_shot_units"});
            for (std::size_t i = 0; i < record.samples.size(); ++i)
                csv += join({format_number(static_cast<double>(i) * record.dt), format_number(record.samples[i])});
            result.records.push_back(std::move(csv));
        }
    }
    return result;
}

std::string wavelengths_report(const CommandContext& ctx) {
    const Scenario& sc = ctx.scenario;
    sc.validate();
    const auto model = load_sellmeier(resolve_coefficients(ctx));
    const PolingSpec poling = poling_for(sc, model);
    const double pump = sc.pump_wavelength_nm * 1e-9;
    const double gouy = gouy_correction(sc, model);
    const auto pair = solve_signal_idler(model, poling, {pump, gouy, sc.search_min_nm * 1e-9});
    const double t_deg = degeneracy_temperature(model, poling, pump);
    PolingSpec at_deg = poling;
    at_deg.temperature = t_deg;
    const auto degenerate = solve_signal_idler(model, at_deg, {pump, 0.0, sc.search_min_nm * 1e-9});
    const double energy = std::abs(1.0 / pair.signal + 1.0 / pair.idler - 1.0 / pump) * pump;
    const double split = transverse_split_frequency(sc.cavity_geometry(), sc.path_asymmetry_nm * 1e-9, 2.0 * pump);

    std::ostringstream out;
    auto line = [&](const char* key, double value) { out << key << " = " << format_number(value) << "\n"; };
    out << "model = " << model.name << "\n";
    line("poling_period_um", poling.poling_period * 1e6);
    line("temperature_k", poling.temperature);
    line("gouy_correction_rad_per_m", gouy);
    line("signal_nm", pair.signal * 1e9);
    line("idler_nm", pair.idler * 1e9);
    line("residual_rad_per_m", pair.mismatch);
    line("energy_residual_relative", energy);
    line("degeneracy_temperature_k", t_deg);
    line("degenerate_signal_nm", degenerate.signal * 1e9);
    line("degenerate_idler_nm", degenerate.idler * 1e9);
    line("degenerate_residual_rad_per_m", degenerate.mismatch);
    line("transverse_split_hz", split);
    return out.str();
}

std::string tuning_curve_csv(const CommandContext& ctx) {
    const Scenario& sc = ctx.scenario;
    sc.validate();
    const auto model = load_sellmeier(resolve_coefficients(ctx));
    const PolingSpec poling = poling_for(sc, model);
    std::vector<double> temps(sc.temperature_points);
    for (std::size_t i = 0; i < temps.size(); ++i)
        temps[i] = temps.size() == 1 ? sc.crystal_temperature_k
                                     : sc.crystal_temperature_k - 0.5 * sc.temperature_span_k +
                                           sc.temperature_span_k * static_cast<double>(i) /
                                               static_cast<double>(temps.size() - 1);
    const auto curve = tuning_curve(model, poling,
                                    {sc.pump_wavelength_nm * 1e-9, gouy_correction(sc, model), sc.search_min_nm * 1e-9},
                                    temps);
    std::string out = join({"temperature_k", "signal_nm", "idler_nm"});
    for (const auto& p : curve)
        out += join({format_number(p.temperature), format_number(p.signal * 1e9), format_number(p.idler * 1e9)});
    return out;
}

std::string error_signal_csv(const CommandContext& ctx) {
    const Scenario& sc = ctx.scenario;
    sc.validate();
    const auto lock = sc.lock();
    lock.validate();
    std::string out = join({"phase_rad", "error_signal", "parametric_gain"});
    for (double phi : sc.phase_grid())
        out += join({format_number(phi), format_number(error_signal(lock, phi)),
                     format_number(parametric_gain(phi, sc.lock_sigma))});
    return out;
}

std::string lock_points_report(const CommandContext& ctx) {
    const Scenario& sc = ctx.scenario;
    sc.validate();
    const auto lock = sc.lock();
    lock.validate();
    std::ostringstream out;
    out << "doubled_power_w = " << format_number(lock.doubled_power()) << "\n";
    for (auto [name, target] : {std::pair{"amplification", LockTarget::amplification},
                                std::pair{"deamplification", LockTarget::deamplification}}) {
        const auto p = lock_point(lock, target);
        out << name << "_phase_rad = " << format_number(p.phase) << "\n";
        out << name << "_slope = " << format_number(p.discriminant_slope) << "\n";
        out << name << "_feedback_sign = " << p.feedback_sign << "\n";
        out << name << "_gain = " << format_number(parametric_gain(p.phase, sc.lock_sigma)) << "\n";
    }
    return out.str();
}

std::vector<std::filesystem::path> cmd_supermodes(const CommandContext& ctx) {
    return {write_file(ctx, "supermodes.csv", supermodes_csv(ctx))};
}

std::vector<std::filesystem::path> cmd_spectrum(const CommandContext& ctx, int k) {
    return {write_file(ctx, "spectrum_k" + std::to_string(k) + ".csv", spectrum_csv(ctx, k))};
}

std::vector<std::filesystem::path> cmd_threshold_scan(const CommandContext& ctx, int k) {
    return {write_file(ctx, "threshold_scan_k" + std::to_string(k) + ".csv", threshold_scan_csv(ctx, k))};
}

std::vector<std::filesystem::path> cmd_trajectory(const CommandContext& ctx, const TrajectoryOptions& options) {
    const auto result = trajectory_output(ctx, options);
    const std::string stem = "k" + std::to_string(options.k);
    std::vector<std::filesystem::path> paths{write_file(ctx, "trajectory_psd_" + stem + ".csv", result.psd_csv)};
    for (std::size_t t = 0; t < result.records.size(); ++t)
        paths.push_back(write_file(ctx, "record_" + stem + "_t" + std::to_string(t) + ".csv", result.records[t]));
    return paths;
}

std::vector<std::filesystem::path> cmd_wavelengths(const CommandContext& ctx) {
    return {write_file(ctx, "wavelengths.txt", wavelengths_report(ctx)),
            write_file(ctx, "tuning_curve.csv", tuning_curve_csv(ctx))};
}

std::vector<std::filesystem::path> cmd_error_signal(const CommandContext& ctx) {
    return {write_file(ctx, "error_signal.csv", error_signal_csv(ctx)),
            write_file(ctx, "lock_points.txt", lock_points_report(ctx))};
}

} // namespace opo
