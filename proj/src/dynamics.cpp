#include "opo/dynamics.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "opo/constants.hpp"
#include "opo/error.hpp"

namespace opo {

namespace {

constexpr double kRegimeTolerance = 1e-12;

bool in_open_unit(double v) { return v > 0.0 && v < 1.0; }
bool in_unit(double v) { return v >= 0.0 && v < 1.0; }

double noise_reduction(double sigma, double x) {
    return 4.0 * sigma / ((1.0 + sigma) * (1.0 + sigma) + x * x);
}

} // namespace

void CavityParams::validate(std::optional<double> finesse) const {
    if (!(round_trip_time > 0.0))
        throw ConfigError("round-trip time must be positive", "cavity.round_trip_time");
    if (!in_unit(input_coupler_transmission))
        throw ConfigError("must lie in [0, 1)", "cavity.input_transmission");
    if (!in_open_unit(output_coupler_transmission))
        throw ConfigError("must lie in (0, 1)", "cavity.output_transmission");
    if (!in_unit(intracavity_loss))
        throw ConfigError("must lie in [0, 1)", "cavity.intracavity_loss");
    if (finesse) {
        const double derived = derive_cavity_figures(*this).finesse;
        if (std::abs(derived - *finesse) > 0.02 * *finesse)
            throw ConfigError("stated finesse " + std::to_string(*finesse) + " differs from derived " +
                                  std::to_string(derived) + " by more than 2%",
                              "cavity.finesse");
    }
}

CavityParams CavityParams::from_geometry(const CavityGeometry& geometry, double input_transmission,
                                         double output_transmission, double loss) {
    return {geometry.round_trip_path() / constants::speed_of_light, input_transmission, output_transmission,
            loss};
}

CavityFigures derive_cavity_figures(const CavityParams& params) {
    const double gamma = params.gamma();
    return {2.0 * constants::pi / (2.0 * gamma), params.escape_efficiency(),
            gamma / (constants::pi * params.round_trip_time)};
}

double PumpDrive::pump_parameter() const { return std::sqrt(power / threshold_power_ref); }

void PumpDrive::validate() const {
    if (!(power >= 0.0))
        throw ConfigError("pump power must be non-negative", "pump.power_mw");
    if (!(threshold_power_ref > 0.0))
        throw ConfigError("threshold power must be positive", "pump.threshold_mw");
    if (!(wavelength > 0.0))
        throw ConfigError("pump wavelength must be positive", "pump.wavelength_nm");
}

const char* to_string(Regime regime) {
    switch (regime) {
    case Regime::below: return "below";
    case Regime::at: return "at";
    case Regime::above: return "above";
    }
    return "?";
}

OperatingPoint steady_state(const PumpDrive& pump, const Supermodes& s, const CavityParams& params) {
    pump.validate();
    if (s.size() == 0 || s.leading() == 0.0)
        throw PhysicsError("steady_state: leading supermode is uncoupled");

    const double gamma = params.gamma();
    const double lead = s.leading();
    const double clamp = gamma / std::abs(lead);
    const double r = pump.pump_parameter();
    const std::complex<double> phase = std::polar(1.0, pump.phase);

    OperatingPoint op;
    op.pump_parameter = r;
    op.drive_amplitude = r * clamp * phase;
    op.threshold_photon_flux =
        pump.threshold_power_ref * pump.wavelength / (constants::planck * constants::speed_of_light);
    // Manley-Rowe: converted flux 4 Phi_th (r - 1) equals half the emitted
    // signal+idler flux (2 gamma / tau) |A|^2.
    op.depletion_constant = 4.0 * op.threshold_photon_flux * params.round_trip_time / gamma;

    if (r > 1.0 + kRegimeTolerance) {
        op.regime = Regime::above;
        op.intracavity_pump_mean = clamp * phase;
        const double arg = pump.phase + (lead < 0.0 ? constants::pi : 0.0);
        op.oscillating_amplitude = std::polar(std::sqrt(op.depletion_constant * (r - 1.0)), 0.5 * arg);
    } else {
        op.regime = r >= 1.0 - kRegimeTolerance ? Regime::at : Regime::below;
        op.intracavity_pump_mean = op.drive_amplitude;
        op.oscillating_amplitude = 0.0;
    }
    return op;
}

double converted_pump_flux(const OperatingPoint& op) {
    const double clamp = op.pump_parameter > 0.0 ? std::abs(op.drive_amplitude) / op.pump_parameter : 0.0;
    if (clamp == 0.0)
        return 0.0;
    const std::complex<double> transmitted = 2.0 * op.intracavity_pump_mean - op.drive_amplitude;
    return op.threshold_photon_flux * (std::norm(op.drive_amplitude) - std::norm(transmitted)) / (clamp * clamp);
}

double signal_idler_flux(const OperatingPoint& op, const CavityParams& params) {
    return 2.0 * params.decay_rate() * std::norm(op.oscillating_amplitude);
}

double supermode_sigma(Eigen::Index k, const Supermodes& s, const OperatingPoint& op, const CavityParams& params) {
    if (k < 0 || k >= s.size())
        throw std::out_of_range("supermode index " + std::to_string(k + 1) + " out of range");
    return std::abs(s.eigenvalues(k) * op.intracavity_pump_mean) / params.gamma();
}

double squeezed_variance(double sigma, double eta, double x) { return 1.0 - eta * noise_reduction(sigma, x); }

double antisqueezed_variance(double sigma, double eta, double x) {
    return 1.0 + eta * 4.0 * sigma / ((1.0 - sigma) * (1.0 - sigma) + x * x);
}

SqueezingSpectrum quadrature_spectrum(Eigen::Index k, const Supermodes& s, const OperatingPoint& op,
                                      const CavityParams& params, double detection_efficiency,
                                      std::span<const double> frequencies) {
    if (!(detection_efficiency > 0.0 && detection_efficiency <= 1.0))
        throw ConfigError("detection efficiency must lie in (0, 1]", "detection.efficiency");
    if (op.regime == Regime::above && k == 0)
        throw PhysicsError("supermode 1 oscillates above threshold; its quantum noise is not modeled");

    double sigma = supermode_sigma(k, s, op, params);
    if (sigma > 1.0 + kRegimeTolerance)
        throw PhysicsError("inconsistent operating point: supermode " + std::to_string(k + 1) +
                           " is beyond its own threshold (sigma = " + std::to_string(sigma) + ")");
    sigma = std::min(sigma, 1.0);

    SqueezingSpectrum out;
    out.supermode_index = k;
    out.sigma = sigma;
    out.efficiency = params.escape_efficiency() * detection_efficiency;
    const std::complex<double> gain = s.eigenvalues(k) * op.intracavity_pump_mean;
    if (sigma > 0.0) {
        // squeezing axis is perpendicular to half the gain phase
        double angle = 0.5 * std::arg(gain) + 0.5 * constants::pi;
        angle = std::fmod(angle, constants::pi);
        if (angle < 0.0)
            angle += constants::pi;
        out.squeezed_quadrature_angle = angle;
    }

    const double scale = 2.0 * constants::pi / params.decay_rate();
    out.frequencies.assign(frequencies.begin(), frequencies.end());
    out.v_min.reserve(frequencies.size());
    out.v_max.reserve(frequencies.size());
    for (double f : frequencies) {
        const double x = scale * f;
        out.v_min.push_back(squeezed_variance(sigma, out.efficiency, x));
        out.v_max.push_back(antisqueezed_variance(sigma, out.efficiency, x));
    }
    return out;
}

double threshold_variance(Eigen::Index k, const Supermodes& s) {
    if (k < 0 || k >= s.size())
        throw std::out_of_range("supermode index out of range");
    const double lk = std::abs(s.eigenvalues(k));
    const double l1 = std::abs(s.leading());
    const double ratio = (lk - l1) / (lk + l1);
    return ratio * ratio;
}

std::vector<ClampingRow> clamping_scan(Eigen::Index k, std::span<const double> powers, const PumpDrive& pump,
                                       const Supermodes& s, const CavityParams& params,
                                       double detection_efficiency) {
    if (k == 0)
        throw PhysicsError("clamping_scan: supermode 1 oscillates above threshold");
    std::vector<ClampingRow> rows;
    const double zero[] = {0.0};
    for (double power : powers) {
        if (power < pump.threshold_power_ref * (1.0 - kRegimeTolerance))
            throw PhysicsError("clamping_scan: power " + std::to_string(power) + " W is below threshold");
        PumpDrive p = pump;
        p.power = power;
        const auto op = steady_state(p, s, params);
        const auto spectrum = quadrature_spectrum(k, s, op, params, detection_efficiency, zero);
        rows.push_back({power, std::abs(op.intracavity_pump_mean), spectrum.v_min.front()});
    }
    return rows;
}

SqueezingFit fit_squeezing_pair(double dominant_db, double secondary_db, double coupling_ratio,
                                double base_efficiency, double x) {
    if (!(dominant_db > 0.0 && secondary_db > 0.0))
        throw std::invalid_argument("fit_squeezing_pair: squeezing levels must be positive dB values");
    if (!(coupling_ratio > 0.0 && coupling_ratio < 1.0))
        throw std::invalid_argument("fit_squeezing_pair: coupling ratio must lie in (0, 1)");
    const double d1 = 1.0 - std::pow(10.0, -dominant_db / 10.0);
    const double d2 = 1.0 - std::pow(10.0, -secondary_db / 10.0);
    const double target = d2 / d1;
    auto ratio = [&](double r) { return noise_reduction(coupling_ratio * r, x) / noise_reduction(r, x); };

    double lo = 1e-9, hi = 1.0 - 1e-9;
    if ((ratio(lo) - target) * (ratio(hi) - target) > 0.0)
        throw PhysicsError("fit_squeezing_pair: no below-threshold pump level reproduces the dB ratio");
    const bool rising = ratio(hi) > ratio(lo);
    for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
        const double mid = 0.5 * (lo + hi);
        if ((ratio(mid) < target) == rising)
            lo = mid;
        else
            hi = mid;
    }
    SqueezingFit fit;
    fit.pump_parameter = 0.5 * (lo + hi);
    fit.total_efficiency = d1 / noise_reduction(fit.pump_parameter, x);
    fit.detection_efficiency = fit.total_efficiency / base_efficiency;
    if (!(fit.detection_efficiency > 0.0 && fit.detection_efficiency <= 1.0))
        throw PhysicsError("fit_squeezing_pair: fitted detection efficiency " +
                           std::to_string(fit.detection_efficiency) + " is outside (0, 1]");
    return fit;
}

} // namespace opo
