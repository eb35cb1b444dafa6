#pragma once

#include <array>
#include <filesystem>
#include <istream>
#include <span>
#include <string>
#include <vector>

namespace opo {

// Two-pole Sellmeier equation with an infrared correction term and a linear
// thermo-optic correction. Coefficients use micrometres, as published.
struct SellmeierModel {
    std::string name;
    double a = 0, b1 = 0, c1 = 0, b2 = 0, c2 = 0, d = 0;
    std::array<double, 4> thermo{};       // dn/dT = sum t_m / lambda^m
    double reference_temperature = 298.15;  // K
    double wavelength_min = 0, wavelength_max = 0;    // m
    double temperature_min = 0, temperature_max = 0;  // K

    double thermo_optic_coefficient(double wavelength) const;
};

/// Reads `key = value` lines ('#' starts a comment). Required keys: A, B1, C1,
/// B2, C2, D, t0..t3, reference_temperature_k, wavelength_min_um,
/// wavelength_max_um, temperature_min_k, temperature_max_k; optional: name.
SellmeierModel parse_sellmeier(std::istream& in);
SellmeierModel load_sellmeier(const std::filesystem::path& path);

/// n(lambda, T). Throws std::out_of_range naming the violated bound.
double refractive_index(const SellmeierModel& model, double wavelength, double temperature);

struct PolingSpec {
    double poling_period = 0.0;      // m
    double crystal_length = 10e-3;   // m
    double temperature = 298.15;     // K
};

/// Period that phase-matches pump -> 2 x degenerate at `temperature`.
double calibrate_poling_period(const SellmeierModel& model, double pump_wavelength, double temperature);

/// Delta k = 2 pi (n_p/l_p - n_s/l_s - n_i/l_i) - 2 pi / period + gouy_correction.
/// Requires 1/l_s + 1/l_i = 1/l_p within 1e-6 relative.
double qpm_mismatch(const SellmeierModel& model, const PolingSpec& poling, double pump_wavelength,
                    double signal_wavelength, double idler_wavelength, double gouy_correction = 0.0);

/// Idler wavelength fixed by energy conservation.
double idler_wavelength(double pump_wavelength, double signal_wavelength);

struct PhaseMatchConstraints {
    double pump_wavelength = 532e-9;  // m
    double gouy_correction = 0.0;     // rad/m
    double search_min = 950e-9;       // shortest signal wavelength considered
};

struct SignalIdlerPair {
    double signal = 0.0;  // m, signal < idler
    double idler = 0.0;
    double mismatch = 0.0;  // residual rad/m
};

/// Bisection on the signal wavelength between search_min and degeneracy
/// until |Delta k| < 1e-3 rad/m. Returns the degenerate pair when it is
/// already phase matched. Throws PhysicsError "no phase-matched pair in range".
SignalIdlerPair solve_signal_idler(const SellmeierModel& model, const PolingSpec& poling,
                                   const PhaseMatchConstraints& constraints);

/// Crystal temperature at which the degenerate pair is phase matched.
double degeneracy_temperature(const SellmeierModel& model, const PolingSpec& poling, double pump_wavelength);

// Temperatures without a phase-matched pair in range carry NaN wavelengths.
struct TuningPoint {
    double temperature = 0.0;
    double signal = 0.0;
    double idler = 0.0;
};

std::vector<TuningPoint> tuning_curve(const SellmeierModel& model, PolingSpec poling,
                                      const PhaseMatchConstraints& constraints,
                                      std::span<const double> temperatures);

} // namespace opo
