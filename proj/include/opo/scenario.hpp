#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <vector>

#include "opo/coupling.hpp"
#include "opo/dynamics.hpp"
#include "opo/locking.hpp"
#include "opo/phasematch.hpp"

namespace opo {

struct ModeSpec {
    int m = 0;
    int n = 0;
    double frequency_offset_hz = 0.0;
    bool operator==(const ModeSpec&) const = default;
};

// Everything a CLI run needs. Units are part of the key names in the file
// ("[cavity] length_mm = 47"); this struct stores the values as written.
struct Scenario {
    // [cavity]
    double cavity_length_mm = 47.0;
    double mirror_roc_mm = 50.0;
    double input_transmission = 0.002;
    double output_transmission = 0.017;
    double intracavity_loss = 0.002;
    std::optional<double> finesse;

    // [basis]
    double signal_wavelength_nm = 1064.0;
    std::optional<double> signal_waist_um;  // default: cavity eigenmode waist
    double pump_waist_ratio = 1.0 / 1.4142135623730951;
    std::vector<ModeSpec> modes;

    // [pump]
    double pump_power_mw = 0.0;
    double pump_phase_rad = 0.0;
    double threshold_mw = 250.0;
    std::optional<double> secondary_threshold_mw;  // measured, compared against the coupling prediction
    double pump_wavelength_nm = 532.0;

    // [detection]
    double detection_efficiency = 1.0;
    double visibility = 1.0;
    double lo_power_mw = 10.0;
    double bright_power_mw = 0.0;

    // [phasematch]
    std::string coefficients = "ktp_z.coeffs";
    double nominal_temperature_k = 313.15;
    double crystal_temperature_k = 313.15;
    double crystal_length_mm = 10.0;
    std::optional<double> poling_period_um;  // default: calibrated at the nominal temperature
    int transverse_order_difference = 2;
    double path_asymmetry_nm = 0.0;
    double search_min_nm = 950.0;

    // [lock]
    double lock_pump_power_mw = 1.0;
    double lock_seed_power_mw = 30.0;
    double lock_offset_phase_rad = 0.0;
    double doubling_efficiency_per_w = 0.01;
    double lock_phase_noise_rad = 0.0;
    double lock_sigma = 0.5;

    // [sweep]
    double freq_start_hz = 0.0;
    double freq_stop_hz = 30e6;
    std::size_t freq_points = 61;
    std::vector<double> power_factors{0.5, 1.0, 1.5, 2.0};
    double phase_start_rad = 0.0;
    double phase_stop_rad = 3.141592653589793;
    std::size_t phase_points = 181;
    double temperature_span_k = 1.0;
    std::size_t temperature_points = 21;

    // [sde]
    double dt_divisor = 50.0;  // dt = tau / (dt_divisor * gamma)
    std::size_t segment_length = 4096;
    std::size_t ensemble = 1;
    std::uint64_t seed = 1;
    std::string quadrature = "squeezed";  // or "antisqueezed"

    bool operator==(const Scenario&) const = default;

    /// Throws ConfigError naming the offending key.
    void validate() const;

    CavityGeometry cavity_geometry() const;
    CavityParams cavity_params() const;
    ModeBasis basis() const;
    PumpDrive pump() const;
    LockScenario lock() const;
    std::vector<double> frequency_grid() const;
    std::vector<double> phase_grid() const;
};

/// Parses the sectioned key-value format. Unknown sections or keys, missing
/// basis.modes and malformed values raise ConfigError with the key path.
Scenario parse_scenario(std::istream& in);
Scenario load_scenario(const std::filesystem::path& path);

/// Canonical text form; parse_scenario(serialize_scenario(s)) == s.
std::string serialize_scenario(const Scenario& scenario);

/// Locale-independent shortest round-trip formatting.
std::string format_number(double value);

} // namespace opo
