#pragma once

#include <complex>
#include <optional>
#include <span>
#include <vector>

#include "opo/coupling.hpp"
#include "opo/hg_modes.hpp"

namespace opo {

using Supermodes = SupermodeSet<double>;

struct CavityParams {
    double round_trip_time = 0.0;              // tau, s
    double input_coupler_transmission = 0.0;   // fraction
    double output_coupler_transmission = 0.0;  // fraction
    double intracavity_loss = 0.0;             // fraction per round trip

    /// Amplitude loss gamma: half the total round-trip intensity loss.
    double gamma() const noexcept {
        return 0.5 * (input_coupler_transmission + output_coupler_transmission + intracavity_loss);
    }
    /// Field decay rate gamma / tau in 1/s.
    double decay_rate() const noexcept { return gamma() / round_trip_time; }
    double escape_efficiency() const noexcept { return output_coupler_transmission / (2.0 * gamma()); }

    /// Checks fractions and round-trip time; when `finesse` is given the
    /// derived finesse must agree with it within 2 %.
    void validate(std::optional<double> finesse = std::nullopt) const;

    static CavityParams from_geometry(const CavityGeometry& geometry, double input_transmission,
                                      double output_transmission, double loss);
    bool operator==(const CavityParams&) const = default;
};

struct CavityFigures {
    double finesse = 0.0;
    double escape_efficiency = 0.0;
    double bandwidth_fwhm = 0.0;  // Hz
};

CavityFigures derive_cavity_figures(const CavityParams& params);

struct PumpDrive {
    double power = 0.0;                // W
    double phase = 0.0;                // rad
    double threshold_power_ref = 0.0;  // W, threshold of supermode 1
    double wavelength = 532e-9;        // m

    /// r = sqrt(power / threshold_power_ref)
    double pump_parameter() const;
    void validate() const;
};

enum class Regime { below, at, above };

const char* to_string(Regime regime);

// Mean-field steady state. The pump is single-pass: the intracavity pump mean
// is the average of the incident and transmitted pump amplitudes, in the
// units of gamma/Lambda_1 used by the coupling equations. The oscillating
// amplitude is normalised to the intracavity photon number of supermode 1.
struct OperatingPoint {
    Regime regime = Regime::below;
    double pump_parameter = 0.0;               // r
    std::complex<double> drive_amplitude;      // incident pump, same units as the mean
    std::complex<double> intracavity_pump_mean;
    std::complex<double> oscillating_amplitude;
    double threshold_photon_flux = 0.0;        // pump photons/s at threshold
    double depletion_constant = 0.0;           // kappa: |A|^2 = kappa (r - 1)
};

/// Closed-form steady state: pump mean proportional to r below threshold,
/// clamped at gamma/|Lambda_1| above it with |A|^2 = kappa (r - 1).
OperatingPoint steady_state(const PumpDrive& pump, const Supermodes& s, const CavityParams& params);

/// Pump photon flux removed by down-conversion (photons/s).
double converted_pump_flux(const OperatingPoint& op);
/// Signal plus idler photon flux leaving the cavity through all loss channels.
double signal_idler_flux(const OperatingPoint& op, const CavityParams& params);

/// Normalised parametric gain sigma_k = |Lambda_k * pump_mean| / gamma.
double supermode_sigma(Eigen::Index k, const Supermodes& s, const OperatingPoint& op, const CavityParams& params);

/// Squeezed/anti-squeezed quadrature variance at normalised frequency
/// x = Omega tau / gamma with overall detection efficiency eta.
double squeezed_variance(double sigma, double eta, double x);
double antisqueezed_variance(double sigma, double eta, double x);

struct SqueezingSpectrum {
    Eigen::Index supermode_index = 0;
    std::vector<double> frequencies;  // Hz
    std::vector<double> v_min;
    std::vector<double> v_max;
    double squeezed_quadrature_angle = 0.0;  // rad, in [0, pi)
    double sigma = 0.0;
    double efficiency = 0.0;
};

/// Output quadrature noise spectra of supermode k (0-based) from the
/// linearised Langevin equations. The detected efficiency is
/// escape_efficiency * detection_efficiency. Throws PhysicsError for
/// supermode 0 above threshold and when sigma_k exceeds one.
SqueezingSpectrum quadrature_spectrum(Eigen::Index k, const Supermodes& s, const OperatingPoint& op,
                                      const CavityParams& params, double detection_efficiency,
                                      std::span<const double> frequencies);

/// Zero-frequency squeezed variance at threshold for unit efficiency:
/// ((|Lk| - |L1|) / (|Lk| + |L1|))^2.
double threshold_variance(Eigen::Index k, const Supermodes& s);

struct ClampingRow {
    double power = 0.0;           // W
    double pump_mean_abs = 0.0;   // |intracavity pump mean|
    double v_min = 0.0;           // zero-frequency squeezed variance
};

std::vector<ClampingRow> clamping_scan(Eigen::Index k, std::span<const double> powers, const PumpDrive& pump,
                                       const Supermodes& s, const CavityParams& params,
                                       double detection_efficiency);

// Joint fit of a below-threshold pump parameter r and a detection efficiency
// reproducing two measured squeezing levels (dB, positive numbers) on the
// dominant supermode and on a supermode coupled `coupling_ratio` times
// weaker, at normalised analysis frequency x.
struct SqueezingFit {
    double pump_parameter = 0.0;
    double detection_efficiency = 0.0;  // fitted scalar on top of base_efficiency
    double total_efficiency = 0.0;
};

SqueezingFit fit_squeezing_pair(double dominant_db, double secondary_db, double coupling_ratio,
                                double base_efficiency, double x = 0.0);

inline double to_db(double variance) { return 10.0 * std::log10(variance); }

} // namespace opo
