#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <span>
#include <vector>

#include "opo/dynamics.hpp"

namespace opo {

// One linearised supermode: parametric gain sigma in [0, 1) and the angle of
// its squeezed quadrature.
struct QuadratureProcess {
    double sigma = 0.0;
    double squeezed_angle = 0.0;
};

struct IntegrationSettings {
    double dt = 0.0;  // s
    std::size_t steps = 0;
    std::uint64_t seed = 0;
    std::uint64_t trajectory_index = 0;
};

/// tau / (50 gamma)
double default_time_step(const CavityParams& params);
/// tau / (10 gamma), the stability bound of the explicit integrator.
double max_time_step(const CavityParams& params);

// Intracavity and output quadratures (shot-noise units) of the simulated
// supermodes. Column j belongs to supermode `supermodes[j]` of a basis of
// `basis_size` supermodes. Intracavity quadratures are X = S + S^dagger
// (vacuum variance 1); output samples are white with unit variance for vacuum.
struct Trajectory {
    double dt = 0.0;
    std::size_t steps = 0;
    std::uint64_t rng_seed = 0;
    std::uint64_t trajectory_index = 0;
    Eigen::Index basis_size = 0;
    std::vector<Eigen::Index> supermodes;
    std::vector<QuadratureProcess> processes;
    double escape_efficiency = 1.0;
    Eigen::MatrixXd x, y;          // steps x modes
    Eigen::MatrixXd out_x, out_y;  // steps x modes
};

/// Euler-Maruyama integration of dq = -(gamma/tau)(1 -/+ sigma) q dt +
/// sqrt(2 gamma/tau) dW for both eigen-quadratures of each process. The
/// output field uses the input-output relation on the same noise increment
/// with the step-averaged intracavity field, then mixes in vacuum for the
/// escape efficiency. Deterministic given the settings.
Trajectory simulate_quadratures(std::span<const QuadratureProcess> processes, double decay_rate,
                                double escape_efficiency, const IntegrationSettings& settings);

/// Simulates the given supermodes (0-based) at an operating point.
Trajectory simulate_supermodes(std::span<const Eigen::Index> supermodes, const OperatingPoint& op,
                               const Supermodes& s, const CavityParams& params,
                               const IntegrationSettings& settings);

Trajectory simulate_trajectory(Eigen::Index k, const OperatingPoint& op, const Supermodes& s,
                               const CavityParams& params, const IntegrationSettings& settings);

struct LocalOscillator {
    Eigen::VectorXd mode;  // coefficients over the supermode basis, unit norm
    double phase = 0.0;    // rad, quadrature angle measured
    double power = 1e-3;   // W
    double bright_power = 0.0;  // W of bright emission reaching the diodes
    double visibility = 1.0;
    double detection_efficiency = 1.0;
};

/// detection_efficiency * visibility^2
double homodyne_efficiency(double detection_efficiency, double visibility);

struct HomodyneRecord {
    Eigen::VectorXd lo_mode;
    double lo_phase = 0.0;
    double lo_power = 0.0;
    double bright_power = 0.0;
    double efficiency = 1.0;  // homodyne part only
    double dt = 0.0;
    std::vector<double> samples;  // units of the LO-only shot noise
};

/// Photocurrent of a balanced homodyne detector: projection of the output
/// quadrature field on the LO mode at the LO phase, with detection loss and
/// the shot noise of any bright emission.
HomodyneRecord homodyne_record(const Trajectory& trajectory, const LocalOscillator& lo);

struct NoiseEstimate {
    std::vector<double> frequencies;     // Hz
    std::vector<double> psd;             // unit-variance white noise -> 1
    std::vector<double> standard_error;  // relative, per bin, including segment overlap
    std::size_t n_segments = 0;
    std::size_t segment_length = 0;
};

/// Averaged periodogram: Hann window, 50 % overlap, normalised so that
/// unit-variance white input gives 1 in every bin. Bins run from DC to
/// Nyquist. Requires at least two segment lengths of data.
NoiseEstimate estimate_psd(std::span<const double> samples, double dt, std::size_t segment_length);
NoiseEstimate estimate_psd(const HomodyneRecord& record, std::size_t segment_length);

/// Segment-weighted mean of estimates with identical bins.
NoiseEstimate average_estimates(std::span<const NoiseEstimate> estimates);

/// Factor by which the LO-only shot-noise level must be multiplied when the
/// detector also receives `bright_power`: (lo + bright) / lo.
double shot_noise_correction(double lo_power, double bright_power);

/// Renormalises an estimate to the corrected shot-noise level.
NoiseEstimate apply_shot_noise_correction(NoiseEstimate estimate, double correction);

/// Smallest power-of-two segment with at least `bins_per_width` bins across
/// the half width of the narrowest Lorentzian of `process`.
std::size_t recommended_segment_length(double sigma, double decay_rate, double dt, double bins_per_width = 5.0);

struct EnsembleSpec {
    std::vector<Eigen::Index> supermodes;
    LocalOscillator lo;
    IntegrationSettings settings;  // settings.trajectory_index is the first index
    std::size_t count = 1;
    std::size_t segment_length = 1024;
    unsigned threads = 0;  // 0: hardware concurrency
};

/// Runs `count` independent trajectories (indices first, first+1, ...),
/// estimates each record's PSD and averages them. The reduction order is
/// fixed, so the result does not depend on the thread count.
NoiseEstimate ensemble_psd(const EnsembleSpec& spec, const OperatingPoint& op, const Supermodes& s,
                           const CavityParams& params);

} // namespace opo
