#pragma once

namespace opo {

// Relative-phase error signal from the pump / frequency-doubled-seed
// interferometer.
struct LockScenario {
    double pump_intensity = 0.0;       // W
    double seed_intensity = 0.0;       // W
    double offset_phase = 0.0;         // rad, set by the doubling crystal position
    double doubling_efficiency = 0.0;  // 1/W, single pass
    double phase_noise = 0.0;          // rad, additive differential phase

    /// doubling_efficiency * seed_intensity^2
    double doubled_power() const noexcept { return doubling_efficiency * seed_intensity * seed_intensity; }
    void validate() const;
};

/// Interference term 2 sqrt(eta I_pump) I_seed cos(2 phi - phi0); pi-periodic.
double error_signal(const LockScenario& sc, double phase);

/// Seeded cavity gain (1 + sigma^2 + 2 sigma cos 2 phi) / (1 - sigma^2)^2,
/// between 1/(1+sigma)^2 and 1/(1-sigma)^2. Throws for sigma outside [0, 1).
double parametric_gain(double phase, double sigma);

enum class LockTarget { amplification, deamplification };

struct LockPoint {
    double phase = 0.0;           // rad in [0, pi)
    double discriminant_slope = 0.0;  // d/dphi of the lock discriminant at the crossing
    int feedback_sign = 1;        // servo sign that makes the crossing stable
};

/// Lock phase for the chosen gain extremum. The servo acts on the phase
/// derivative of s(phi), whose zero crossings sit on the extrema of s: the
/// maximum (phi0/2) for amplification, the minimum (phi0/2 + pi/2) for
/// deamplification.
LockPoint lock_point(const LockScenario& sc, LockTarget target);

} // namespace opo
