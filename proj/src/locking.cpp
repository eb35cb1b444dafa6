#include "opo/locking.hpp"

#include <cmath>
#include <stdexcept>

#include "opo/constants.hpp"
#include "opo/error.hpp"

namespace opo {

namespace {

double reduce_half_turn(double phase) {
    double r = std::fmod(phase, constants::pi);
    if (r < 0.0)
        r += constants::pi;
    return r;
}

} // namespace

void LockScenario::validate() const {
    if (!(pump_intensity >= 0.0))
        throw ConfigError("pump intensity must be non-negative", "lock.pump_power_mw");
    if (!(seed_intensity >= 0.0))
        throw ConfigError("seed intensity must be non-negative", "lock.seed_power_mw");
    if (!(doubling_efficiency >= 0.0))
        throw ConfigError("doubling efficiency must be non-negative", "lock.doubling_efficiency_per_w");
}

double error_signal(const LockScenario& sc, double phase) {
    sc.validate();
    const double amplitude = 2.0 * std::sqrt(sc.doubling_efficiency * sc.pump_intensity) * sc.seed_intensity;
    return amplitude * std::cos(2.0 * reduce_half_turn(phase) - sc.offset_phase + sc.phase_noise);
}

double parametric_gain(double phase, double sigma) {
    if (!(sigma >= 0.0 && sigma < 1.0))
        throw PhysicsError("parametric_gain: sigma must lie in [0, 1)");
    const double denom = 1.0 - sigma * sigma;
    return (1.0 + sigma * sigma + 2.0 * sigma * std::cos(2.0 * reduce_half_turn(phase))) / (denom * denom);
}

LockPoint lock_point(const LockScenario& sc, LockTarget target) {
    sc.validate();
    const double amplitude = 2.0 * std::sqrt(sc.doubling_efficiency * sc.pump_intensity) * sc.seed_intensity;
    const double shift = target == LockTarget::amplification ? 0.0 : 0.5 * constants::pi;
    LockPoint lp;
    lp.phase = reduce_half_turn(0.5 * (sc.offset_phase - sc.phase_noise) + shift);
    // discriminant D = ds/dphi = -2 A sin(2 phi - phi0); dD/dphi = -4 A cos(2 phi - phi0)
    lp.discriminant_slope = -4.0 * amplitude * std::cos(2.0 * lp.phase - sc.offset_phase + sc.phase_noise);
    lp.feedback_sign = lp.discriminant_slope < 0.0 ? 1 : -1;
    return lp;
}

} // namespace opo
