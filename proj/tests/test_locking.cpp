#include <doctest.h>

#include <cmath>
#include <random>

#include "opo/constants.hpp"
#include "opo/error.hpp"
#include "opo/locking.hpp"

using namespace opo;

namespace {

LockScenario scenario(double offset = 0.0) { return {1e-3, 30e-3, offset, 0.01, 0.0}; }

double derivative(const LockScenario& sc, double phi) {
    const double h = 1e-6;
    return (error_signal(sc, phi + h) - error_signal(sc, phi - h)) / (2 * h);
}

double wrap_distance(double a, double b) {
    const double d = std::fmod(std::abs(a - b), constants::pi);
    return std::min(d, constants::pi - d);
}

} // namespace

TEST_SUITE("locking") {

TEST_CASE("doubled power follows the single-pass quadratic law") {
    const auto sc = scenario();
    CHECK(sc.doubled_power() == doctest::Approx(0.01 * 30e-3 * 30e-3));
}

TEST_CASE("error signal amplitude and periodicity") {
    const auto sc = scenario(0.4);
    const double amplitude = 2 * std::sqrt(0.01 * 1e-3) * 30e-3;
    std::mt19937 gen(2);
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    for (int i = 0; i < 100; ++i) {
        const double phi = u(gen);
        CHECK(error_signal(sc, phi) == doctest::Approx(amplitude * std::cos(2 * phi - 0.4)).scale(amplitude));
        CHECK(error_signal(sc, phi + constants::pi) == doctest::Approx(error_signal(sc, phi)).scale(amplitude));
    }
}

TEST_CASE("error signal scales with sqrt(I_pump) * I_seed") {
    auto sc = scenario();
    const double base = error_signal(sc, 0.1);
    sc.pump_intensity *= 4;
    CHECK(error_signal(sc, 0.1) == doctest::Approx(2 * base));
    sc.seed_intensity *= 3;
    CHECK(error_signal(sc, 0.1) == doctest::Approx(6 * base));
}

TEST_CASE("parametric gain bounds and period") {
    for (double sigma : {0.0, 0.2, 0.5, 0.9}) {
        CHECK(parametric_gain(0.0, sigma) == doctest::Approx(1 / ((1 - sigma) * (1 - sigma))));
        CHECK(parametric_gain(constants::pi / 2, sigma) == doctest::Approx(1 / ((1 + sigma) * (1 + sigma))));
        for (double phi = 0; phi < 7; phi += 0.1) {
            const double g = parametric_gain(phi, sigma);
            CHECK(g >= 1 / ((1 + sigma) * (1 + sigma)) - 1e-12);
            CHECK(g <= 1 / ((1 - sigma) * (1 - sigma)) + 1e-12);
            CHECK(g == doctest::Approx(parametric_gain(phi + constants::pi, sigma)));
        }
    }
    CHECK(parametric_gain(1.0, 0.0) == 1.0);
    CHECK_THROWS_AS(parametric_gain(0.0, 1.0), PhysicsError);
    CHECK_THROWS_AS(parametric_gain(0.0, -0.1), PhysicsError);
}

TEST_CASE("lock points sit on the gain extrema for any offset") {
    for (double offset : {0.0, 0.3, 1.5, 2.9, -1.0}) {
        const auto sc = scenario(offset);
        const auto amp = lock_point(sc, LockTarget::amplification);
        const auto deamp = lock_point(sc, LockTarget::deamplification);
        CHECK(amp.phase >= 0.0);
        CHECK(amp.phase < constants::pi);
        CHECK(deamp.phase >= 0.0);
        CHECK(deamp.phase < constants::pi);
        // extrema of s: zero derivative
        CHECK(std::abs(derivative(sc, amp.phase)) < 1e-6);
        CHECK(std::abs(derivative(sc, deamp.phase)) < 1e-6);
        CHECK(error_signal(sc, amp.phase) > 0);
        CHECK(error_signal(sc, deamp.phase) < 0);
        CHECK(wrap_distance(deamp.phase, amp.phase) == doctest::Approx(constants::pi / 2));
        // relative to the pump, G follows cos(2 phi - phi0)
        CHECK(wrap_distance(amp.phase, offset / 2) < 1e-12);
    }
}

TEST_CASE("paper offset: deamplification at pi/2") {
    const auto sc = scenario(0.0);
    CHECK(lock_point(sc, LockTarget::deamplification).phase == doctest::Approx(constants::pi / 2));
    CHECK(lock_point(sc, LockTarget::amplification).phase == 0.0);
}

TEST_CASE("feedback sign makes the lock point attractive") {
    for (double offset : {0.0, 0.7, 2.0}) {
        const auto sc = scenario(offset);
        for (auto target : {LockTarget::amplification, LockTarget::deamplification}) {
            const auto lp = lock_point(sc, target);
            CHECK(lp.discriminant_slope * lp.feedback_sign < 0);
            for (double kick : {-0.3, 0.25}) {
                double phi = lp.phase + kick;
                const double gain = 0.1 / std::abs(lp.discriminant_slope);
                for (int step = 0; step < 2000; ++step)
                    phi += gain * lp.feedback_sign * derivative(sc, phi);
                CHECK(wrap_distance(phi, lp.phase) < 1e-6);
            }
        }
    }
}

TEST_CASE("differential phase noise moves the lock point") {
    auto sc = scenario(0.0);
    sc.phase_noise = 0.2;
    const auto lp = lock_point(sc, LockTarget::amplification);
    CHECK(std::abs(derivative(sc, lp.phase)) < 1e-6);
    CHECK(wrap_distance(lp.phase, -0.1) < 1e-12);
}

TEST_CASE("negative intensities are rejected") {
    auto sc = scenario();
    sc.seed_intensity = -1;
    CHECK_THROWS(error_signal(sc, 0.0));
    CHECK_THROWS(lock_point(sc, LockTarget::amplification));
}

}
