#include <doctest.h>

#include <cmath>
#include <random>

#include "opo/constants.hpp"
#include "opo/error.hpp"
#include "opo/hg_modes.hpp"

using namespace opo;

namespace {

HGMode mode(int m, int n, double waist, double wavelength = 1064e-9) {
    HGMode out;
    out.m = m;
    out.n = n;
    out.geometry.wavelength = wavelength;
    out.geometry.waist_radius = waist;
    return out;
}

// Closed-form 1-D overlap of three Gaussians carrying polynomial weights
// from the orders 0 and 1 only: int x^(2j) exp(-a x^2) dx.
double gaussian_moment(int power, double a) {
    if (power % 2)
        return 0.0;
    return std::tgamma(0.5 * (power + 1)) / std::pow(a, 0.5 * (power + 1));
}

double norm_1d(double w) { return std::pow(2.0 / constants::pi, 0.25) / std::sqrt(w); }

// u_0 = N e^{-x^2/w^2}, u_1 = N (2x/w) e^{-x^2/w^2}
double oracle_1d(int ms, int mi, double wp, double ws, double wi) {
    const double a = 1.0 / (wp * wp) + 1.0 / (ws * ws) + 1.0 / (wi * wi);
    const double coeff = (ms ? 2.0 / ws : 1.0) * (mi ? 2.0 / wi : 1.0);
    return norm_1d(wp) * norm_1d(ws) * norm_1d(wi) * coeff * gaussian_moment(ms + mi, a);
}

} // namespace

TEST_SUITE("hg_modes") {

TEST_CASE("1-D functions are orthonormal") {
    const double w = 50e-6;
    for (int a = 0; a <= 8; ++a) {
        for (int b = 0; b <= 8; ++b) {
            HGMode ma = mode(a, 0, w), mb = mode(b, 0, w);
            const double value = overlap2(ma, mb);
            CHECK(value == doctest::Approx(a == b ? 1.0 : 0.0).epsilon(1e-10));
        }
    }
}

TEST_CASE("mode norm is one for 2-D modes up to order 10") {
    for (int m = 0; m <= 5; ++m)
        for (int n = 0; n <= 5; ++n)
            CHECK(mode_norm(mode(m, n, 73e-6)) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("hermite-gauss 1-D values match the explicit low orders") {
    const double w = 1.3;
    for (double x : {-1.7, -0.4, 0.0, 0.3, 2.1}) {
        const double g = norm_1d(w) * std::exp(-x * x / (w * w));
        const double t = std::sqrt(2.0) * x / w;
        CHECK(hermite_gauss_1d(0, x, w) == doctest::Approx(g));
        CHECK(hermite_gauss_1d(1, x, w) == doctest::Approx(g * std::sqrt(2.0) * t));
        CHECK(hermite_gauss_1d(2, x, w) == doctest::Approx(g * (4 * t * t - 2) / std::sqrt(8.0)));
        CHECK(hermite_gauss_1d(3, x, w) == doctest::Approx(g * (8 * t * t * t - 12 * t) / std::sqrt(48.0)));
    }
}

TEST_CASE("three-mode overlap matches gaussian moments") {
    const double ws = 63e-6;
    for (double rho : {0.3, 0.5, 1.0 / std::sqrt(2.0), 0.9, 1.4}) {
        const double wp = rho * ws;
        for (int ms : {0, 1})
            for (int mi : {0, 1})
                for (int ns : {0, 1})
                    for (int ni : {0, 1}) {
                        const double expected = oracle_1d(ms, mi, wp, ws, ws) * oracle_1d(ns, ni, wp, ws, ws);
                        const double got = overlap3(mode(0, 0, wp, 532e-9), mode(ms, ns, ws), mode(mi, ni, ws));
                        CHECK(got == doctest::Approx(expected).epsilon(1e-9).scale(1e-9 * std::abs(
                                                                      oracle_1d(0, 0, wp, ws, ws) *
                                                                      oracle_1d(0, 0, wp, ws, ws))));
                    }
    }
}

TEST_CASE("TEM10 pair ratio follows the closed form") {
    const double ws = 60e-6;
    for (double rho : {0.4, 1.0 / std::sqrt(2.0), 0.9428, 1.2}) {
        const HGMode p = mode(0, 0, rho * ws, 532e-9);
        const double ratio = overlap3(p, mode(1, 0, ws), mode(1, 0, ws)) / overlap3(p, mode(0, 0, ws), mode(0, 0, ws));
        CHECK(ratio == doctest::Approx(2 * rho * rho / (1 + 2 * rho * rho)).epsilon(1e-9));
    }
}

TEST_CASE("odd total parity gives an exact zero") {
    const HGMode p = mode(0, 0, 40e-6, 532e-9);
    CHECK(overlap3(p, mode(1, 0, 60e-6), mode(0, 0, 60e-6)) == 0.0);
    CHECK(overlap3(p, mode(2, 1, 60e-6), mode(1, 1, 60e-6)) == 0.0);
    CHECK(overlap3(mode(1, 0, 40e-6, 532e-9), mode(1, 1, 60e-6), mode(1, 0, 60e-6)) == 0.0);
}

TEST_CASE("overlap is symmetric under signal/idler exchange") {
    std::mt19937 gen(7);
    std::uniform_int_distribution<int> order(0, 4);
    std::uniform_real_distribution<double> waist(30e-6, 90e-6);
    for (int trial = 0; trial < 50; ++trial) {
        const HGMode p = mode(order(gen), order(gen), waist(gen), 532e-9);
        const HGMode s = mode(order(gen), order(gen), waist(gen));
        const HGMode i = mode(order(gen), order(gen), waist(gen));
        CHECK(overlap3(p, s, i) == overlap3(p, i, s));
    }
}

TEST_CASE("overlap scales as the inverse waist") {
    const HGMode p = mode(0, 0, 45e-6, 532e-9);
    const HGMode s = mode(2, 0, 60e-6), i = mode(0, 2, 60e-6);
    const double base = overlap3(p, s, i);
    HGMode p2 = p, s2 = s, i2 = i;
    p2.geometry.waist_radius *= 3;
    s2.geometry.waist_radius *= 3;
    i2.geometry.waist_radius *= 3;
    CHECK(overlap3(p2, s2, i2) == doctest::Approx(base / 3).epsilon(1e-10));
}

TEST_CASE("mismatched waist planes are rejected") {
    HGMode p = mode(0, 0, 40e-6, 532e-9);
    p.geometry.waist_position = 1e-3;
    CHECK_THROWS_AS(overlap3(p, mode(0, 0, 60e-6), mode(0, 0, 60e-6)), std::invalid_argument);
}

TEST_CASE("invalid modes are rejected") {
    CHECK_THROWS(mode(-1, 0, 60e-6).validate());
    CHECK_THROWS(mode(0, 0, 0.0).validate());
    CHECK_THROWS(mode(0, 0, 60e-6, -1.0).validate());
}

TEST_CASE("plano-concave cavity geometry") {
    CavityGeometry c;
    const double L = c.length, R = c.mirror_radius_of_curvature;
    CHECK(free_spectral_range(c) == doctest::Approx(constants::speed_of_light / (2 * L)));
    CHECK(one_way_gouy_phase(c) == doctest::Approx(std::acos(std::sqrt(1 - L / R))));
    const double zr = std::sqrt(L * (R - L));
    CHECK(cavity_rayleigh_range(c) == doctest::Approx(zr));
    CHECK(cavity_waist(c, 1064e-9) == doctest::Approx(std::sqrt(1064e-9 * zr / constants::pi)));

    // the spot on the curved mirror must match its radius of curvature:
    // R(z=L) = L (1 + (zR/L)^2)
    CHECK(L * (1 + zr * zr / (L * L)) == doctest::Approx(R));

    CavityGeometry unstable{0.06, 0.05};
    CHECK_THROWS_AS(unstable.validate(), PhysicsError);
    CHECK_THROWS_AS(free_spectral_range(unstable), PhysicsError);
}

TEST_CASE("transverse resonances are spaced by the Gouy phase") {
    CavityGeometry c;
    const auto res = gouy_resonance_frequencies(c, 3, 100, 2);
    const double fsr = free_spectral_range(c), gouy = one_way_gouy_phase(c);
    REQUIRE(res.size() == 8);
    for (const auto& r : res)
        CHECK(r.frequency == doctest::Approx(fsr * (r.q + (r.order + 1) * gouy / constants::pi)));
    // same q: adjacent orders differ by FSR * gouy / pi
    CHECK(res[1].frequency - res[0].frequency == doctest::Approx(fsr * gouy / constants::pi));
}

TEST_CASE("Gouy wavevector offset of a crystal at the waist") {
    CavityGeometry c;
    const double zr = cavity_rayleigh_range(c);
    const double n = 1.83, lc = 10e-3;
    CHECK(gouy_wavevector_offset(c, lc, n, 0) == 0.0);
    CHECK(gouy_wavevector_offset(c, lc, n, 2) == doctest::Approx(2 * std::atan(lc / (n * zr)) / lc));
    CHECK(gouy_wavevector_offset(c, lc, n, -2) == doctest::Approx(-gouy_wavevector_offset(c, lc, n, 2)));
}

TEST_CASE("path asymmetry splits the transverse resonances") {
    CavityGeometry c;
    CHECK(transverse_split_frequency(c, 0.0, 1064e-9) == 0.0);
    const double nu = constants::speed_of_light / 1064e-9;
    const double dl = 10e-9;
    CHECK(transverse_split_frequency(c, dl, 1064e-9) ==
          doctest::Approx(nu * dl / c.round_trip_path()).epsilon(1e-9));
}

}
