#include "opo/hg_modes.hpp"

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

#include "opo/constants.hpp"
#include "opo/error.hpp"
#include "opo/quadrature.hpp"

namespace opo {

namespace {

constexpr std::size_t kFirstOrder = 32;
constexpr std::size_t kMaxOrder = 1024;
constexpr double kConvergence = 1e-9;
constexpr double kRoundoff = 1e-14;

const std::vector<GaussHermiteRule<double>>& rules() {
    static const std::vector<GaussHermiteRule<double>> cache = [] {
        std::vector<GaussHermiteRule<double>> r;
        for (std::size_t order = kFirstOrder; order <= kMaxOrder; order *= 2)
            r.push_back(gauss_hermite_rule<double>(order));
        return r;
    }();
    return cache;
}

// h_m(t) = H_m(t) / sqrt(2^m m!)
double normalized_hermite(int order, double t) {
    double h0 = 1.0;
    if (order == 0)
        return h0;
    double h1 = std::sqrt(2.0) * t;
    for (int j = 2; j <= order; ++j) {
        const double h2 = std::sqrt(2.0 / j) * t * h1 - std::sqrt((j - 1.0) / j) * h0;
        h0 = h1;
        h1 = h2;
    }
    return h1;
}

double prefactor(double waist) { return std::pow(2.0 / constants::pi, 0.25) / std::sqrt(waist); }

struct Factor {
    int order;
    double waist;
};

// Integral over x of the product of the 1-D functions, or of its modulus
// when `magnitude` is set. The idler/signal pair (b, c) is multiplied first
// so the result is symmetric under b <-> c.
double product_1d(const GaussHermiteRule<double>& rule, Factor a, Factor b, Factor c, bool magnitude = false) {
    const double inv2 = 1.0 / (a.waist * a.waist) + (1.0 / (b.waist * b.waist) + 1.0 / (c.waist * c.waist));
    const double root = std::sqrt(inv2);
    const double sa = std::sqrt(2.0) / (root * a.waist);
    const double sb = std::sqrt(2.0) / (root * b.waist);
    const double sc = std::sqrt(2.0) / (root * c.waist);
    const double sum = rule.integrate([&](double t) {
        const double v = normalized_hermite(a.order, sa * t) *
                         (normalized_hermite(b.order, sb * t) * normalized_hermite(c.order, sc * t));
        return magnitude ? std::abs(v) : v;
    });
    return prefactor(a.waist) * (prefactor(b.waist) * prefactor(c.waist)) * sum / root;
}

double product_1d(const GaussHermiteRule<double>& rule, Factor a, Factor b, bool magnitude = false) {
    const double inv2 = 1.0 / (a.waist * a.waist) + 1.0 / (b.waist * b.waist);
    const double root = std::sqrt(inv2);
    const double sa = std::sqrt(2.0) / (root * a.waist);
    const double sb = std::sqrt(2.0) / (root * b.waist);
    const double sum = rule.integrate([&](double t) {
        const double v = normalized_hermite(a.order, sa * t) * normalized_hermite(b.order, sb * t);
        return magnitude ? std::abs(v) : v;
    });
    return prefactor(a.waist) * prefactor(b.waist) * sum / root;
}

// `eval(rule, magnitude)` integrates the product or its modulus. Orders
// double until successive values agree to kConvergence relative, or to
// roundoff of the modulus integral when the product cancels to ~0.
template <typename Eval>
double escalate(Eval&& eval, const char* what) {
    const auto& all = rules();
    double previous = eval(all[0], false);
    for (std::size_t i = 1; i < all.size(); ++i) {
        const double current = eval(all[i], false);
        const double diff = std::abs(current - previous);
        if (diff <= kConvergence * std::max(std::abs(current), std::abs(previous)) ||
            diff <= kRoundoff * eval(all[i], true))
            return current;
        previous = current;
    }
    throw PhysicsError(std::string(what) + ": quadrature did not converge up to order " +
                       std::to_string(kMaxOrder));
}

void require_common_waist_plane(const HGMode& a, const HGMode& b) {
    if (a.geometry.waist_position != b.geometry.waist_position)
        throw std::invalid_argument("overlap: modes must share the same waist position");
}

} // namespace

void BeamGeometry::validate() const {
    if (!(wavelength > 0.0))
        throw ConfigError("wavelength must be positive");
    if (!(waist_radius > 0.0))
        throw ConfigError("waist radius must be positive");
}

void HGMode::validate() const {
    if (m < 0 || n < 0)
        throw ConfigError("Hermite-Gauss indices must be non-negative");
    geometry.validate();
}

void CavityGeometry::validate() const {
    if (!(length > 0.0) || !(length < mirror_radius_of_curvature))
        throw PhysicsError("cavity outside stability range");
}

double hermite_gauss_1d(int order, double x, double waist) {
    const double t = std::sqrt(2.0) * x / waist;
    return prefactor(waist) * normalized_hermite(order, t) * std::exp(-x * x / (waist * waist));
}

double evaluate_mode(const HGMode& mode, double x, double y) {
    const double w = mode.geometry.waist_radius;
    return hermite_gauss_1d(mode.m, x, w) * hermite_gauss_1d(mode.n, y, w);
}

double mode_norm(const HGMode& mode) { return overlap2(mode, mode); }

double overlap2(const HGMode& a, const HGMode& b) {
    require_common_waist_plane(a, b);
    const double wa = a.geometry.waist_radius, wb = b.geometry.waist_radius;
    return escalate(
        [&](const GaussHermiteRule<double>& rule, bool magnitude) {
            return product_1d(rule, {a.m, wa}, {b.m, wb}, magnitude) *
                   product_1d(rule, {a.n, wa}, {b.n, wb}, magnitude);
        },
        "overlap2");
}

double overlap3(const HGMode& pump, const HGMode& signal, const HGMode& idler) {
    require_common_waist_plane(pump, signal);
    require_common_waist_plane(pump, idler);
    const double wp = pump.geometry.waist_radius;
    const double ws = signal.geometry.waist_radius;
    const double wi = idler.geometry.waist_radius;
    return escalate(
        [&](const GaussHermiteRule<double>& rule, bool magnitude) {
            return product_1d(rule, {pump.m, wp}, {signal.m, ws}, {idler.m, wi}, magnitude) *
                   product_1d(rule, {pump.n, wp}, {signal.n, ws}, {idler.n, wi}, magnitude);
        },
        "overlap3");
}

double free_spectral_range(const CavityGeometry& cavity) {
    cavity.validate();
    return constants::speed_of_light / cavity.round_trip_path();
}

double one_way_gouy_phase(const CavityGeometry& cavity) {
    cavity.validate();
    // plane mirror g1 = 1, curved mirror g2 = 1 - L/R
    return std::acos(std::sqrt(1.0 - cavity.length / cavity.mirror_radius_of_curvature));
}

double cavity_rayleigh_range(const CavityGeometry& cavity) {
    cavity.validate();
    return std::sqrt(cavity.length * (cavity.mirror_radius_of_curvature - cavity.length));
}

double cavity_waist(const CavityGeometry& cavity, double wavelength) {
    return std::sqrt(wavelength * cavity_rayleigh_range(cavity) / constants::pi);
}

std::vector<Resonance> gouy_resonance_frequencies(const CavityGeometry& cavity, int max_order, long q_first,
                                                  std::size_t q_count) {
    if (max_order < 0)
        throw std::invalid_argument("gouy_resonance_frequencies: max_order must be non-negative");
    const double fsr = free_spectral_range(cavity);
    const double gouy = one_way_gouy_phase(cavity);
    std::vector<Resonance> out;
    out.reserve(q_count * static_cast<std::size_t>(max_order + 1));
    for (std::size_t i = 0; i < q_count; ++i) {
        const long q = q_first + static_cast<long>(i);
        for (int order = 0; order <= max_order; ++order)
            out.push_back({q, order, fsr * (static_cast<double>(q) + (order + 1) * gouy / constants::pi)});
    }
    return out;
}

double gouy_wavevector_offset(const CavityGeometry& cavity, double crystal_length, double index,
                              int order_difference) {
    if (!(crystal_length > 0.0) || !(index > 0.0))
        throw std::invalid_argument("gouy_wavevector_offset: crystal length and index must be positive");
    const double zr = index * cavity_rayleigh_range(cavity);
    return order_difference * std::atan(crystal_length / zr) / crystal_length;
}

double transverse_split_frequency(const CavityGeometry& cavity, double path_difference, double wavelength) {
    cavity.validate();
    return constants::speed_of_light / wavelength * path_difference / cavity.round_trip_path();
}

} // namespace opo
