#pragma once

#include <cstddef>
#include <vector>

namespace opo {

struct BeamGeometry {
    double wavelength = 1064e-9;  // m
    double waist_radius = 60e-6;  // m, 1/e^2 intensity radius
    double waist_position = 0.0;  // m along the axis

    void validate() const;
    bool operator==(const BeamGeometry&) const = default;
};

// Hermite-Gauss TEM_mn. frequency_offset is relative to the reference
// carrier (half the pump frequency for signal modes).
struct HGMode {
    int m = 0;
    int n = 0;
    BeamGeometry geometry;
    double frequency_offset = 0.0;  // Hz

    int order() const noexcept { return m + n; }
    void validate() const;
    bool operator==(const HGMode&) const = default;
};

// Plano-concave linear cavity.
struct CavityGeometry {
    double length = 0.047;                      // m
    double mirror_radius_of_curvature = 0.050;  // m

    double round_trip_path() const noexcept { return 2.0 * length; }
    void validate() const;  // throws PhysicsError outside 0 < L < R
    bool operator==(const CavityGeometry&) const = default;
};

/// L2-normalised 1-D Hermite-Gauss function at the waist plane.
double hermite_gauss_1d(int order, double x, double waist);

/// Waist-plane mode function u_mn(x, y), normalised so that the integral of
/// |u|^2 over the plane is one. Coordinates are relative to the beam axis.
double evaluate_mode(const HGMode& mode, double x, double y);

/// Integral of |u_mn|^2 over the transverse plane by quadrature.
double mode_norm(const HGMode& mode);

/// Integral of u_a * u_b over the transverse plane.
double overlap2(const HGMode& a, const HGMode& b);

/// Three-mode overlap integral of pump, signal and idler at the common waist
/// plane, by Gauss-Hermite quadrature with order escalation (32, 64, ...)
/// until successive orders agree to 1e-9 relative. Exactly symmetric under
/// signal/idler exchange. Throws std::invalid_argument when the waist
/// positions differ and PhysicsError when the quadrature fails to converge.
double overlap3(const HGMode& pump, const HGMode& signal, const HGMode& idler);

// Cavity mode geometry ---------------------------------------------------

double free_spectral_range(const CavityGeometry& cavity);
/// One-way Gouy phase of the fundamental mode between the two mirrors.
double one_way_gouy_phase(const CavityGeometry& cavity);
/// Rayleigh range of the cavity eigenmode (in vacuum).
double cavity_rayleigh_range(const CavityGeometry& cavity);
/// Waist radius of the cavity eigenmode; the waist sits on the plane mirror.
double cavity_waist(const CavityGeometry& cavity, double wavelength);

struct Resonance {
    long q = 0;          // longitudinal index
    int order = 0;       // m + n
    double frequency = 0.0;  // Hz
};

/// nu(q, m+n) = FSR * (q + (m+n+1) * gouy / pi) for q in [q_first, q_first + q_count)
/// and every transverse order up to max_order.
std::vector<Resonance> gouy_resonance_frequencies(const CavityGeometry& cavity, int max_order,
                                                  long q_first = 0, std::size_t q_count = 1);

/// Effective longitudinal wavevector offset (rad/m) picked up by a
/// parametric process whose summed transverse order differs by
/// `order_difference` from the reference process, averaged over a crystal of
/// `crystal_length` and index `index` starting at the cavity waist.
double gouy_wavevector_offset(const CavityGeometry& cavity, double crystal_length, double index,
                              int order_difference);

/// Resonance splitting (Hz) between two transverse modes whose round-trip
/// optical paths differ by `path_difference` (poling-induced asymmetry).
double transverse_split_frequency(const CavityGeometry& cavity, double path_difference, double wavelength);

} // namespace opo
