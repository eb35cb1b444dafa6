#include "opo/coupling.hpp"

#include <cmath>
#include <string>

namespace opo {

namespace {

bool energy_conserving(double offset_a, double offset_b) {
    const double scale = std::max(std::abs(offset_a), std::abs(offset_b));
    return std::abs(offset_a + offset_b) <= 1e-9 * scale + 1e-3;
}

} // namespace

void ModeBasis::validate() const {
    if (modes.empty())
        throw ConfigError("mode basis is empty", "basis.modes");
    pump.validate();
    for (std::size_t i = 0; i < modes.size(); ++i) {
        modes[i].validate();
        for (std::size_t j = 0; j < i; ++j) {
            const auto& a = modes[i];
            const auto& b = modes[j];
            if (a.m == b.m && a.n == b.n && a.frequency_offset == b.frequency_offset)
                throw ConfigError("duplicate mode TEM" + std::to_string(a.m) + std::to_string(a.n) +
                                      " at the same frequency offset",
                                  "basis.modes");
        }
    }
}

double reference_coupling(const HGMode& pump, const BeamGeometry& signal) {
    const HGMode tem00{0, 0, signal, 0.0};
    return overlap3(pump, tem00, tem00);
}

CouplingMatrix build_coupling_matrix(const ModeBasis& basis) {
    basis.validate();
    const double reference = reference_coupling(basis.pump, basis.modes.front().geometry);
    if (reference == 0.0)
        throw PhysicsError("build_coupling_matrix: TEM00 reference coupling vanishes");

    const auto n = static_cast<Eigen::Index>(basis.size());
    CouplingMatrix g = CouplingMatrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j <= i; ++j) {
            const auto& a = basis.modes[static_cast<std::size_t>(i)];
            const auto& b = basis.modes[static_cast<std::size_t>(j)];
            if (!energy_conserving(a.frequency_offset, b.frequency_offset))
                continue;
            const double value = overlap3(basis.pump, a, b) / reference;
            g(i, j) = value;
            g(j, i) = value;
        }
    }
    return g;
}

} // namespace opo
