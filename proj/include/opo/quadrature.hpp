#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

namespace opo {

// Gauss-Hermite rule for the weight exp(-t^2). Only the non-negative half of
// the nodes is stored; integrate() folds each +t/-t pair before weighting so
// that an integrand odd in t sums to exactly zero.
template <typename Scalar = double>
struct GaussHermiteRule {
    std::size_t order = 0;
    std::vector<Scalar> nodes;    // strictly positive nodes, ascending
    std::vector<Scalar> weights;  // weight of each +/- pair member
    Scalar center_weight = 0;     // weight at t = 0 (odd orders only)

    template <typename F>
    auto integrate(F&& f) const {
        using Result = decltype(f(Scalar{}));
        Result sum = center_weight != Scalar{0} ? Result(center_weight * f(Scalar{0})) : Result{};
        // smallest weights first
        for (std::size_t i = nodes.size(); i-- > 0;)
            sum += weights[i] * (f(nodes[i]) + f(-nodes[i]));
        return sum;
    }
};

// Nodes by Newton iteration on the orthonormal Hermite recurrence (no
// overflow for orders in the hundreds).
template <typename Scalar = double>
GaussHermiteRule<Scalar> gauss_hermite_rule(std::size_t order) {
    using std::sqrt;
    using std::abs;
    if (order == 0)
        throw std::invalid_argument("gauss_hermite_rule: order must be positive");

    const Scalar pi_m4 = Scalar(1) / sqrt(sqrt(std::numbers::pi_v<Scalar>));
    const std::size_t half = (order + 1) / 2;
    const auto n = static_cast<Scalar>(order);

    // returns (p_n(t), p_{n-1}(t)) for the orthonormal functions times exp(t^2/2)
    auto recur = [&](Scalar t) {
        Scalar p1 = pi_m4, p2 = 0;
        for (std::size_t j = 1; j <= order; ++j) {
            const Scalar p3 = p2;
            p2 = p1;
            p1 = t * sqrt(Scalar(2) / Scalar(j)) * p2 - sqrt(Scalar(j - 1) / Scalar(j)) * p3;
        }
        return std::pair{p1, p2};
    };

    GaussHermiteRule<Scalar> rule;
    rule.order = order;
    std::vector<Scalar> roots(half), w(half);
    Scalar z = 0;
    for (std::size_t i = 0; i < half; ++i) {
        // initial guesses, largest root first
        if (i == 0)
            z = sqrt(2 * n + 1) - Scalar(1.85575) * std::pow(2 * n + 1, Scalar(-1.0 / 6.0));
        else if (i == 1)
            z -= Scalar(1.14) * std::pow(n, Scalar(0.426)) / z;
        else if (i == 2)
            z = Scalar(1.86) * z - Scalar(0.86) * roots[0];
        else if (i == 3)
            z = Scalar(1.91) * z - Scalar(0.91) * roots[1];
        else
            z = 2 * z - roots[i - 2];

        Scalar pp = 0;
        for (int it = 0; it < 100; ++it) {
            auto [p, pm1] = recur(z);
            pp = sqrt(2 * n) * pm1;
            const Scalar step = p / pp;
            z -= step;
            if (abs(step) <= std::numeric_limits<Scalar>::epsilon() * (1 + abs(z)))
                break;
        }
        auto [p, pm1] = recur(z);
        pp = sqrt(2 * n) * pm1;
        roots[i] = z;
        w[i] = Scalar(2) / (pp * pp);
    }

    for (std::size_t i = half; i-- > 0;) {
        if (order % 2 == 1 && i == half - 1) {
            rule.center_weight = w[i];
            continue;
        }
        rule.nodes.push_back(abs(roots[i]));
        rule.weights.push_back(w[i]);
    }
    return rule;
}

} // namespace opo
