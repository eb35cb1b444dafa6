#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "opo/error.hpp"
#include "opo/hg_modes.hpp"

namespace opo {

// Signal/idler modes resonant in the cavity plus the single pump mode.
struct ModeBasis {
    std::vector<HGMode> modes;
    HGMode pump;

    std::size_t size() const noexcept { return modes.size(); }
    void validate() const;
};

// Real symmetric coupling matrix, dimensionless, normalised to the TEM00-pair
// coupling of the same pump.
using CouplingMatrix = Eigen::MatrixXd;

template <typename Scalar>
struct SupermodeSet {
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

    Vector eigenvalues;   // sorted by descending modulus
    Matrix eigenvectors;  // columns are supermodes over the ModeBasis

    Eigen::Index size() const noexcept { return eigenvalues.size(); }
    Scalar leading() const { return eigenvalues(0); }
    Matrix reconstruct() const { return eigenvectors * eigenvalues.asDiagonal() * eigenvectors.transpose(); }
};

/// Cyclic Jacobi eigen-decomposition of a real symmetric matrix. Sweeps until
/// every off-diagonal element is below `tolerance` times the Frobenius norm.
/// Eigenpairs are returned in the order the rotations leave them.
template <typename Derived>
SupermodeSet<typename Derived::Scalar> jacobi_eigen(const Eigen::MatrixBase<Derived>& input,
                                                    typename Derived::Scalar tolerance =
                                                        typename Derived::Scalar(1e-15)) {
    using Scalar = typename Derived::Scalar;
    using std::abs;
    using std::sqrt;
    using Matrix = typename SupermodeSet<Scalar>::Matrix;

    Matrix a = input;
    const Eigen::Index n = a.rows();
    Matrix v = Matrix::Identity(n, n);
    const Scalar threshold = tolerance * a.norm();

    auto off_max = [&] {
        Scalar m = 0;
        for (Eigen::Index q = 1; q < n; ++q)
            for (Eigen::Index p = 0; p < q; ++p)
                m = std::max(m, abs(a(p, q)));
        return m;
    };

    for (int sweep = 0; sweep < 100 && off_max() > threshold; ++sweep) {
        for (Eigen::Index p = 0; p < n - 1; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                const Scalar apq = a(p, q);
                if (abs(apq) <= std::numeric_limits<Scalar>::min())
                    continue;
                const Scalar theta = (a(q, q) - a(p, p)) / (2 * apq);
                const Scalar sign = theta >= 0 ? Scalar(1) : Scalar(-1);
                const Scalar t = sign / (abs(theta) + sqrt(theta * theta + 1));
                const Scalar c = 1 / sqrt(t * t + 1);
                const Scalar s = t * c;
                for (Eigen::Index k = 0; k < n; ++k) {
                    const Scalar akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const Scalar apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const Scalar vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }
    if (off_max() > threshold)
        throw PhysicsError("jacobi_eigen: no convergence");

    SupermodeSet<Scalar> out;
    out.eigenvalues = a.diagonal();
    out.eigenvectors = v;
    return out;
}

namespace detail {

// Lowest index whose magnitude is within 1e-12 of the column's largest.
template <typename Vec>
Eigen::Index dominant_index(const Vec& column) {
    using Scalar = typename Vec::Scalar;
    const Scalar peak = column.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < column.size(); ++i)
        if (std::abs(column(i)) >= peak - Scalar(1e-12))
            return i;
    return 0;
}

} // namespace detail

/// Supermode decomposition with a deterministic convention: descending
/// |Lambda|; equal moduli (within 1e-10 relative) ordered by the lowest basis
/// index of the dominant coefficient, then positive eigenvalue first. Each
/// supermode is signed so its dominant coefficient is positive.
template <typename Derived>
SupermodeSet<typename Derived::Scalar> diagonalize(const Eigen::MatrixBase<Derived>& g) {
    using Scalar = typename Derived::Scalar;
    if (g.rows() == 0 || g.rows() != g.cols())
        throw std::invalid_argument("diagonalize: coupling matrix must be square and non-empty");
    if ((g - g.transpose()).cwiseAbs().maxCoeff() > Scalar(1e-12))
        throw std::invalid_argument("diagonalize: coupling matrix is not symmetric");

    auto raw = jacobi_eigen(g);
    const Eigen::Index n = raw.size();
    for (Eigen::Index k = 0; k < n; ++k)
        if (raw.eigenvectors(detail::dominant_index(raw.eigenvectors.col(k)), k) < 0)
            raw.eigenvectors.col(k) *= Scalar(-1);

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        return std::abs(raw.eigenvalues(a)) > std::abs(raw.eigenvalues(b));
    });
    const Scalar scale = std::abs(raw.eigenvalues(order.front()));
    const Scalar tie = Scalar(1e-10) * (scale > 0 ? scale : Scalar(1));
    for (std::size_t begin = 0; begin < order.size();) {
        std::size_t end = begin + 1;
        while (end < order.size() && std::abs(raw.eigenvalues(order[begin])) -
                                             std::abs(raw.eigenvalues(order[end])) <= tie)
            ++end;
        std::stable_sort(order.begin() + begin, order.begin() + end, [&](Eigen::Index a, Eigen::Index b) {
            const auto ia = detail::dominant_index(raw.eigenvectors.col(a));
            const auto ib = detail::dominant_index(raw.eigenvectors.col(b));
            if (ia != ib)
                return ia < ib;
            return raw.eigenvalues(a) > raw.eigenvalues(b);
        });
        begin = end;
    }

    SupermodeSet<Scalar> out;
    out.eigenvalues.resize(n);
    out.eigenvectors.resize(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
        out.eigenvalues(k) = raw.eigenvalues(order[static_cast<std::size_t>(k)]);
        out.eigenvectors.col(k) = raw.eigenvectors.col(order[static_cast<std::size_t>(k)]);
    }
    return out;
}

/// Overlap of the pump with a TEM00 pair sharing `signal`'s geometry.
double reference_coupling(const HGMode& pump, const BeamGeometry& signal);

/// G[l][l'] = overlap3(pump, l, l') / reference when the frequency offsets of
/// l and l' cancel, zero otherwise. The reference is the TEM00 pair in the
/// geometry of the first basis mode.
CouplingMatrix build_coupling_matrix(const ModeBasis& basis);

/// P_th(k) = reference_threshold * (Lambda_1 / Lambda_k)^2; +infinity for an
/// uncoupled supermode.
template <typename Scalar>
std::vector<double> threshold_powers(const SupermodeSet<Scalar>& s, double reference_threshold) {
    if (!(reference_threshold > 0.0))
        throw std::invalid_argument("threshold_powers: reference threshold must be positive");
    std::vector<double> out;
    const double lead = static_cast<double>(s.leading());
    for (Eigen::Index k = 0; k < s.size(); ++k) {
        const double lk = static_cast<double>(s.eigenvalues(k));
        out.push_back(lk == 0.0 ? std::numeric_limits<double>::infinity()
                                : reference_threshold * (lead / lk) * (lead / lk));
    }
    return out;
}

} // namespace opo
