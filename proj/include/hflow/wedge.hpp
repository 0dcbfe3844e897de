#pragma once

// Pointwise eigenstructure of alpha^{-1} g and the wedge-quotient fields
//
//   g^k ^ alpha^{n-k} / alpha^n  =  sigma_k(lambda(alpha^{-1} g)),
//
// computed through the Cholesky reduction of the pencil (g, alpha); alpha is
// constant so the factor is formed once. Mixed ratios a^j ^ b^{k-j} use
// polarization: sigma_k(t a + b) is a degree-k polynomial in t, sampled at
// t = 0..k and re-expanded through a fixed Vandermonde solve.

#include <Eigen/Dense>

#include <vector>

#include "geometry.hpp"
#include "operators.hpp"
#include "spectral.hpp"
#include "symm.hpp"

namespace hflow {

/// Eigenvalues of alpha^{-1} g per point, written sorted descending into
/// out (n per point). Closed forms for n = 1, 2; Eigen otherwise.
inline void eigenvalues_field_into(const TorusGeometry& geom, const HermitianField& g, double* out) {
    const int n = geom.n;
    const std::size_t pts = g.points();
    if (n == 1) {
        const double inv = 1.0 / geom.alpha(0, 0).real();
        for (std::size_t p = 0; p < pts; ++p) out[p] = g.values[p].real() * inv;
        return;
    }
    if (n == 2) {
        const Eigen::Matrix2cd li = geom.chol_lower_inv;
        for (std::size_t p = 0; p < pts; ++p) {
            // m = Linv gp Linv^H, Hermitian 2x2
            Eigen::Matrix2cd gp;
            gp(0, 0) = g.values[4 * p];
            gp(0, 1) = g.values[4 * p + 1];
            gp(1, 0) = g.values[4 * p + 2];
            gp(1, 1) = g.values[4 * p + 3];
            const Eigen::Matrix2cd m = li * gp * li.adjoint();
            const double a = m(0, 0).real(), d = m(1, 1).real();
            const double off = std::abs(m(0, 1));
            const double mid = 0.5 * (a + d);
            const double rad = std::sqrt(0.25 * (a - d) * (a - d) + off * off);
            out[2 * p] = mid + rad;
            out[2 * p + 1] = mid - rad;
        }
        return;
    }
    Eigen::MatrixXcd gp(n, n), m(n, n);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es;
    for (std::size_t p = 0; p < pts; ++p) {
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) gp(j, k) = g.at(p, j, k);
        m.noalias() = geom.chol_lower_inv * gp * geom.chol_lower_inv.adjoint();
        es.compute(m, Eigen::EigenvaluesOnly);
        const auto& ev = es.eigenvalues();  // ascending
        for (int j = 0; j < n; ++j) out[p * static_cast<std::size_t>(n) + static_cast<std::size_t>(j)] = ev(n - 1 - j);
    }
}

inline std::vector<double> eigenvalues_field(const TorusGeometry& geom, const HermitianField& g) {
    std::vector<double> out(g.points() * static_cast<std::size_t>(geom.n));
    eigenvalues_field_into(geom, g, out.data());
    return out;
}

/// As above but also the unitary diagonalizing frames, needed by the
/// linearized operator in the elliptic solver.
struct EigenSystemField {
    std::vector<double> lambda;             // n per point, descending
    std::vector<Eigen::MatrixXcd> frames;   // U per point, columns match lambda order
};

inline EigenSystemField eigensystem_field(const TorusGeometry& geom, const HermitianField& g) {
    const int n = geom.n;
    EigenSystemField out;
    out.lambda.resize(g.points() * static_cast<std::size_t>(n));
    out.frames.resize(g.points());
    Eigen::MatrixXcd gp(n, n), m(n, n);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es;
    for (std::size_t p = 0; p < g.points(); ++p) {
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) gp(j, k) = g.at(p, j, k);
        m.noalias() = geom.chol_lower_inv * gp * geom.chol_lower_inv.adjoint();
        es.compute(m);
        Eigen::MatrixXcd U(n, n);
        for (int j = 0; j < n; ++j) {
            out.lambda[p * static_cast<std::size_t>(n) + static_cast<std::size_t>(j)] = es.eigenvalues()(n - 1 - j);
            U.col(j) = es.eigenvectors().col(n - 1 - j);
        }
        out.frames[p] = std::move(U);
    }
    return out;
}

/// sigma_k(lambda(alpha^{-1} g)) as a field.
inline ScalarField wedge_ratio(const TorusGeometry& geom, const HermitianField& g, int k) {
    if (k < 0 || k > geom.n) throw std::invalid_argument("wedge_ratio: k out of range");
    const auto lam = eigenvalues_field(geom, g);
    ScalarField out{std::vector<double>(g.points()), false};
    const auto n = static_cast<std::size_t>(geom.n);
    for (std::size_t p = 0; p < g.points(); ++p)
        out.values[p] = sigma(std::span<const double>(lam.data() + p * n, n), k);
    return out;
}

namespace detail {

/// inverse of the Vandermonde matrix on nodes 0..k (row r = powers of r)
inline Eigen::MatrixXd vandermonde_inverse(int k) {
    Eigen::MatrixXd v(k + 1, k + 1);
    for (int r = 0; r <= k; ++r) {
        double x = 1.0;
        for (int c = 0; c <= k; ++c) {
            v(r, c) = x;
            x *= r;
        }
    }
    return v.inverse();
}

}  // namespace detail

/// All mixed ratios a^j ^ b^{k-j} ^ alpha^{n-k} / alpha^n for j = 0..k.
inline std::vector<ScalarField> mixed_wedge_all(const TorusGeometry& geom, const HermitianField& a,
                                                const HermitianField& b, int k) {
    if (k < 0 || k > geom.n) throw std::invalid_argument("mixed_wedge_all: k out of range");
    const std::size_t pts = a.points();
    static thread_local std::vector<Eigen::MatrixXd> vinv_cache;
    if (static_cast<int>(vinv_cache.size()) <= k) vinv_cache.resize(static_cast<std::size_t>(k) + 1);
    if (vinv_cache[static_cast<std::size_t>(k)].size() == 0)
        vinv_cache[static_cast<std::size_t>(k)] = detail::vandermonde_inverse(k);
    const Eigen::MatrixXd& vinv = vinv_cache[static_cast<std::size_t>(k)];

    // q(t) = sigma_k(lambda(alpha^{-1}(t a + b))) sampled at t = 0..k
    std::vector<std::vector<double>> samples(static_cast<std::size_t>(k) + 1);
    HermitianField mix = b;
    for (int t = 0; t <= k; ++t) {
        if (t > 0)
            for (std::size_t i = 0; i < mix.values.size(); ++i) mix.values[i] += a.values[i];
        samples[static_cast<std::size_t>(t)] = wedge_ratio(geom, mix, k).values;
    }
    std::vector<ScalarField> out(static_cast<std::size_t>(k) + 1);
    for (int j = 0; j <= k; ++j) {
        out[static_cast<std::size_t>(j)].values.assign(pts, 0.0);
        out[static_cast<std::size_t>(j)].mean_removed = false;
    }
    for (std::size_t p = 0; p < pts; ++p) {
        for (int j = 0; j <= k; ++j) {
            double coeff = 0.0;
            for (int t = 0; t <= k; ++t) coeff += vinv(j, t) * samples[static_cast<std::size_t>(t)][p];
            out[static_cast<std::size_t>(j)].values[p] = coeff / binomial(k, j);
        }
    }
    return out;
}

inline ScalarField mixed_wedge_ratio(const TorusGeometry& geom, const HermitianField& a,
                                     const HermitianField& b, int j, int k) {
    if (j < 0 || j > k) throw std::invalid_argument("mixed_wedge_ratio: need 0 <= j <= k");
    return mixed_wedge_all(geom, a, b, k)[static_cast<std::size_t>(j)];
}

/// integral of chi^j ^ alpha^{n-j} over the torus.
inline double class_integral(const TorusGeometry& geom, const HermitianField& chi, int j) {
    return integrate(geom, wedge_ratio(geom, chi, j));
}

/// The constant forced by integrating the stationary equation over the torus.
/// Quotient flows: c = integral chi^ell ^ alpha^{n-ell} / integral chi^k ^ alpha^{n-k}
/// (and the mixed version with coefficients). Depends only on the classes of
/// chi and alpha, which the closedness of chi0 + i d dbar rho guarantees.
inline double cohomology_constant(const TorusGeometry& geom, const SpectralEngine& engine,
                                  const ChiSpec& chi, const OperatorSpec& op) {
    if (!op.has_ell())
        throw ConfigError("cohomology constant: operator " + to_string(op.kind) +
                          " has no class-determined constant");
    const auto field = hflow::chi_field(geom, engine, chi);
    const double den = class_integral(geom, field, op.k);
    if (!(den > 0.0))
        throw ConfigError("cohomology constant: integral of chi^k ^ alpha^{n-k} is not positive");
    switch (op.kind) {
        case OperatorKind::JQuotient:
            return class_integral(geom, field, op.ell) / den;
        case OperatorKind::MixedHessian: {
            double num = 0.0;
            for (int j = 1; j <= op.ell; ++j)
                num += op.coeffs[static_cast<std::size_t>(j - 1)] * class_integral(geom, field, j);
            return num / den;
        }
        case OperatorKind::LogQuotient: {
            // threshold constant: e^psi >= integral chi^k / integral chi^ell
            const double dl = class_integral(geom, field, op.ell);
            if (!(dl > 0.0))
                throw ConfigError("cohomology constant: integral of chi^ell ^ alpha^{n-ell} is not positive");
            return den / dl;
        }
        case OperatorKind::InvQuotient:
            // threshold constant: psi^{k-ell} <= integral chi^ell / integral chi^k
            return class_integral(geom, field, op.ell) / den;
        default:
            throw ConfigError("cohomology constant: unsupported operator");
    }
}

}  // namespace hflow
