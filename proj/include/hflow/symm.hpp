#pragma once

// Elementary symmetric polynomials e_j, their normalized cousins
// sigma_j = e_j / C(n,j), gradients, and the Garding cones
// Gamma_k = { lambda : sigma_j(lambda) > 0, j = 1..k }.
//
// sigma is normalized so that sigma_j(t,...,t) = t^j; with that convention
// sigma_k of the eigenvalues of a Hermitian pencil equals the wedge-quotient
// field computed in wedge.hpp, with no binomial factors anywhere else.

#include <algorithm>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

namespace hflow {

/// Sorted-descending eigenvalue tuple of the endomorphism alpha^{-1} g at a point.
struct Eigenvalues {
    std::vector<double> values;  // sorted descending

    explicit Eigenvalues(std::vector<double> v) : values(std::move(v)) {
        for (std::size_t i = 0; i + 1 < values.size(); ++i)
            if (values[i] < values[i + 1]) throw std::invalid_argument("Eigenvalues: not sorted descending");
        if (values.empty()) throw std::invalid_argument("Eigenvalues: empty");
    }
    static Eigenvalues from_unsorted(std::vector<double> v) {
        std::sort(v.begin(), v.end(), std::greater<double>());
        return Eigenvalues(std::move(v));
    }
    std::size_t n() const { return values.size(); }
};

/// Gamma_k cone identifier, 1 <= k <= n. Gamma_n is the positive orthant.
struct Cone {
    int k = 1;
};

inline double binomial(int n, int j) {
    if (j < 0 || j > n) return 0.0;
    j = std::min(j, n - j);
    double r = 1.0;
    for (int i = 1; i <= j; ++i) r = r * double(n - j + i) / double(i);
    return r;
}

/// All e_0..e_m of lambda written into out[0..m]; incremental product of
/// (1 + lambda_i t). out must have room for m+1 entries.
inline void elementary_sym_all(std::span<const double> lambda, int m, double* out) {
    const int n = static_cast<int>(lambda.size());
    for (int d = 1; d <= m; ++d) out[d] = 0.0;
    out[0] = 1.0;
    for (int i = 0; i < n; ++i)
        for (int d = std::min(m, i + 1); d >= 1; --d)
            out[d] += lambda[static_cast<std::size_t>(i)] * out[d - 1];
}

/// e_j(lambda): sum over all j-element products; e_0 = 1.
inline double elementary_sym(std::span<const double> lambda, int j) {
    const int n = static_cast<int>(lambda.size());
    if (j < 0 || j > n) throw std::invalid_argument("elementary_sym: j out of range");
    std::vector<double> coeff(static_cast<std::size_t>(j) + 1, 0.0);
    elementary_sym_all(lambda, j, coeff.data());
    return coeff[static_cast<std::size_t>(j)];
}

inline double elementary_sym(const Eigenvalues& lambda, int j) {
    return elementary_sym(std::span<const double>(lambda.values), j);
}

/// sigma_j = e_j / C(n,j), so sigma_j(t I) = t^j.
inline double sigma(std::span<const double> lambda, int j) {
    const int n = static_cast<int>(lambda.size());
    if (j < 0 || j > n) throw std::invalid_argument("sigma: j out of range");
    return elementary_sym(lambda, j) / binomial(n, j);
}

inline double sigma(const Eigenvalues& lambda, int j) {
    return sigma(std::span<const double>(lambda.values), j);
}

/// d sigma_j / d lambda_i = e_{j-1}(lambda with entry i removed) / C(n,j).
inline std::vector<double> sigma_gradient(std::span<const double> lambda, int j) {
    const int n = static_cast<int>(lambda.size());
    if (j < 1 || j > n) throw std::invalid_argument("sigma_gradient: j out of range");
    const double cnj = binomial(n, j);
    std::vector<double> grad(lambda.size());
    std::vector<double> rest;
    rest.reserve(lambda.size() - 1);
    for (std::size_t i = 0; i < lambda.size(); ++i) {
        rest.clear();
        for (std::size_t p = 0; p < lambda.size(); ++p)
            if (p != i) rest.push_back(lambda[p]);
        grad[i] = elementary_sym(std::span<const double>(rest), j - 1) / cnj;
    }
    return grad;
}

inline std::vector<double> sigma_gradient(const Eigenvalues& lambda, int j) {
    return sigma_gradient(std::span<const double>(lambda.values), j);
}

/// Strict test sigma_j(lambda) > margin for all j = 1..k.
inline bool in_cone(std::span<const double> lambda, Cone cone, double margin = 0.0) {
    if (margin < 0.0) throw std::invalid_argument("in_cone: margin must be >= 0");
    const int n = static_cast<int>(lambda.size());
    if (cone.k < 1 || cone.k > n) throw std::invalid_argument("in_cone: cone index out of range");
    for (int j = 1; j <= cone.k; ++j)
        if (!(sigma(lambda, j) > margin)) return false;
    return true;
}

inline bool in_cone(const Eigenvalues& lambda, Cone cone, double margin = 0.0) {
    return in_cone(std::span<const double>(lambda.values), cone, margin);
}

/// min_{j<=k} sigma_j(lambda); positive iff lambda is interior to Gamma_k.
inline double cone_margin(std::span<const double> lambda, Cone cone) {
    double m = std::numeric_limits<double>::infinity();
    for (int j = 1; j <= cone.k; ++j) m = std::min(m, sigma(lambda, j));
    return m;
}

/// Index of the first violated sigma_j (1-based), or 0 if inside the cone.
inline int cone_violation_index(std::span<const double> lambda, Cone cone, double margin = 0.0) {
    for (int j = 1; j <= cone.k; ++j)
        if (!(sigma(lambda, j) > margin)) return j;
    return 0;
}

}  // namespace hflow
