#pragma once

// Flat-torus discretization. The torus is [0,1)^{2n} with complex coordinates
// z_j = x_j + i y_j; real axes are ordered (x_1, y_1, ..., x_n, y_n) and grid
// data is row-major with axis 0 slowest. The background metric alpha is a
// constant positive-definite Hermitian matrix, so the volume weight alpha^n
// is spatially uniform and quadrature is the plain grid mean.

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace hflow {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

using Cplx = std::complex<double>;

struct ScalarField {
    std::vector<double> values;
    bool mean_removed = false;
};

/// One Hermitian n x n matrix per grid point, point-major; entry (j,k) at
/// flat offset point*n*n + j*n + k. For g = chi + dd^bar u the (j,k) slot
/// holds chi_jk + d_j d_kbar u.
struct HermitianField {
    int n = 0;
    std::vector<Cplx> values;

    Cplx& at(std::size_t point, int j, int k) {
        return values[point * static_cast<std::size_t>(n) * static_cast<std::size_t>(n) +
                      static_cast<std::size_t>(j) * static_cast<std::size_t>(n) + static_cast<std::size_t>(k)];
    }
    const Cplx& at(std::size_t point, int j, int k) const {
        return values[point * static_cast<std::size_t>(n) * static_cast<std::size_t>(n) +
                      static_cast<std::size_t>(j) * static_cast<std::size_t>(n) + static_cast<std::size_t>(k)];
    }
    std::size_t points() const {
        return n == 0 ? 0 : values.size() / (static_cast<std::size_t>(n) * static_cast<std::size_t>(n));
    }
};

struct TorusGeometry {
    int n = 1;             // complex dimension
    int N = 4;             // grid points per real axis
    Eigen::MatrixXcd alpha;

    // derived
    Eigen::MatrixXcd chol_lower;      // alpha = L L^*
    Eigen::MatrixXcd chol_lower_inv;  // L^{-1}
    double volume = 0.0;              // V = n! det(alpha)
    double alpha_inv_max_eig = 0.0;
    std::size_t points = 0;

    int axes() const { return 2 * n; }

    static TorusGeometry create(int n, int N, Eigen::MatrixXcd alpha_in) {
        if (n < 1) throw ConfigError("geometry: n must be >= 1");
        if (N < 4 || N % 2 != 0) throw ConfigError("geometry: N must be even and >= 4");
        if (alpha_in.rows() != n || alpha_in.cols() != n)
            throw ConfigError("geometry: alpha must be n x n");
        if ((alpha_in - alpha_in.adjoint()).norm() > 1e-12 * (1.0 + alpha_in.norm()))
            throw ConfigError("geometry: alpha must be Hermitian");
        TorusGeometry g;
        g.n = n;
        g.N = N;
        g.alpha = 0.5 * (alpha_in + alpha_in.adjoint());
        Eigen::LLT<Eigen::MatrixXcd> llt(g.alpha);
        if (llt.info() != Eigen::Success)
            throw ConfigError("geometry: alpha is not positive definite");
        g.chol_lower = llt.matrixL();
        g.chol_lower_inv = g.chol_lower.inverse();
        double fact = 1.0;
        for (int i = 2; i <= n; ++i) fact *= i;
        g.volume = fact * g.alpha.determinant().real();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(g.alpha);
        g.alpha_inv_max_eig = 1.0 / es.eigenvalues().minCoeff();
        g.points = 1;
        for (int a = 0; a < 2 * n; ++a) g.points *= static_cast<std::size_t>(N);
        return g;
    }

    ScalarField zero_field() const { return ScalarField{std::vector<double>(points, 0.0), true}; }

    HermitianField constant_field(const Eigen::MatrixXcd& m) const {
        HermitianField f;
        f.n = n;
        f.values.resize(points * static_cast<std::size_t>(n) * static_cast<std::size_t>(n));
        for (std::size_t p = 0; p < points; ++p)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k) f.at(p, j, k) = m(j, k);
        return f;
    }

    std::vector<int> unflatten(std::size_t flat) const {
        std::vector<int> idx(static_cast<std::size_t>(axes()));
        for (int a = axes() - 1; a >= 0; --a) {
            idx[static_cast<std::size_t>(a)] = static_cast<int>(flat % static_cast<std::size_t>(N));
            flat /= static_cast<std::size_t>(N);
        }
        return idx;
    }
};

/// Fourier mode of a real field: amplitude * cos(2 pi wave.x + phase).
/// wave has one integer per real axis, in (x_1, y_1, ..., x_n, y_n) order.
struct Mode {
    double amplitude = 0.0;
    std::vector<int> wave;
    double phase = 0.0;
};

inline ScalarField make_mode_field(const TorusGeometry& geom, const std::vector<Mode>& modes) {
    for (const auto& m : modes) {
        if (static_cast<int>(m.wave.size()) != geom.axes())
            throw ConfigError("mode: wave vector must have 2n entries");
        for (int w : m.wave)
            if (std::abs(w) >= geom.N / 2)
                throw ConfigError("mode: wave component " + std::to_string(w) +
                                  " is at or above the Nyquist mode for N = " + std::to_string(geom.N));
    }
    ScalarField f{std::vector<double>(geom.points, 0.0), false};
    const double tau = 2.0 * M_PI;
    std::vector<int> idx(static_cast<std::size_t>(geom.axes()), 0);
    for (std::size_t p = 0; p < geom.points; ++p) {
        double x = 0.0;
        for (const auto& m : modes) {
            double dot = 0.0;
            for (int a = 0; a < geom.axes(); ++a)
                dot += m.wave[static_cast<std::size_t>(a)] * idx[static_cast<std::size_t>(a)];
            x += m.amplitude * std::cos(tau * dot / geom.N + m.phase);
        }
        f.values[p] = x;
        for (int a = geom.axes() - 1; a >= 0; --a) {
            if (++idx[static_cast<std::size_t>(a)] < geom.N) break;
            idx[static_cast<std::size_t>(a)] = 0;
        }
    }
    return f;
}

/// chi = chi0 + i d dbar rho; closedness comes for free from the potential form.
struct ChiSpec {
    Eigen::MatrixXcd chi0;
    ScalarField rho;      // empty values => no potential part
    bool has_rho() const { return !rho.values.empty(); }
};

inline double field_mean(const ScalarField& f) {
    double s = 0.0;
    for (double v : f.values) s += v;
    return s / static_cast<double>(f.values.size());
}

inline double field_max(const ScalarField& f) {
    double m = -std::numeric_limits<double>::infinity();
    for (double v : f.values) m = std::max(m, v);
    return m;
}

inline double field_min(const ScalarField& f) {
    double m = std::numeric_limits<double>::infinity();
    for (double v : f.values) m = std::min(m, v);
    return m;
}

inline double field_max_abs(const ScalarField& f) {
    double m = 0.0;
    for (double v : f.values) m = std::max(m, std::abs(v));
    return m;
}

/// Grid mean times V; exact for fields resolved below the Nyquist mode.
inline double integrate(const TorusGeometry& geom, const ScalarField& s) {
    return field_mean(s) * geom.volume;
}

/// u minus its alpha-volume average (uniform weight on a flat torus).
inline ScalarField normalize(const TorusGeometry& geom, const ScalarField& u) {
    (void)geom;
    const double mean = field_mean(u);
    ScalarField out{u.values, true};
    for (double& v : out.values) v -= mean;
    return out;
}

}  // namespace hflow
