#pragma once

// Fourier-multiplier derivatives on the periodic grid. With z_j = x_j + i y_j,
//
//   d_j d_kbar = 1/4 (dx_j dx_k + dy_j dy_k) + (i/4)(dx_j dy_k - dy_j dx_k),
//
// which on the mode e^{2 pi i m.x} acts as -pi^2 conj(c_j) c_k with
// c_j = m_{x_j} + i m_{y_j}. One forward transform and n(n+1)/2 inverse
// transforms give the full complex Hessian. All Nyquist planes are zeroed in
// the multipliers; fields are band-limited below Nyquist by construction
// (config validation enforces this for inputs).

#include <fftw3.h>

#include <complex>
#include <cstring>
#include <memory>
#include <vector>

#include "geometry.hpp"

namespace hflow {

class SpectralEngine {
  public:
    explicit SpectralEngine(const TorusGeometry& geom)
        : n_(geom.n), N_(geom.N), points_(geom.points) {
        buf_ = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * points_));
        std::vector<int> dims(static_cast<std::size_t>(2 * n_), N_);
        plan_fwd_ = fftw_plan_dft(2 * n_, dims.data(), buf_, buf_, FFTW_FORWARD, FFTW_ESTIMATE);
        plan_bwd_ = fftw_plan_dft(2 * n_, dims.data(), buf_, buf_, FFTW_BACKWARD, FFTW_ESTIMATE);
        // signed mode per axis index, Nyquist marked unusable
        mode_of_idx_.resize(static_cast<std::size_t>(N_));
        for (int i = 0; i < N_; ++i)
            mode_of_idx_[static_cast<std::size_t>(i)] = (i <= N_ / 2) ? i : i - N_;
        // precomputed wavevector table
        cvec_.resize(points_ * static_cast<std::size_t>(n_));
        nyquist_.assign(points_, false);
        std::vector<Cplx> c;
        for (std::size_t p = 0; p < points_; ++p) {
            if (!wavevector(p, c)) {
                nyquist_[p] = true;
                continue;
            }
            for (int j = 0; j < n_; ++j) cvec_[p * static_cast<std::size_t>(n_) + static_cast<std::size_t>(j)] = c[static_cast<std::size_t>(j)];
        }
    }
    ~SpectralEngine() {
        fftw_destroy_plan(plan_fwd_);
        fftw_destroy_plan(plan_bwd_);
        fftw_free(buf_);
    }
    SpectralEngine(const SpectralEngine&) = delete;
    SpectralEngine& operator=(const SpectralEngine&) = delete;

    /// normalized spectrum: u(x) = sum_m spec(m) e^{+2 pi i m.x}
    std::vector<Cplx> forward(const std::vector<double>& u) const {
        for (std::size_t p = 0; p < points_; ++p) {
            buf_[p][0] = u[p];
            buf_[p][1] = 0.0;
        }
        fftw_execute(plan_fwd_);
        std::vector<Cplx> spec(points_);
        const double inv = 1.0 / static_cast<double>(points_);
        for (std::size_t p = 0; p < points_; ++p) spec[p] = Cplx(buf_[p][0] * inv, buf_[p][1] * inv);
        return spec;
    }

    std::vector<Cplx> inverse(const std::vector<Cplx>& spec) const {
        for (std::size_t p = 0; p < points_; ++p) {
            buf_[p][0] = spec[p].real();
            buf_[p][1] = spec[p].imag();
        }
        fftw_execute(plan_bwd_);
        std::vector<Cplx> out(points_);
        for (std::size_t p = 0; p < points_; ++p) out[p] = Cplx(buf_[p][0], buf_[p][1]);
        return out;
    }

    std::vector<double> inverse_real(const std::vector<Cplx>& spec) const {
        auto full = inverse(spec);
        std::vector<double> out(points_);
        for (std::size_t p = 0; p < points_; ++p) out[p] = full[p].real();
        return out;
    }

    /// signed wavevector components c_j = m_{x_j} + i m_{y_j} at a flat spectral
    /// index; returns false on any Nyquist plane.
    bool wavevector(std::size_t flat, std::vector<Cplx>& c) const {
        c.assign(static_cast<std::size_t>(n_), Cplx(0.0, 0.0));
        for (int a = 2 * n_ - 1; a >= 0; --a) {
            const int idx = static_cast<int>(flat % static_cast<std::size_t>(N_));
            flat /= static_cast<std::size_t>(N_);
            if (idx == N_ / 2) return false;
            const double m = mode_of_idx_[static_cast<std::size_t>(idx)];
            if (a % 2 == 0)
                c[static_cast<std::size_t>(a / 2)] += Cplx(m, 0.0);
            else
                c[static_cast<std::size_t>(a / 2)] += Cplx(0.0, m);
        }
        return true;
    }

    /// d_j d_kbar u for all (j,k), Hermitian by construction.
    HermitianField complex_hessian(const TorusGeometry& geom, const ScalarField& u) const {
        const auto spec = forward(u.values);
        HermitianField H;
        H.n = n_;
        H.values.assign(points_ * static_cast<std::size_t>(n_) * static_cast<std::size_t>(n_), Cplx(0.0, 0.0));

        const double pi2 = M_PI * M_PI;
        std::vector<Cplx> work(points_);
        for (int j = 0; j < n_; ++j) {
            for (int k = j; k < n_; ++k) {
                for (std::size_t p = 0; p < points_; ++p) {
                    if (nyquist_[p]) {
                        work[p] = Cplx(0.0, 0.0);
                        continue;
                    }
                    work[p] = -pi2 * std::conj(cj(p, j)) * cj(p, k) * spec[p];
                }
                auto field = inverse(work);
                if (j == k) {
                    for (std::size_t p = 0; p < points_; ++p) H.at(p, j, j) = Cplx(field[p].real(), 0.0);
                } else {
                    for (std::size_t p = 0; p < points_; ++p) {
                        H.at(p, j, k) = field[p];
                        H.at(p, k, j) = std::conj(field[p]);
                    }
                }
            }
        }
        (void)geom;
        return H;
    }

    std::size_t points() const { return points_; }
    int dim() const { return n_; }
    int grid() const { return N_; }
    bool is_nyquist(std::size_t flat) const { return nyquist_[flat]; }
    /// c_j at a non-Nyquist spectral point (precomputed)
    Cplx cj(std::size_t flat, int j) const {
        return cvec_[flat * static_cast<std::size_t>(n_) + static_cast<std::size_t>(j)];
    }

  private:
    int n_, N_;
    std::size_t points_;
    fftw_complex* buf_;
    fftw_plan plan_fwd_, plan_bwd_;
    std::vector<double> mode_of_idx_;
    std::vector<Cplx> cvec_;
    std::vector<char> nyquist_;
};

/// chi0 + i d dbar rho as a pointwise Hermitian matrix field.
inline HermitianField chi_field(const TorusGeometry& geom, const SpectralEngine& engine, const ChiSpec& chi) {
    if (chi.chi0.rows() != geom.n || chi.chi0.cols() != geom.n)
        throw ConfigError("chi: chi0 must be n x n");
    if ((chi.chi0 - chi.chi0.adjoint()).norm() > 1e-12 * (1.0 + chi.chi0.norm()))
        throw ConfigError("chi: chi0 must be Hermitian");
    HermitianField f = geom.constant_field(chi.chi0);
    if (chi.has_rho()) {
        const auto H = engine.complex_hessian(geom, chi.rho);
        for (std::size_t i = 0; i < f.values.size(); ++i) f.values[i] += H.values[i];
    }
    return f;
}

inline HermitianField field_sum(const HermitianField& a, const HermitianField& b) {
    HermitianField out = a;
    for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] += b.values[i];
    return out;
}

}  // namespace hflow
