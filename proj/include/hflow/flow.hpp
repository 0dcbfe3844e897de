#pragma once

// Explicit adaptive RK4 integration of d_t u = f(lambda[u]) - psi with
// cone-backoff: a tentative step that leaves the admissible cone (or moves
// farther than step_cap) halves dt and retries; successful steps grow dt by
// 1.25x up to the parabolic stability limit of the linearized symbol.
// Convergence is declared on osc(d_t u), whose exponential decay is the
// quantity the theory controls; the drift constant c is the mean of d_t u.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "functional.hpp"
#include "geometry.hpp"
#include "operators.hpp"
#include "spectral.hpp"
#include "wedge.hpp"

namespace hflow {

struct FlowTolerances {
    double tol_osc = 1e-9;
    double tol_res = 1e-7;
    double cone_floor = 1e-8;
    double t_max = 200.0;
    double cfl = 0.85;
    double step_cap = 0.25;
    double dt_init = 0.0;  // 0 = automatic from the stability bound
    int max_retries = 40;
    int snapshot_every = 0;  // 0 = final snapshot only
};

struct FlowState {
    ScalarField u;
    double t = 0.0;
    double dt = 0.0;
    long step_count = 0;
};

struct DiagRecord {
    double t = 0.0;
    double dt = 0.0;
    double c_t = 0.0;               // mean of d_t u
    double osc_dtu = 0.0;           // max - min of d_t u
    double max_dtu = 0.0;
    double min_dtu = 0.0;
    double cone_margin = 0.0;       // min over grid of min_j sigma_j
    double ellipticity_trace = 0.0; // min over grid of sum_i f_i
    double I_k = 0.0;
    double h_t = 0.0;               // I_ell(u) / integral chi^ell ^ alpha^{n-ell}
    double residual = 0.0;          // max |f - psi - c_t|
};

/// Cone violation located on the grid.
struct FieldConeViolation : ConeViolation {
    std::size_t point;
    double margin;
    FieldConeViolation(int j, std::size_t p, double m, const std::string& what)
        : ConeViolation(j, what), point(p), margin(m) {}
};

/// Raised when step() exhausts its retries.
struct ConeExit : std::runtime_error {
    double t;
    double dt;
    ConeExit(double t_, double dt_, const std::string& what) : std::runtime_error(what), t(t_), dt(dt_) {}
};

struct RhsEval {
    ScalarField value;          // f(lambda[u]) - psi
    HermitianField g;           // chi + i d dbar u (reused by the functionals)
    double cone_margin = 0.0;
    double trace_min = 0.0;
    double grad_max = 0.0;
};

/// Bundles the static data of one flow: geometry, transform plans, chi field,
/// operator, psi. The integrator owns its FlowState exclusively; this context
/// is immutable during a run.
class FlowContext {
  public:
    FlowContext(const TorusGeometry& geom, const ChiSpec& chi, const OperatorSpec& op, ScalarField psi)
        : geom_(geom),
          engine_(geom),
          op_(op),
          psi_(std::move(psi)),
          evaluator_(op),
          chi_spec_(chi),
          chi_(hflow::chi_field(geom, engine_, chi)) {
        op_.validate();
        if (op_.n != geom.n) throw ConfigError("flow: operator dimension does not match geometry");
        if (psi_.values.size() != geom.points) throw ConfigError("flow: psi has wrong grid size");
        if (op_.has_ell()) {
            ik_den_ = class_integral(geom_, chi_, op_.ell);
            if (!(ik_den_ > 0.0))
                throw ConfigError("flow: integral of chi^ell ^ alpha^{n-ell} is not positive");
        }
    }

    const TorusGeometry& geom() const { return geom_; }
    const SpectralEngine& engine() const { return engine_; }
    const OperatorSpec& op() const { return op_; }
    const ScalarField& psi() const { return psi_; }
    const HermitianField& chi() const { return chi_; }
    const ChiSpec& chi_spec() const { return chi_spec_; }

    /// f(lambda[u]) - psi with admissibility statistics. Throws
    /// FieldConeViolation (worst point and margin) if u is not admissible.
    RhsEval rhs(const ScalarField& u) const {
        RhsEval out;
        out.g = field_sum(chi_, engine_.complex_hessian(geom_, u));
        const int n = geom_.n;
        lambda_buf_.resize(geom_.points * static_cast<std::size_t>(n));
        eigenvalues_field_into(geom_, out.g, lambda_buf_.data());

        const Cone cone = op_.cone();
        double worst = std::numeric_limits<double>::infinity();
        std::size_t worst_point = 0;
        for (std::size_t p = 0; p < geom_.points; ++p) {
            const std::span<const double> lam(lambda_buf_.data() + p * static_cast<std::size_t>(n),
                                              static_cast<std::size_t>(n));
            const double m = hflow::cone_margin(lam, cone);
            if (m < worst) {
                worst = m;
                worst_point = p;
            }
        }
        out.cone_margin = worst;
        if (!(worst > 0.0)) {
            throw FieldConeViolation(cone_violation_index(
                                         std::span<const double>(lambda_buf_.data() + worst_point * static_cast<std::size_t>(n),
                                                                 static_cast<std::size_t>(n)),
                                         cone),
                                     worst_point, worst,
                                     "flow: eigenvalues left the cone (worst margin " + std::to_string(worst) +
                                         " at flat grid point " + std::to_string(worst_point) + ")");
        }

        out.value.values.resize(geom_.points);
        out.value.mean_removed = false;
        out.trace_min = std::numeric_limits<double>::infinity();
        out.grad_max = 0.0;
        grad_buf_.resize(static_cast<std::size_t>(n));
        for (std::size_t p = 0; p < geom_.points; ++p) {
            const std::span<const double> lam(lambda_buf_.data() + p * static_cast<std::size_t>(n),
                                              static_cast<std::size_t>(n));
            const auto pt = evaluator_.eval_point(lam, grad_buf_);
            out.value.values[p] = pt.value - psi_.values[p];
            out.trace_min = std::min(out.trace_min, pt.trace);
            out.grad_max = std::max(out.grad_max, pt.grad_max);
        }
        return out;
    }

    /// RK4 parabolic stability limit for the current linearization scale.
    double dt_stability(double grad_max, double cfl) const {
        const double half = geom_.N / 2.0 - 1.0;
        const double max_c2 = 2.0 * geom_.n * half * half;  // largest |m|^2 below Nyquist
        const double p_max = grad_max * geom_.alpha_inv_max_eig;
        const double symbol_max = M_PI * M_PI * p_max * max_c2;
        constexpr double rk4_axis = 2.785;  // real-axis stability reach of RK4
        return cfl * rk4_axis / symbol_max;
    }

    double ik_denominator() const { return ik_den_; }

  private:
    const TorusGeometry& geom_;
    SpectralEngine engine_;
    OperatorSpec op_;
    ScalarField psi_;
    mutable OperatorEvaluator evaluator_;
    ChiSpec chi_spec_;
    HermitianField chi_;
    double ik_den_ = 0.0;
    mutable std::vector<double> lambda_buf_;
    mutable std::vector<double> grad_buf_;
};

struct StepResult {
    FlowState state;
    RhsEval rhs;         // at the accepted state
    double dt_used = 0;  // the dt that made the step (state.dt is already grown)
    int halvings = 0;
};

/// One adaptive RK4 step from (state, rhs_at_state).
inline StepResult step(const FlowContext& ctx, const FlowState& state, const RhsEval& rhs_at_state,
                       const FlowTolerances& tol) {
    const std::size_t pts = ctx.geom().points;
    const auto& k1 = rhs_at_state.value.values;
    double dt = state.dt;
    ScalarField stage{std::vector<double>(pts), false};

    for (int attempt = 0; attempt <= tol.max_retries; ++attempt) {
        try {
            for (std::size_t p = 0; p < pts; ++p) stage.values[p] = state.u.values[p] + 0.5 * dt * k1[p];
            const auto r2 = ctx.rhs(stage);
            const auto& k2 = r2.value.values;
            for (std::size_t p = 0; p < pts; ++p) stage.values[p] = state.u.values[p] + 0.5 * dt * k2[p];
            const auto r3 = ctx.rhs(stage);
            const auto& k3 = r3.value.values;
            for (std::size_t p = 0; p < pts; ++p) stage.values[p] = state.u.values[p] + dt * k3[p];
            const auto r4 = ctx.rhs(stage);
            const auto& k4 = r4.value.values;

            FlowState next;
            next.u.values.resize(pts);
            next.u.mean_removed = false;
            double max_move = 0.0;
            for (std::size_t p = 0; p < pts; ++p) {
                const double du = dt / 6.0 * (k1[p] + 2.0 * k2[p] + 2.0 * k3[p] + k4[p]);
                next.u.values[p] = state.u.values[p] + du;
                max_move = std::max(max_move, std::abs(du));
            }
            if (max_move > tol.step_cap) throw ConeViolation(0, "step moved farther than step_cap");

            auto rhs_next = ctx.rhs(next.u);
            if (!(rhs_next.cone_margin > tol.cone_floor))
                throw ConeViolation(0, "cone margin fell below cone_floor");

            next.t = state.t + dt;
            next.step_count = state.step_count + 1;
            next.dt = std::min(dt * 1.25, ctx.dt_stability(rhs_next.grad_max, tol.cfl));
            return StepResult{std::move(next), std::move(rhs_next), dt, attempt};
        } catch (const ConeViolation&) {
            dt *= 0.5;
        }
    }
    throw ConeExit(state.t, dt,
                   "flow left the admissible cone: step retries exhausted at t = " + std::to_string(state.t));
}

enum class ExitReason { Converged, ConeExit, TimeLimit };

struct DecayFit {
    double eta = 0.0;
    double r2 = 0.0;
    bool degenerate = false;  // oscillation already at rounding floor
};

/// Least-squares slope of log(osc_dtu) against t over the trailing `window`
/// records; eta = -slope.
inline DecayFit fit_decay(std::span<const DiagRecord> history, std::size_t window) {
    if (window > history.size()) window = history.size();
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = history.size() - window; i < history.size(); ++i) {
        const double osc = history[i].osc_dtu;
        if (osc > 1e-14) pts.emplace_back(history[i].t, std::log(osc));
    }
    if (pts.size() < 3) return DecayFit{0.0, 1.0, true};
    double st = 0, sy = 0;
    for (auto& [t, y] : pts) {
        st += t;
        sy += y;
    }
    const double mt = st / pts.size(), my = sy / pts.size();
    double sxx = 0, sxy = 0, syy = 0;
    for (auto& [t, y] : pts) {
        sxx += (t - mt) * (t - mt);
        sxy += (t - mt) * (y - my);
        syy += (y - my) * (y - my);
    }
    if (sxx == 0.0) return DecayFit{0.0, 1.0, true};
    const double slope = sxy / sxx;
    double r2 = 1.0;
    if (syy > 0.0) {
        const double ss_res = syy - sxy * sxy / sxx;
        r2 = 1.0 - ss_res / syy;
    }
    return DecayFit{-slope, r2, false};
}

/// max(d_t u) must not increase and min(d_t u) must not decrease across
/// accepted steps. The slack absorbs time-discretization error; its scale is
/// taken from the records' own rate of change (10 dt * a local Lipschitz
/// estimate of the right-hand side) plus a rounding floor.
inline bool monitor_max_principle(std::span<const DiagRecord> history) {
    if (history.size() < 2) throw std::invalid_argument("monitor_max_principle: need at least 2 records");
    for (std::size_t i = 1; i < history.size(); ++i) {
        const auto& a = history[i - 1];
        const auto& b = history[i];
        const double lip = std::abs(b.c_t - a.c_t) + std::abs(b.osc_dtu - a.osc_dtu);
        const double slack = 10.0 * lip + 1e-13 * (1.0 + std::abs(a.max_dtu) + std::abs(a.min_dtu));
        if (b.max_dtu > a.max_dtu + slack) return false;
        if (b.min_dtu < a.min_dtu - slack) return false;
    }
    return true;
}

struct RunResult {
    FlowState state;               // final raw state (not normalized)
    ScalarField u_normalized;      // mean-free readout of the limit
    bool converged = false;
    ExitReason reason = ExitReason::TimeLimit;
    double c = 0.0;                // final c_t
    double residual = 0.0;
    std::vector<DiagRecord> history;
    DecayFit decay;                // trailing-half fit
    bool initial_speed_ok = true;  // sup(F(A[u0]) - psi) <= 0 advisory (bounded case)
    std::string cone_exit_message;
};

using StepObserver = std::function<void(const FlowState&, const RhsEval&, const DiagRecord&)>;

inline DiagRecord make_diag(const FlowContext& ctx, const FlowState& state, const RhsEval& rhs,
                            double dt_used) {
    DiagRecord d;
    d.t = state.t;
    d.dt = dt_used;
    const auto& v = rhs.value;
    d.c_t = field_mean(v);
    d.max_dtu = field_max(v);
    d.min_dtu = field_min(v);
    d.osc_dtu = d.max_dtu - d.min_dtu;
    d.cone_margin = rhs.cone_margin;
    d.ellipticity_trace = rhs.trace_min;
    double res = 0.0;
    for (double x : v.values) res = std::max(res, std::abs(x - d.c_t));
    d.residual = res;
    const int kd = ctx.op().top_degree();
    d.I_k = functional_I_fields(ctx.geom(), ctx.chi(), rhs.g, state.u, kd).value;
    if (ctx.op().has_ell()) {
        const double il = functional_I_fields(ctx.geom(), ctx.chi(), rhs.g, state.u, ctx.op().ell).value;
        d.h_t = il / ctx.ik_denominator();
    }
    return d;
}

/// Integrate until osc(d_t u) < tol_osc and residual < tol_res, or t > t_max,
/// or the cone is lost. Emits a DiagRecord for the initial state and for
/// every accepted step.
inline RunResult run(const FlowContext& ctx, const ScalarField& u0, const FlowTolerances& tol,
                     const StepObserver& observer = {}) {
    RunResult out;
    FlowState state;
    state.u = u0;
    state.t = 0.0;

    RhsEval cur = ctx.rhs(state.u);  // throws if u0 is inadmissible
    if (classify(ctx.op()) == GrowthClass::Bounded)
        out.initial_speed_ok = (field_max(cur.value) <= 0.0);

    state.dt = (tol.dt_init > 0.0) ? tol.dt_init : 0.25 * ctx.dt_stability(cur.grad_max, tol.cfl);

    auto record = [&](const RhsEval& r, double dt_used) {
        const DiagRecord d = make_diag(ctx, state, r, dt_used);
        out.history.push_back(d);
        if (observer) observer(state, r, d);
        return d;
    };

    DiagRecord d = record(cur, 0.0);
    auto converged = [&](const DiagRecord& rec) {
        return rec.osc_dtu < tol.tol_osc && rec.residual < tol.tol_res;
    };

    bool done = converged(d);
    while (!done && state.t < tol.t_max) {
        double dt_used = 0.0;
        try {
            auto res = step(ctx, state, cur, tol);
            state = std::move(res.state);
            cur = std::move(res.rhs);
            dt_used = res.dt_used;
        } catch (const ConeExit& e) {
            out.reason = ExitReason::ConeExit;
            out.cone_exit_message = e.what();
            break;
        }
        d = record(cur, dt_used);
        done = converged(d);
    }

    out.state = std::move(state);
    out.converged = done;
    if (done)
        out.reason = ExitReason::Converged;
    else if (out.reason != ExitReason::ConeExit)
        out.reason = ExitReason::TimeLimit;
    out.c = d.c_t;
    out.residual = d.residual;
    out.u_normalized = normalize(ctx.geom(), out.state.u);
    out.decay = fit_decay(out.history, out.history.size() / 2 + 1);
    return out;
}

}  // namespace hflow
