#pragma once

// The operator catalog f(lambda): concave, monotone symmetric functions of
// the eigenvalues of alpha^{-1}(chi + Hessian u), each with its domain cone,
// analytic gradient, and the one-eigenvalue-to-infinity limit f_inf used by
// the subsolution criterion. Operators split into the unbounded case
// (f_inf = +inf: determinant/Hessian logarithms) and the bounded case
// (quotient types, finite f_inf).

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "symm.hpp"

namespace hflow {

enum class OperatorKind {
    LogMA,         // log sigma_n, cone Gamma_n
    LogHessian,    // log sigma_k, cone Gamma_k
    JQuotient,     // c - sigma_l/sigma_k, cone Gamma_k
    LogQuotient,   // log(sigma_k/sigma_l), cone Gamma_k
    InvQuotient,   // -(sigma_l/sigma_k)^{1/(k-l)}, cone Gamma_k
    MixedHessian,  // c - sum_j c_j sigma_j / sigma_k, cone Gamma_k
    LinearTrace,   // sigma_1; exactly the linear heat flow, used as a test oracle
};

enum class GrowthClass { Bounded, Unbounded };

struct OperatorSpec {
    OperatorKind kind = OperatorKind::LogMA;
    int n = 1;                   // ambient dimension (sets k for LogMA)
    int k = 1;
    int ell = 0;                 // quotient types only, 1 <= ell < k
    std::vector<double> coeffs;  // MixedHessian c_1..c_ell, >= 0, not all zero
    double c_const = 0.0;        // additive constant, JQuotient/MixedHessian

    void validate() const;
    Cone cone() const;
    /// degree of the top symmetric function in f (the k of sigma_k)
    int top_degree() const {
        if (kind == OperatorKind::LogMA) return n;
        if (kind == OperatorKind::LinearTrace) return 1;
        return k;
    }
    bool has_ell() const {
        return kind == OperatorKind::JQuotient || kind == OperatorKind::LogQuotient ||
               kind == OperatorKind::InvQuotient || kind == OperatorKind::MixedHessian;
    }
};

struct OperatorEval {
    double value = 0.0;
    std::vector<double> gradient;  // f_i, strictly positive on the cone
    double trace = 0.0;            // sum_i f_i
};

/// Thrown when lambda leaves the operator's cone; carries the violated sigma index.
struct ConeViolation : std::runtime_error {
    int sigma_index;
    ConeViolation(int j, const std::string& what) : std::runtime_error(what), sigma_index(j) {}
};

inline void OperatorSpec::validate() const {
    if (n < 1) throw std::invalid_argument("operator: n must be >= 1");
    switch (kind) {
        case OperatorKind::LogMA:
            break;
        case OperatorKind::LogHessian:
        case OperatorKind::LinearTrace:
            if (k < 1 || k > n) throw std::invalid_argument("operator: need 1 <= k <= n");
            break;
        case OperatorKind::JQuotient:
        case OperatorKind::LogQuotient:
        case OperatorKind::InvQuotient:
        case OperatorKind::MixedHessian:
            if (!(1 <= ell && ell < k && k <= n))
                throw std::invalid_argument("operator: need 1 <= ell < k <= n");
            if (kind == OperatorKind::MixedHessian) {
                if (static_cast<int>(coeffs.size()) != ell)
                    throw std::invalid_argument("operator: mixed coeffs must have length ell");
                bool any = false;
                for (double c : coeffs) {
                    if (c < 0.0) throw std::invalid_argument("operator: mixed coeffs must be >= 0");
                    if (c > 0.0) any = true;
                }
                if (!any) throw std::invalid_argument("operator: mixed coeffs must not all vanish");
            }
            break;
    }
}

inline Cone OperatorSpec::cone() const {
    switch (kind) {
        case OperatorKind::LogMA: return Cone{n};
        case OperatorKind::LinearTrace: return Cone{1};
        default: return Cone{k};
    }
}

inline GrowthClass classify(const OperatorSpec& op) {
    switch (op.kind) {
        case OperatorKind::LogMA:
        case OperatorKind::LogHessian:
        case OperatorKind::LinearTrace:
            return GrowthClass::Unbounded;
        default:
            return GrowthClass::Bounded;
    }
}

namespace detail {

inline void require_in_cone(const OperatorSpec& op, std::span<const double> lambda) {
    if (static_cast<int>(lambda.size()) != op.n)
        throw std::invalid_argument("operator eval: lambda has wrong length");
    const int bad = cone_violation_index(lambda, op.cone(), 0.0);
    if (bad != 0)
        throw ConeViolation(bad, "operator eval: sigma_" + std::to_string(bad) + " <= 0, lambda outside cone");
}

// value and gradient of q = sigma_l / sigma_k
struct QuotientEval {
    double q;
    std::vector<double> grad;
};

inline QuotientEval quotient(std::span<const double> lambda, int l, int k) {
    const double sl = sigma(lambda, l);
    const double sk = sigma(lambda, k);
    const auto gl = sigma_gradient(lambda, l);
    const auto gk = sigma_gradient(lambda, k);
    QuotientEval out;
    out.q = sl / sk;
    out.grad.resize(lambda.size());
    for (std::size_t i = 0; i < lambda.size(); ++i)
        out.grad[i] = (gl[i] * sk - sl * gk[i]) / (sk * sk);
    return out;
}

}  // namespace detail

/// f(lambda) with analytic gradient; lambda must lie in the operator's cone.
inline OperatorEval eval(const OperatorSpec& op, std::span<const double> lambda) {
    detail::require_in_cone(op, lambda);
    OperatorEval out;
    out.gradient.resize(lambda.size());
    switch (op.kind) {
        case OperatorKind::LogMA:
        case OperatorKind::LogHessian: {
            const int k = (op.kind == OperatorKind::LogMA) ? op.n : op.k;
            const double sk = sigma(lambda, k);
            const auto gk = sigma_gradient(lambda, k);
            out.value = std::log(sk);
            for (std::size_t i = 0; i < lambda.size(); ++i) out.gradient[i] = gk[i] / sk;
            break;
        }
        case OperatorKind::LinearTrace: {
            out.value = sigma(lambda, 1);
            const double fi = 1.0 / double(op.n);
            for (auto& g : out.gradient) g = fi;
            break;
        }
        case OperatorKind::JQuotient: {
            const auto qe = detail::quotient(lambda, op.ell, op.k);
            out.value = op.c_const - qe.q;
            for (std::size_t i = 0; i < lambda.size(); ++i) out.gradient[i] = -qe.grad[i];
            break;
        }
        case OperatorKind::LogQuotient: {
            const double sl = sigma(lambda, op.ell);
            const double sk = sigma(lambda, op.k);
            const auto gl = sigma_gradient(lambda, op.ell);
            const auto gk = sigma_gradient(lambda, op.k);
            out.value = std::log(sk / sl);
            for (std::size_t i = 0; i < lambda.size(); ++i)
                out.gradient[i] = gk[i] / sk - gl[i] / sl;
            break;
        }
        case OperatorKind::InvQuotient: {
            const auto qe = detail::quotient(lambda, op.ell, op.k);
            const double p = 1.0 / double(op.k - op.ell);
            const double v = std::pow(qe.q, p);
            out.value = -v;
            // d(-q^p) = -p q^{p-1} dq
            const double s = -p * v / qe.q;
            for (std::size_t i = 0; i < lambda.size(); ++i) out.gradient[i] = s * qe.grad[i];
            break;
        }
        case OperatorKind::MixedHessian: {
            const double sk = sigma(lambda, op.k);
            const auto gk = sigma_gradient(lambda, op.k);
            double acc = 0.0;
            std::vector<double> gacc(lambda.size(), 0.0);
            for (int j = 1; j <= op.ell; ++j) {
                const double cj = op.coeffs[static_cast<std::size_t>(j - 1)];
                if (cj == 0.0) continue;
                const double sj = sigma(lambda, j);
                const auto gj = sigma_gradient(lambda, j);
                acc += cj * sj;
                for (std::size_t i = 0; i < lambda.size(); ++i) gacc[i] += cj * gj[i];
            }
            out.value = op.c_const - acc / sk;
            for (std::size_t i = 0; i < lambda.size(); ++i)
                out.gradient[i] = (acc * gk[i] - gacc[i] * sk) / (sk * sk);
            break;
        }
    }
    out.trace = 0.0;
    for (double g : out.gradient) out.trace += g;
    return out;
}

inline OperatorEval eval(const OperatorSpec& op, const Eigenvalues& lambda) {
    return eval(op, std::span<const double>(lambda.values));
}

/// Limit of f as one eigenvalue runs to +infinity, as a function of the
/// remaining (n-1)-tuple lambda_prime. Closed forms for the bounded case use
/// sigma normalized in dimension n-1; that bookkeeping is what makes
/// lim sigma_l(lambda)/sigma_k(lambda) = l sigma_{l-1}(lambda')/(k sigma_{k-1}(lambda'))
/// an identity. Returns +inf for the unbounded operators.
inline double f_infinity(const OperatorSpec& op, std::span<const double> lambda_prime) {
    if (static_cast<int>(lambda_prime.size()) != op.n - 1)
        throw std::invalid_argument("f_infinity: lambda_prime must have length n-1");
    if (classify(op) == GrowthClass::Unbounded)
        return std::numeric_limits<double>::infinity();

    // projected cone: Gamma_{k-1} in dimension n-1
    if (op.k >= 2) {
        const int bad = cone_violation_index(lambda_prime, Cone{op.k - 1}, 0.0);
        if (bad != 0)
            throw ConeViolation(bad, "f_infinity: lambda_prime outside Gamma_{k-1}");
    }

    const double skm1 = sigma(lambda_prime, op.k - 1);
    switch (op.kind) {
        case OperatorKind::JQuotient: {
            const double slm1 = sigma(lambda_prime, op.ell - 1);
            return op.c_const - double(op.ell) * slm1 / (double(op.k) * skm1);
        }
        case OperatorKind::LogQuotient: {
            const double slm1 = sigma(lambda_prime, op.ell - 1);
            return std::log(double(op.k) * skm1 / (double(op.ell) * slm1));
        }
        case OperatorKind::InvQuotient: {
            const double slm1 = sigma(lambda_prime, op.ell - 1);
            const double r = double(op.ell) * slm1 / (double(op.k) * skm1);
            return -std::pow(r, 1.0 / double(op.k - op.ell));
        }
        case OperatorKind::MixedHessian: {
            double num = 0.0;
            for (int j = 1; j <= op.ell; ++j)
                num += double(j) * op.coeffs[static_cast<std::size_t>(j - 1)] * sigma(lambda_prime, j - 1);
            return op.c_const - num / (double(op.k) * skm1);
        }
        default:
            return std::numeric_limits<double>::infinity();  // unreachable
    }
}

/// Reusable evaluation context for tight per-grid-point loops; no allocation
/// after construction. Formulas match eval() exactly.
class OperatorEvaluator {
  public:
    explicit OperatorEvaluator(const OperatorSpec& op) : op_(op) {
        op_.validate();
        const auto n = static_cast<std::size_t>(op.n);
        const auto deg = static_cast<std::size_t>(top_deg()) + 1;
        e_.resize(deg);
        ce_.resize(deg);
        rest_.resize(n > 0 ? n - 1 : 0);
        num_grad_.resize(n);
        den_grad_.resize(n);
    }

    struct Point {
        double value;
        double trace;
        double grad_max;
    };

    /// gradient_out must have length n; throws ConeViolation off the cone.
    Point eval_point(std::span<const double> lambda, std::span<double> gradient_out) {
        const int n = op_.n;
        const int k = top_deg();
        elementary_sym_all(lambda, k, e_.data());
        {
            // cone test on running sigma_j
            double cb = 1.0;  // C(n,j) built incrementally
            for (int j = 1; j <= op_.cone().k; ++j) {
                cb = cb * double(n - j + 1) / double(j);
                if (!(e_[static_cast<std::size_t>(j)] / cb > 0.0))
                    throw ConeViolation(j, "operator eval: sigma_" + std::to_string(j) + " <= 0");
            }
        }
        // per-direction complements e_m(lambda \ i), m <= k-1
        auto complements = [&](int i) {
            std::size_t q = 0;
            for (int p = 0; p < n; ++p)
                if (p != i) rest_[q++] = lambda[static_cast<std::size_t>(p)];
            elementary_sym_all(std::span<const double>(rest_.data(), q), k - 1, ce_.data());
        };

        Point out{0.0, 0.0, 0.0};
        switch (op_.kind) {
            case OperatorKind::LinearTrace: {
                out.value = e_[1] / double(n);
                const double fi = 1.0 / double(n);
                for (int i = 0; i < n; ++i) gradient_out[static_cast<std::size_t>(i)] = fi;
                break;
            }
            case OperatorKind::LogMA:
            case OperatorKind::LogHessian: {
                const double sk = e_[static_cast<std::size_t>(k)] / binomial(n, k);
                out.value = std::log(sk);
                const double cnk = binomial(n, k);
                for (int i = 0; i < n; ++i) {
                    complements(i);
                    gradient_out[static_cast<std::size_t>(i)] = ce_[static_cast<std::size_t>(k - 1)] / cnk / sk;
                }
                break;
            }
            case OperatorKind::JQuotient:
            case OperatorKind::LogQuotient:
            case OperatorKind::InvQuotient: {
                const int l = op_.ell;
                const double sl = e_[static_cast<std::size_t>(l)] / binomial(n, l);
                const double sk = e_[static_cast<std::size_t>(k)] / binomial(n, k);
                for (int i = 0; i < n; ++i) {
                    complements(i);
                    num_grad_[static_cast<std::size_t>(i)] = ce_[static_cast<std::size_t>(l - 1)] / binomial(n, l);
                    den_grad_[static_cast<std::size_t>(i)] = ce_[static_cast<std::size_t>(k - 1)] / binomial(n, k);
                }
                if (op_.kind == OperatorKind::LogQuotient) {
                    out.value = std::log(sk / sl);
                    for (int i = 0; i < n; ++i)
                        gradient_out[static_cast<std::size_t>(i)] =
                            den_grad_[static_cast<std::size_t>(i)] / sk - num_grad_[static_cast<std::size_t>(i)] / sl;
                } else {
                    const double q = sl / sk;
                    double scale;  // d f / d q
                    if (op_.kind == OperatorKind::JQuotient) {
                        out.value = op_.c_const - q;
                        scale = -1.0;
                    } else {
                        const double p = 1.0 / double(k - l);
                        const double v = std::pow(q, p);
                        out.value = -v;
                        scale = -p * v / q;
                    }
                    for (int i = 0; i < n; ++i) {
                        const double qi = (num_grad_[static_cast<std::size_t>(i)] * sk -
                                           sl * den_grad_[static_cast<std::size_t>(i)]) /
                                          (sk * sk);
                        gradient_out[static_cast<std::size_t>(i)] = scale * qi;
                    }
                }
                break;
            }
            case OperatorKind::MixedHessian: {
                const double sk = e_[static_cast<std::size_t>(k)] / binomial(n, k);
                double acc = 0.0;
                for (int j = 1; j <= op_.ell; ++j)
                    acc += op_.coeffs[static_cast<std::size_t>(j - 1)] * e_[static_cast<std::size_t>(j)] / binomial(n, j);
                out.value = op_.c_const - acc / sk;
                for (int i = 0; i < n; ++i) {
                    complements(i);
                    double gacc = 0.0;
                    for (int j = 1; j <= op_.ell; ++j)
                        gacc += op_.coeffs[static_cast<std::size_t>(j - 1)] * ce_[static_cast<std::size_t>(j - 1)] /
                                binomial(n, j);
                    const double gk = ce_[static_cast<std::size_t>(k - 1)] / binomial(n, k);
                    gradient_out[static_cast<std::size_t>(i)] = (acc * gk - gacc * sk) / (sk * sk);
                }
                break;
            }
        }
        for (int i = 0; i < n; ++i) {
            const double g = gradient_out[static_cast<std::size_t>(i)];
            out.trace += g;
            out.grad_max = std::max(out.grad_max, g);
        }
        return out;
    }

    const OperatorSpec& spec() const { return op_; }

  private:
    int top_deg() const { return std::max(op_.top_degree(), op_.cone().k); }
    OperatorSpec op_;
    std::vector<double> e_, ce_, rest_, num_grad_, den_grad_;
};

inline std::string to_string(OperatorKind kind) {
    switch (kind) {
        case OperatorKind::LogMA: return "log_ma";
        case OperatorKind::LogHessian: return "log_hessian";
        case OperatorKind::JQuotient: return "j_quotient";
        case OperatorKind::LogQuotient: return "log_quotient";
        case OperatorKind::InvQuotient: return "inv_quotient";
        case OperatorKind::MixedHessian: return "mixed_hessian";
        case OperatorKind::LinearTrace: return "linear_trace";
    }
    return "?";
}

inline std::optional<OperatorKind> operator_kind_from_string(const std::string& s) {
    if (s == "log_ma") return OperatorKind::LogMA;
    if (s == "log_hessian") return OperatorKind::LogHessian;
    if (s == "j_quotient") return OperatorKind::JQuotient;
    if (s == "log_quotient") return OperatorKind::LogQuotient;
    if (s == "inv_quotient") return OperatorKind::InvQuotient;
    if (s == "mixed_hessian") return OperatorKind::MixedHessian;
    if (s == "linear_trace") return OperatorKind::LinearTrace;
    return std::nullopt;
}

}  // namespace hflow
