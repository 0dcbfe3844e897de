#pragma once

// The path functional I_k(phi) = int_0^1 int phi_dot chi_phi^k ^ alpha^{n-k} ds,
// evaluated through its closed form
//
//   I_k(phi) = 1/(k+1) sum_{j=0..k} int phi chi_phi^j ^ chi^{k-j} ^ alpha^{n-k},
//
// which is path independent for closed chi. Conserved (= 0) along J-type and
// mixed flows run at their class constant; decreasing along the log- and
// inverse-quotient flows under the corresponding psi threshold.

#include "geometry.hpp"
#include "spectral.hpp"
#include "wedge.hpp"

namespace hflow {

struct FunctionalValue {
    double value = 0.0;
    int k = 0;
    bool path_independent_checked = false;
};

/// Closed-form I_k with prebuilt fields: chi and chi_phi = chi + i d dbar phi.
inline FunctionalValue functional_I_fields(const TorusGeometry& geom, const HermitianField& chi,
                                           const HermitianField& chi_phi, const ScalarField& phi, int k) {
    if (k < 0 || k > geom.n) throw std::invalid_argument("functional_I: k out of range");
    const auto mixed = mixed_wedge_all(geom, chi_phi, chi, k);
    double acc = 0.0;
    ScalarField tmp{std::vector<double>(geom.points), false};
    for (int j = 0; j <= k; ++j) {
        const auto& w = mixed[static_cast<std::size_t>(j)].values;
        for (std::size_t p = 0; p < geom.points; ++p) tmp.values[p] = phi.values[p] * w[p];
        acc += integrate(geom, tmp);
    }
    return FunctionalValue{acc / double(k + 1), k, false};
}

inline FunctionalValue functional_I(const TorusGeometry& geom, const SpectralEngine& engine,
                                    const ChiSpec& chi, const ScalarField& phi, int k) {
    const auto chi_f = chi_field(geom, engine, chi);
    const auto chi_phi = field_sum(chi_f, engine.complex_hessian(geom, phi));
    return functional_I_fields(geom, chi_f, chi_phi, phi, k);
}

}  // namespace hflow
