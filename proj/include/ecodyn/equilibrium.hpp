#ifndef ECODYN_EQUILIBRIUM_HPP
#define ECODYN_EQUILIBRIUM_HPP

#include <cstddef>
#include <vector>

#include "ecodyn/model.hpp"

namespace ecodyn {

struct EquilibriumResult {
    Vec v_eq;
    Vec x_eq;               // full length M; entries of species outside alive are 0
    Vec v_lo, v_hi;         // two-sided monotone bracket, v_lo <= v_eq <= v_hi
    double residual = 0.0;  // max-norm defect of the fixed-point equation at v_eq
    std::size_t iterations = 0;
    bool unique_certified = false;  // bracket closed and rho <= 1 on the alive set
};

struct EquilibriumDefect {
    double defect = 0.0;        // max-norm of the ODE right-hand side at (x_eq, v_eq)
    bool thresholds_ok = true;  // every species sits above threshold or exactly at 0
};

struct AsymptoticEquilibrium {
    Vec v_eq;
    Vec x_eq;
    double d = 0.0;  // min_k D_k, the expansion parameter
};

// Total consumption F_k(v) over alive species; with thresholds the positive
// part is replaced by the cut-off (.)_{+,eps_i}, eps_i = gamma_i * X_ext_i.
Vec consumption_map(const EcosystemParams& params, const Vec& v, bool thresholds_active,
                    const std::vector<bool>& alive);

// Monotone fixed-point iteration of G(v)_k = S_k - F_k(v)/D_k from v0 = S.
// Even iterates decrease, odd ones increase; their limits bracket v_eq.
// For m = 1 a stalled two-cycle bracket is refined by bisection on v - G(v).
EquilibriumResult solve_special_equilibrium(const EcosystemParams& params,
                                            bool thresholds_active,
                                            const std::vector<bool>& alive,
                                            double tol = 1e-10,
                                            std::size_t max_iter = 100'000);

// Large-turnover first-order expansion of the equilibrium. Requires all
// species viable.
AsymptoticEquilibrium asymptotic_equilibrium(const EcosystemParams& params);

// Residual of the stationarity equations at the candidate equilibrium.
EquilibriumDefect equilibrium_consistency_check(const EcosystemParams& params,
                                                const EquilibriumResult& eq,
                                                bool thresholds_active,
                                                const std::vector<bool>& alive);

}  // namespace ecodyn

#endif
