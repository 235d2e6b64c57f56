#ifndef ECODYN_ESTIMATES_HPP
#define ECODYN_ESTIMATES_HPP

#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

#include "ecodyn/dynamics.hpp"
#include "ecodyn/model.hpp"

namespace ecodyn {

// Dimensionless description of a neutral single-resource community.
struct DimensionlessParams {
    double p = 0.0;        // mu / r
    double S_tilde = 0.0;  // S / K
    double eps = 0.0;      // gamma * X_ext / r
    double R = 0.0;        // K * D * gamma / (r^2 * C_bar)
    double C_bar = 1.0;    // mean content coefficient
};

struct BreakEven {
    Vec lambda;                    // break-even concentrations
    Vec beta;                      // threshold-adjusted break-even; NaN where undefined
    std::vector<bool> beta_valid;  // r_i > mu_i + gamma_i X_ext_i
};

struct BiodiversityBounds {
    Vec resource_floor;         // V_k over the alive set
    double v_bar = 0.0;         // m=1 floor, min_i lambda_i
    Vec lambda, beta;
    double upper_rough = 0.0;   // +inf when thresholds vanish
    bool upper_rough_finite = false;
    std::size_t lower_bm = 0;
    std::optional<std::pair<std::size_t, std::size_t>> n_star_bracket;
    bool mass_extinction = false;
    double mass_extinction_margin = 0.0;
};

struct NeutralMultiResult {
    double w = 0.0;          // min_k v_k at equilibrium
    std::size_t k_star = 0;  // limiting resource index
    Vec v_eq;
    double x_eq = 0.0;       // common abundance of the N_e identical species
    bool found = false;      // a consistent limiting index exists
};

// Per-resource floors V_k = max_{i in alive} mu_i K_ik / (r_i - mu_i); Liebig
// growth and viable species required.
Vec resource_floor(const EcosystemParams& params, const std::vector<bool>& alive);

// m = 1 only: lambda_i = mu_i K_i / (r_i - mu_i) and the threshold-adjusted
// beta_i; species violating r > mu + gamma X_ext are flagged, not fatal.
BreakEven break_even(const EcosystemParams& params);

// Closed-form survivor-count bound min_k floor(D_k (S_k - Vbar_k) / Z_k);
// infinite (flagged) when any threshold is zero.
double upper_bound_rough(const EcosystemParams& params);

// Empirical Prop-2 style bound from measured trajectory averages.
double trajectory_upper_bound(const Trajectory& traj, const EcosystemParams& params);

// m = 1, no-extinction model: the set of species guaranteed to persist.
std::vector<std::size_t> lower_bound_bm(const EcosystemParams& params);

// Neutral-case survivor criterion a_j (1 + S/K) < min_i 1/(1 - a_i).
std::vector<std::size_t> neutral_survivor_set(const EcosystemParams& params);

// N_*(v); +inf (reported via the optional) when the cut-off deactivates the
// denominator.
std::optional<std::size_t> n_star(double v, const DimensionlessParams& dimless, double K,
                                  double S);

double u_eps(const DimensionlessParams& dimless);

// Bracket (N_*(K u_eps), N_*(K u_eps) + 1) for the maximal biodiversity.
// Throws std::domain_error when u_eps >= S_tilde (mass extinction regime).
std::pair<std::size_t, std::size_t> n_max_bracket(const DimensionlessParams& dimless,
                                                  double K, double S);

struct MassExtinctionCheck {
    bool survives = false;  // true when the viability condition holds
    double margin = 0.0;    // S_tilde - u_eps
};

MassExtinctionCheck mass_extinction_check(const DimensionlessParams& dimless);

// Neutral multi-resource equilibrium: scans candidate limiting resources,
// solving the scalar balance for w = min_k v_k by bisection.
NeutralMultiResult multi_resource_neutral(const EcosystemParams& params);

// Convenience roll-up used by the CLI `bounds` command.
BiodiversityBounds biodiversity_bounds(const EcosystemParams& params);

}  // namespace ecodyn

#endif
