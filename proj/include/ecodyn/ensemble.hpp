#ifndef ECODYN_ENSEMBLE_HPP
#define ECODYN_ENSEMBLE_HPP

#include <cstddef>
#include <cstdint>
#include <vector>

#include "ecodyn/dynamics.hpp"
#include "ecodyn/model.hpp"

namespace ecodyn {

struct DistSpec {
    enum class Kind { Uniform, LogNormal };
    Kind kind = Kind::Uniform;
    double a = 0.0, b = 1.0;  // uniform support, or truncation interval for log-normal
    double mean = 0.0, sigma = 1.0;

    static DistSpec point(double value) { return {Kind::Uniform, value, value, 0.0, 0.0}; }
    static DistSpec uniform(double a, double b) { return {Kind::Uniform, a, b, 0.0, 0.0}; }
    static DistSpec lognormal(double mean, double sigma, double lo, double hi) {
        return {Kind::LogNormal, lo, hi, mean, sigma};
    }
    double lower() const { return a; }
    double upper() const { return b; }
};

// Single-resource community sampling recipe: per-parameter distributions plus
// the fixed environment (D, S).
struct CommunityDistributions {
    DistSpec mu, gamma, r, K, c, x_ext, x0;
    double D = 1.0;
    double S = 1.0;
};

struct CommunitySample {
    EcosystemParams params;  // m = 1
    Vec x0;                  // initial abundances, strictly above thresholds
    Vec beta;                // generalized break-even per species
    Vec theta;               // per-species consumption scale, Dtheta = c(gx+mu)X
    std::vector<std::size_t> beta_order;  // permutation sorting beta ascending
    std::size_t rejections = 0;           // draws discarded against r > mu + gamma X
};

struct SimOptions {
    double horizon = 3000.0;
    IntegratorOptions integ{1e-8, 1e-10, 1e-10, 1e-9, 5.0};
};

struct RStarReport {
    std::size_t M = 0;
    std::size_t n_e_simulated = 0;
    double n_e_predicted = 0.0;  // (S - beta_min) / <theta>, before rounding
    std::vector<std::size_t> survivors_simulated;
    std::vector<std::size_t> survivors_predicted;
    std::size_t mismatch_count = 0;  // symmetric difference, boundary ties excluded
    double beta_gap = 0.0;           // beta at rank N_e+1 minus rank N_e
    double v_eq = 0.0;               // solver equilibrium on the simulated survivor set
    double v_terminal = 0.0;
    bool converged = false;
    bool rho_certified = false;
};

struct SweepPoint {
    double S = 0.0;
    std::size_t n_e = 0;
    double v_eq = 0.0;
    bool mass_extinct = false;
};

struct RobustnessReport {
    double p_stress = 0.0;
    double r_b_empirical = 0.0;
    double delta_s = 0.0;            // supply step used for the secant
    double delta_ne = 0.0;
    double s_critical = 0.0;         // bisected supply where N_e hits zero
    bool monotone = true;            // N_e nonincreasing along the decreasing grid
    std::vector<SweepPoint> curve;
};

struct BetaGapStatistic {
    double frequency = 0.0;
    double wilson_lo = 0.0;
    double wilson_hi = 0.0;
    std::size_t n_trials = 0;
};

// Draws M i.i.d. parameter tuples; draws violating r > mu + gamma X_ext are
// rejected and redrawn. Deterministic given the seed.
CommunitySample sample_community(const CommunityDistributions& dist, std::size_t M,
                                 std::uint64_t rng_seed);

// Assembly run from v(0) = S: integrates with extinctions, solves the
// equilibrium on the surviving set, and compares against the beta ordering.
RStarReport rstar_experiment(const CommunitySample& sample, const SimOptions& opts);

// Independent trials on a worker pool; results are folded in trial order, so
// the output is identical for any pool width.
std::vector<RStarReport> run_rstar_trials(const CommunityDistributions& dist,
                                          std::size_t M, std::size_t trials,
                                          std::uint64_t seed, const SimOptions& opts,
                                          unsigned threads = 0);

// Empirical Pr{ beta_(n) - beta_min < M^(-1/3) } with a Wilson interval.
BetaGapStatistic beta_gap_statistic(const CommunityDistributions& dist, std::size_t M,
                                    std::size_t n_trials, std::uint64_t rng_seed,
                                    std::size_t n = 3);

// Re-runs assembly at each supply of a decreasing grid (shared initial
// abundances) and bisects the critical supply where the community collapses.
RobustnessReport robustness_sweep(const CommunitySample& sample, const Vec& s_grid,
                                  const SimOptions& opts);

}  // namespace ecodyn

#endif
