#include "ecodyn/estimates.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ecodyn {

namespace {

double cutoff_pos(double z, double delta) {
    if (delta <= 0.0) return std::max(z, 0.0);
    return z >= delta ? z : 0.0;
}

// Floor with a relative slack so representation round-off a few ulps under
// an exact integer does not drop the count by one.
double floor_tol(double z) { return std::floor(z * (1.0 + 1e-12)); }

bool nearly_equal(double a, double b) {
    return std::abs(a - b) <= 1e-9 * std::max({1.0, std::abs(a), std::abs(b)});
}

// All species share r, mu, gamma, K and X_ext (the neutral setting).
bool is_neutral(const EcosystemParams& p) {
    for (std::size_t i = 1; i < p.M; ++i) {
        if (!nearly_equal(p.mu[i], p.mu[0]) || !nearly_equal(p.gamma[i], p.gamma[0]) ||
            !nearly_equal(p.growth.r[i], p.growth.r[0]) ||
            !nearly_equal(p.x_ext[i], p.x_ext[0]))
            return false;
        for (std::size_t k = 0; k < p.m; ++k)
            if (!nearly_equal(p.growth.K(i, k), p.growth.K(0, k))) return false;
    }
    for (std::size_t k = 1; k < p.m; ++k)
        if (!nearly_equal(p.growth.K(0, k), p.growth.K(0, 0))) return false;
    return true;
}

}  // namespace

Vec resource_floor(const EcosystemParams& params, const std::vector<bool>& alive) {
    Vec V(params.m, 0.0);
    bool any = false;
    for (std::size_t i = 0; i < params.M; ++i) {
        if (!alive[i]) continue;
        any = true;
        double denom = params.growth.r[i] - params.mu[i];
        if (denom <= 0.0)
            throw std::domain_error("resource_floor: r_i <= mu_i; filter doomed species");
        for (std::size_t k = 0; k < params.m; ++k)
            V[k] = std::max(V[k], params.mu[i] * params.growth.K(i, k) / denom);
    }
    if (!any) throw std::invalid_argument("resource_floor: empty alive set");
    return V;
}

BreakEven break_even(const EcosystemParams& params) {
    if (params.m != 1)
        throw std::invalid_argument("break_even: defined for a single resource");
    BreakEven out;
    out.lambda.resize(params.M);
    out.beta.resize(params.M);
    out.beta_valid.resize(params.M);
    for (std::size_t i = 0; i < params.M; ++i) {
        double r = params.growth.r[i], mu = params.mu[i], K = params.growth.K(i, 0);
        double gx = params.gamma[i] * params.x_ext[i];
        out.lambda[i] = r > mu ? mu * K / (r - mu)
                               : std::numeric_limits<double>::quiet_NaN();
        if (r > mu + gx) {
            out.beta[i] = (mu + gx) * K / (r - mu - gx);
            out.beta_valid[i] = true;
        } else {
            out.beta[i] = std::numeric_limits<double>::quiet_NaN();
            out.beta_valid[i] = false;
        }
    }
    return out;
}

double upper_bound_rough(const EcosystemParams& params) {
    for (double x : params.x_ext)
        if (x <= 0.0) return std::numeric_limits<double>::infinity();
    double bound = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < params.m; ++k) {
        double vbar = std::numeric_limits<double>::infinity();
        double z = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < params.M; ++i) {
            double denom = params.growth.r[i] - params.mu[i];
            if (denom <= 0.0)
                throw std::domain_error("upper_bound_rough: r_i <= mu_i");
            vbar = std::min(vbar, params.mu[i] * params.growth.K(i, k) / denom);
            z = std::min(z, params.c(k, i) * params.mu[i] * params.x_ext[i]);
        }
        if (params.S[k] <= vbar) return 0.0;
        bound = std::min(bound, floor_tol(params.D[k] * (params.S[k] - vbar) / z));
    }
    return bound;
}

double trajectory_upper_bound(const Trajectory& traj, const EcosystemParams& params) {
    if (traj.samples.empty())
        throw std::invalid_argument("trajectory_upper_bound: empty trajectory");
    const std::vector<bool>& alive = traj.samples.back().alive;
    std::size_t n_e = traj.samples.back().n_alive();
    if (n_e == 0)
        throw std::invalid_argument("trajectory_upper_bound: all species extinct");
    Vec V = resource_floor(params, alive);
    double bound = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < params.m; ++k) {
        double theta = 0.0;
        for (std::size_t i = 0; i < params.M; ++i) {
            if (!alive[i]) continue;
            double xavg = time_average(traj, params, Quantity::Abundance, i);
            theta += params.c(k, i) *
                     (params.mu[i] + params.gamma[i] * params.x_ext[i]) * xavg;
        }
        theta /= static_cast<double>(n_e);
        if (theta <= 0.0) continue;
        bound = std::min(bound, floor_tol(params.D[k] * (params.S[k] - V[k]) / theta));
    }
    return bound;
}

std::vector<std::size_t> lower_bound_bm(const EcosystemParams& params) {
    if (params.m != 1)
        throw std::invalid_argument("lower_bound_bm: defined for a single resource");
    double vbar = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < params.M; ++i) {
        double denom = params.growth.r[i] - params.mu[i];
        if (denom > 0.0)
            vbar = std::min(vbar, params.mu[i] * params.growth.K(i, 0) / denom);
    }
    std::vector<std::size_t> bm;
    if (!std::isfinite(vbar)) return bm;
    for (std::size_t i = 0; i < params.M; ++i) {
        double lhs = params.growth.r[i] * vbar / (params.growth.K(i, 0) + params.S[0]);
        if (lhs > params.mu[i]) bm.push_back(i);
    }
    return bm;
}

std::vector<std::size_t> neutral_survivor_set(const EcosystemParams& params) {
    if (params.m != 1)
        throw std::invalid_argument("neutral_survivor_set: single resource only");
    double K = params.growth.K(0, 0);
    double rhs = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < params.M; ++i) {
        double a = params.mu[i] / params.growth.r[i];
        if (a < 1.0) rhs = std::min(rhs, 1.0 / (1.0 - a));
    }
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < params.M; ++j) {
        double a = params.mu[j] / params.growth.r[j];
        if (a * (1.0 + params.S[0] / K) < rhs) out.push_back(j);
    }
    return out;
}

std::optional<std::size_t> n_star(double v, const DimensionlessParams& dimless, double K,
                                  double S) {
    if (v <= 0.0) return std::nullopt;
    double z = cutoff_pos(v / (K + v) - dimless.p, dimless.eps);
    if (z <= 0.0) return std::nullopt;
    double val = dimless.R * (S - v) * (K + v) / (K * v * z);
    if (val <= 0.0) return 0;
    return static_cast<std::size_t>(floor_tol(val));
}

double u_eps(const DimensionlessParams& dimless) {
    double denom = 1.0 - dimless.p - dimless.eps;
    if (denom <= 0.0)
        throw std::domain_error("u_eps: p + eps >= 1, no viable equilibrium");
    return (dimless.p + dimless.eps) / denom;
}

std::pair<std::size_t, std::size_t> n_max_bracket(const DimensionlessParams& dimless,
                                                  double K, double S) {
    double u = u_eps(dimless);
    if (u >= dimless.S_tilde)
        throw std::domain_error("n_max_bracket: u_eps >= S_tilde (mass extinction)");
    double v = K * u;
    // At v = K u_eps the cut-off argument equals eps exactly; evaluate with the
    // analytic value to avoid a round-off drop below the cut.
    double val = dimless.R * (S - v) * (K + v) / (K * v * dimless.eps);
    auto lo = static_cast<std::size_t>(floor_tol(val));
    return {lo, lo + 1};
}

MassExtinctionCheck mass_extinction_check(const DimensionlessParams& dimless) {
    MassExtinctionCheck out;
    double denom = 1.0 - dimless.p - dimless.eps;
    if (denom <= 0.0) {
        out.survives = false;
        out.margin = -std::numeric_limits<double>::infinity();
        return out;
    }
    double u = (dimless.p + dimless.eps) / denom;
    out.margin = dimless.S_tilde - u;
    out.survives = u < dimless.S_tilde;  // strict, equality routes to extinction
    return out;
}

NeutralMultiResult multi_resource_neutral(const EcosystemParams& params) {
    params.validate();
    if (!is_neutral(params))
        throw std::invalid_argument("multi_resource_neutral: parameters are not neutral");
    const double r = params.growth.r[0], mu = params.mu[0], gamma = params.gamma[0];
    const double K = params.growth.K(0, 0);
    const double eps = gamma * params.x_ext[0];
    auto phi = [&](double w) { return r * w / (K + w); };
    auto consumption = [&](std::size_t k, double w) {
        double net = cutoff_pos(phi(w) - mu, eps);
        double sum = 0.0;
        for (std::size_t i = 0; i < params.M; ++i) sum += params.c(k, i);
        return sum * phi(w) * net / gamma;
    };

    NeutralMultiResult best;
    for (std::size_t ks = 0; ks < params.m; ++ks) {
        // w = S_ks - F_ks(w)/D_ks, a decreasing right-hand side: bisect.
        auto f = [&](double w) {
            return w - (params.S[ks] - consumption(ks, w) / params.D[ks]);
        };
        double lo = 0.0, hi = params.S[ks];
        if (f(hi) < 0.0) continue;
        for (int it = 0; it < 200; ++it) {
            double mid = 0.5 * (lo + hi);
            (f(mid) < 0.0 ? lo : hi) = mid;
        }
        double w = 0.5 * (lo + hi);
        Vec v(params.m);
        bool ok = true;
        for (std::size_t k = 0; k < params.m; ++k) {
            v[k] = params.S[k] - consumption(k, w) / params.D[k];
            if (k != ks && v[k] < w - 1e-9) ok = false;
        }
        if (ok) {
            best.w = w;
            best.k_star = ks;
            best.v_eq = v;
            best.x_eq = cutoff_pos(phi(w) - mu, eps) / gamma;
            best.found = true;
            break;  // lowest consistent index wins
        }
    }
    return best;
}

BiodiversityBounds biodiversity_bounds(const EcosystemParams& params) {
    params.validate();
    BiodiversityBounds out;
    std::vector<bool> all(params.M, true);
    out.resource_floor = resource_floor(params, all);
    out.upper_rough = upper_bound_rough(params);
    out.upper_rough_finite = std::isfinite(out.upper_rough);
    if (params.m == 1) {
        BreakEven be = break_even(params);
        out.lambda = be.lambda;
        out.beta = be.beta;
        double vbar = std::numeric_limits<double>::infinity();
        for (double l : be.lambda)
            if (std::isfinite(l)) vbar = std::min(vbar, l);
        out.v_bar = vbar;
        out.lower_bm = lower_bound_bm(params).size();
        if (is_neutral(params)) {
            DimensionlessParams d;
            double r = params.growth.r[0], K = params.growth.K(0, 0);
            d.p = params.mu[0] / r;
            d.S_tilde = params.S[0] / K;
            d.eps = params.gamma[0] * params.x_ext[0] / r;
            double cbar = 0.0;
            for (std::size_t i = 0; i < params.M; ++i) cbar += params.c(0, i);
            cbar /= static_cast<double>(params.M);
            d.C_bar = cbar;
            d.R = K * params.D[0] * params.gamma[0] / (r * r * cbar);
            auto check = mass_extinction_check(d);
            out.mass_extinction = !check.survives;
            out.mass_extinction_margin = check.margin;
            if (check.survives && d.eps > 0.0)
                out.n_star_bracket = n_max_bracket(d, K, params.S[0]);
        }
    }
    return out;
}

}  // namespace ecodyn
