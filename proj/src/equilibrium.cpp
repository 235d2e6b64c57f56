#include "ecodyn/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ecodyn/dynamics.hpp"

namespace ecodyn {

namespace {

double cutoff_pos(double z, double delta) {
    if (delta <= 0.0) return std::max(z, 0.0);
    return z >= delta ? z : 0.0;
}

// Contraction coefficient evaluated on the alive subset with the per-species
// factor clamped at zero, so doomed species cannot make it negative.
double rho_on_alive(const EcosystemParams& p, const std::vector<bool>& alive) {
    Vec L = lipschitz_constants(p.growth, p.S);
    double rho = 0.0;
    for (std::size_t k = 0; k < p.m; ++k) {
        double sum = 0.0;
        for (std::size_t j = 0; j < p.M; ++j) {
            if (!alive[j]) continue;
            double phiS = evaluate_growth(p.growth, j, p.S);
            sum += p.c(k, j) * L[k] * std::max(2.0 * phiS - p.mu[j], 0.0) /
                   (p.D[k] * p.gamma[j]);
        }
        rho = std::max(rho, sum);
    }
    return rho;
}

}  // namespace

Vec consumption_map(const EcosystemParams& params, const Vec& v, bool thresholds_active,
                    const std::vector<bool>& alive) {
    if (v.size() != params.m)
        throw std::invalid_argument("consumption_map: resource dimension mismatch");
    Vec F(params.m, 0.0);
    for (std::size_t i = 0; i < params.M; ++i) {
        if (!alive[i]) continue;
        double phi = evaluate_growth(params.growth, i, v);
        double eps = thresholds_active ? params.gamma[i] * params.x_ext[i] : 0.0;
        double net = cutoff_pos(phi - params.mu[i], eps);
        if (net == 0.0) continue;
        for (std::size_t k = 0; k < params.m; ++k)
            F[k] += params.c(k, i) / params.gamma[i] * phi * net;
    }
    return F;
}

EquilibriumResult solve_special_equilibrium(const EcosystemParams& params,
                                            bool thresholds_active,
                                            const std::vector<bool>& alive, double tol,
                                            std::size_t max_iter) {
    params.validate();
    if (alive.size() != params.M)
        throw std::invalid_argument("solve_special_equilibrium: alive mask size mismatch");

    EquilibriumResult res;
    const bool any_alive = std::any_of(alive.begin(), alive.end(), [](bool a) { return a; });

    auto step = [&](const Vec& v) {
        Vec F = consumption_map(params, v, thresholds_active, alive);
        Vec g(params.m);
        for (std::size_t k = 0; k < params.m; ++k)
            g[k] = std::clamp(params.S[k] - F[k] / params.D[k], 0.0, params.S[k]);
        return g;
    };

    Vec v_even = params.S;       // iterates 0, 2, 4, ... (nonincreasing)
    Vec v_odd = step(v_even);    // iterates 1, 3, 5, ... (nondecreasing)
    std::size_t iters = 1;
    const double slack = 1e-12;  // round-off allowance on the monotonicity checks

    auto width = [&] {
        double w = 0.0;
        for (std::size_t k = 0; k < params.m; ++k)
            w = std::max(w, v_even[k] - v_odd[k]);
        return w;
    };

    bool closed = !any_alive || width() <= tol;
    while (!closed && iters + 2 <= max_iter) {
        Vec next_even = step(v_odd);
        Vec next_odd = step(next_even);
        ++iters;
        ++iters;
        for (std::size_t k = 0; k < params.m; ++k) {
            if (next_even[k] > v_even[k] + slack || next_odd[k] < v_odd[k] - slack ||
                next_odd[k] > next_even[k] + slack)
                throw std::runtime_error(
                    "solve_special_equilibrium: bracket ordering violated");
            if (!std::isfinite(next_even[k]) || !std::isfinite(next_odd[k]))
                throw std::runtime_error("solve_special_equilibrium: non-finite iterate");
        }
        double move = 0.0;
        for (std::size_t k = 0; k < params.m; ++k)
            move = std::max({move, v_even[k] - next_even[k], next_odd[k] - v_odd[k]});
        v_even = std::move(next_even);
        v_odd = std::move(next_odd);
        if (width() <= tol) {
            closed = true;
        } else if (move <= slack) {
            break;  // both sequences stalled; the bracket will not close
        }
    }

    // With one resource the map v -> step(v) is nonincreasing, so v - step(v)
    // is increasing and its unique root lies in the stalled bracket.  Bisect
    // there when plain iteration enters a two-cycle instead of closing.
    if (!closed && any_alive && params.m == 1) {
        double lo = v_odd[0], hi = v_even[0];
        while (hi - lo > tol && iters < max_iter) {
            double mid = 0.5 * (lo + hi);
            double g = step(Vec{mid})[0];
            ++iters;
            (mid < g ? lo : hi) = mid;
        }
        v_odd[0] = lo;
        v_even[0] = hi;
        closed = hi - lo <= tol;
    }

    res.v_lo = any_alive ? v_odd : params.S;
    res.v_hi = v_even;
    res.iterations = iters;
    res.v_eq.resize(params.m);
    for (std::size_t k = 0; k < params.m; ++k)
        res.v_eq[k] = 0.5 * (res.v_lo[k] + res.v_hi[k]);

    res.x_eq.assign(params.M, 0.0);
    for (std::size_t i = 0; i < params.M; ++i) {
        if (!alive[i]) continue;
        double phi = evaluate_growth(params.growth, i, res.v_eq);
        double eps = thresholds_active ? params.gamma[i] * params.x_ext[i] : 0.0;
        res.x_eq[i] = cutoff_pos(phi - params.mu[i], eps) / params.gamma[i];
    }

    Vec F = consumption_map(params, res.v_eq, thresholds_active, alive);
    double defect = 0.0;
    for (std::size_t k = 0; k < params.m; ++k)
        defect = std::max(defect,
                          std::abs(params.D[k] * (params.S[k] - res.v_eq[k]) - F[k]));
    res.residual = defect;
    res.unique_certified = closed && rho_on_alive(params, alive) <= 1.0;
    return res;
}

AsymptoticEquilibrium asymptotic_equilibrium(const EcosystemParams& params) {
    params.validate();
    AsymptoticEquilibrium out;
    out.d = *std::min_element(params.D.begin(), params.D.end());
    out.x_eq.resize(params.M);
    for (std::size_t i = 0; i < params.M; ++i) {
        double phiS = evaluate_growth(params.growth, i, params.S);
        out.x_eq[i] = std::max(phiS - params.mu[i], 0.0) / params.gamma[i];
    }
    out.v_eq.resize(params.m);
    for (std::size_t k = 0; k < params.m; ++k) {
        double sum = 0.0;
        for (std::size_t i = 0; i < params.M; ++i) {
            double phiS = evaluate_growth(params.growth, i, params.S);
            sum += params.c(k, i) * phiS * std::max(phiS - params.mu[i], 0.0) /
                   params.gamma[i];
        }
        out.v_eq[k] = params.S[k] - sum / params.D[k];
    }
    return out;
}

EquilibriumDefect equilibrium_consistency_check(const EcosystemParams& params,
                                                const EquilibriumResult& eq,
                                                bool thresholds_active,
                                                const std::vector<bool>& alive) {
    State s;
    s.t = 0.0;
    s.x = eq.x_eq;
    s.v = eq.v_eq;
    s.alive = alive;
    Vec dy = rhs(params, s);
    EquilibriumDefect rep;
    for (double d : dy) rep.defect = std::max(rep.defect, std::abs(d));
    if (thresholds_active) {
        for (std::size_t i = 0; i < params.M; ++i) {
            if (!alive[i]) continue;
            if (eq.x_eq[i] != 0.0 && eq.x_eq[i] <= params.x_ext[i]) rep.thresholds_ok = false;
        }
    }
    return rep;
}

}  // namespace ecodyn
