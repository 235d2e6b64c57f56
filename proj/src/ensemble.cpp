#include "ecodyn/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "ecodyn/equilibrium.hpp"
#include "ecodyn/rng.hpp"

namespace ecodyn {

namespace {

double draw(CounterRng& rng, const DistSpec& d) {
    switch (d.kind) {
        case DistSpec::Kind::Uniform:
            return d.a == d.b ? d.a : rng.uniform(d.a, d.b);
        case DistSpec::Kind::LogNormal:
            return rng.lognormal_trunc(d.mean, d.sigma, d.a, d.b);
    }
    return 0.0;
}

double median(Vec v) {
    std::sort(v.begin(), v.end());
    std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// One assembly run; shared by the R* experiment and the robustness sweep.
Trajectory run_assembly(const CommunitySample& sample, const SimOptions& opts) {
    State init;
    init.t = 0.0;
    init.x = sample.x0;
    init.v = sample.params.S;
    init.alive.assign(sample.params.M, true);
    return integrate(sample.params, init, opts.horizon, opts.integ);
}

}  // namespace

CommunitySample sample_community(const CommunityDistributions& dist, std::size_t M,
                                 std::uint64_t rng_seed) {
    if (M == 0) throw std::invalid_argument("sample_community: M must be positive");
    CounterRng rng(rng_seed, 0);
    CommunitySample out;
    EcosystemParams& p = out.params;
    p.M = M;
    p.m = 1;
    p.c = Matrix(1, M);
    p.D = {dist.D};
    p.S = {dist.S};
    p.growth.kind = GrowthKind::Holling;
    p.growth.K = Matrix(M, 1);
    p.mu.resize(M);
    p.gamma.resize(M);
    p.x_ext.resize(M);
    p.growth.r.resize(M);
    out.x0.resize(M);
    out.beta.resize(M);
    out.theta.resize(M);

    std::size_t draws = 0;
    for (std::size_t i = 0; i < M; ++i) {
        for (;;) {
            ++draws;
            if (draws > 2 * M && out.rejections * 2 > draws)
                throw std::runtime_error(
                    "sample_community: over half of all draws violate r > mu + gamma*X_ext");
            double mu = draw(rng, dist.mu);
            double gamma = draw(rng, dist.gamma);
            double r = draw(rng, dist.r);
            double K = draw(rng, dist.K);
            double c = draw(rng, dist.c);
            double xext = draw(rng, dist.x_ext);
            if (r <= mu + gamma * xext) {
                ++out.rejections;
                continue;
            }
            double x0 = draw(rng, dist.x0);
            if (x0 <= xext) {
                ++out.rejections;
                continue;
            }
            p.mu[i] = mu;
            p.gamma[i] = gamma;
            p.growth.r[i] = r;
            p.growth.K(i, 0) = K;
            p.c(0, i) = c;
            p.x_ext[i] = xext;
            out.x0[i] = x0;
            double gx = gamma * xext;
            out.beta[i] = (mu + gx) * K / (r - mu - gx);
            out.theta[i] = c * (gx + mu) * xext / dist.D;
            break;
        }
    }
    out.beta_order.resize(M);
    std::iota(out.beta_order.begin(), out.beta_order.end(), std::size_t{0});
    std::sort(out.beta_order.begin(), out.beta_order.end(),
              [&](std::size_t a, std::size_t b) { return out.beta[a] < out.beta[b]; });
    p.validate();
    return out;
}

RStarReport rstar_experiment(const CommunitySample& sample, const SimOptions& opts) {
    const EcosystemParams& p = sample.params;
    if (p.m != 1) throw std::invalid_argument("rstar_experiment: single resource only");
    RStarReport rep;
    rep.M = p.M;

    Trajectory traj = run_assembly(sample, opts);
    rep.converged = traj.converged.has_value();
    const State& fin = traj.samples.back();
    rep.v_terminal = fin.v[0];
    for (std::size_t i = 0; i < p.M; ++i)
        if (fin.alive[i]) rep.survivors_simulated.push_back(i);
    rep.n_e_simulated = rep.survivors_simulated.size();

    EquilibriumResult eq = solve_special_equilibrium(p, true, fin.alive);
    rep.v_eq = eq.v_eq[0];
    rep.rho_certified = eq.unique_certified;

    for (std::size_t i = 0; i < p.M; ++i)
        if (sample.beta[i] < rep.v_eq) rep.survivors_predicted.push_back(i);

    // Symmetric difference, skipping species indistinguishable at the boundary.
    const double tie_tol = 1e-9;
    std::vector<bool> sim(p.M, false);
    for (std::size_t i : rep.survivors_simulated) sim[i] = true;
    std::vector<bool> pred(p.M, false);
    for (std::size_t i : rep.survivors_predicted) pred[i] = true;
    for (std::size_t i = 0; i < p.M; ++i) {
        if (sim[i] == pred[i]) continue;
        if (std::abs(sample.beta[i] - rep.v_eq) < tie_tol) continue;
        ++rep.mismatch_count;
    }

    double theta_mean =
        std::accumulate(sample.theta.begin(), sample.theta.end(), 0.0) /
        static_cast<double>(p.M);
    double beta_min = sample.beta[sample.beta_order.front()];
    rep.n_e_predicted = theta_mean > 0.0 ? (p.S[0] - beta_min) / theta_mean : 0.0;

    std::size_t ne = rep.n_e_simulated;
    if (ne >= 1 && ne < p.M)
        rep.beta_gap = sample.beta[sample.beta_order[ne]] -
                       sample.beta[sample.beta_order[ne - 1]];
    return rep;
}

std::vector<RStarReport> run_rstar_trials(const CommunityDistributions& dist,
                                          std::size_t M, std::size_t trials,
                                          std::uint64_t seed, const SimOptions& opts,
                                          unsigned threads) {
    if (trials == 0) throw std::invalid_argument("run_rstar_trials: trials must be positive");
    std::vector<RStarReport> reports(trials);
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(trials));
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            std::size_t trial = next.fetch_add(1);
            if (trial >= trials) return;
            CommunitySample sample =
                sample_community(dist, M, CounterRng::derive_seed(seed, trial + 1));
            reports[trial] = rstar_experiment(sample, opts);
        }
    };
    std::vector<std::thread> pool;
    for (unsigned i = 0; i + 1 < threads; ++i) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    return reports;
}

BetaGapStatistic beta_gap_statistic(const CommunityDistributions& dist, std::size_t M,
                                    std::size_t n_trials, std::uint64_t rng_seed,
                                    std::size_t n) {
    if (n_trials == 0)
        throw std::invalid_argument("beta_gap_statistic: n_trials must be positive");
    if (n < 1 || n > M) throw std::invalid_argument("beta_gap_statistic: bad order n");
    std::size_t hits = 0;
    const double cut = std::pow(static_cast<double>(M), -1.0 / 3.0);
    for (std::size_t t = 0; t < n_trials; ++t) {
        CommunitySample s =
            sample_community(dist, M, CounterRng::derive_seed(rng_seed, t + 1));
        Vec sorted = s.beta;
        std::sort(sorted.begin(), sorted.end());
        if (sorted[n - 1] - sorted[0] < cut) ++hits;
    }
    BetaGapStatistic out;
    out.n_trials = n_trials;
    double nn = static_cast<double>(n_trials);
    double phat = static_cast<double>(hits) / nn;
    out.frequency = phat;
    const double z = 1.959963984540054;  // 95% Wilson interval
    double denom = 1.0 + z * z / nn;
    double center = (phat + z * z / (2 * nn)) / denom;
    double half = z * std::sqrt(phat * (1 - phat) / nn + z * z / (4 * nn * nn)) / denom;
    // Clamp to [0,1] and make sure round-off never pushes phat outside.
    out.wilson_lo = std::min(phat, std::max(0.0, center - half));
    out.wilson_hi = std::max(phat, std::min(1.0, center + half));
    return out;
}

RobustnessReport robustness_sweep(const CommunitySample& sample, const Vec& s_grid,
                                  const SimOptions& opts) {
    if (s_grid.size() < 2)
        throw std::invalid_argument("robustness_sweep: grid needs at least two points");
    for (std::size_t i = 1; i < s_grid.size(); ++i)
        if (s_grid[i] >= s_grid[i - 1])
            throw std::invalid_argument("robustness_sweep: grid must strictly decrease");

    RobustnessReport rep;
    auto run_at = [&](double S) {
        CommunitySample local = sample;
        local.params.S[0] = S;
        Trajectory traj = run_assembly(local, opts);
        SweepPoint pt;
        pt.S = S;
        pt.n_e = traj.samples.back().n_alive();
        pt.v_eq = traj.samples.back().v[0];
        pt.mass_extinct = pt.n_e == 0;
        return pt;
    };

    for (double S : s_grid) rep.curve.push_back(run_at(S));

    // Monotone decline expected along the decreasing grid; allow one species
    // of slack before flagging.
    for (std::size_t i = 1; i < rep.curve.size(); ++i)
        if (rep.curve[i].n_e > rep.curve[i - 1].n_e + 1) rep.monotone = false;

    const EcosystemParams& p = sample.params;
    double c = median(Vec(p.c.data()));
    double r = median(p.growth.r);
    double g = median(p.gamma);
    rep.p_stress = c * r * r / (g * p.D[0] * s_grid.front());

    // Secant robustness at the first grid step where the count moves.
    for (std::size_t i = 1; i < rep.curve.size(); ++i) {
        double dn = static_cast<double>(rep.curve[i].n_e) -
                    static_cast<double>(rep.curve[i - 1].n_e);
        if (dn != 0.0 && rep.curve[i - 1].n_e > 0) {
            double ds = rep.curve[i].S - rep.curve[i - 1].S;
            rep.delta_s = ds;
            rep.delta_ne = dn;
            rep.r_b_empirical = (ds / rep.curve[i - 1].S) /
                                (dn / static_cast<double>(rep.curve[i - 1].n_e));
            break;
        }
    }

    // Bisect the collapse supply between the last surviving and the first
    // extinct grid points.
    double s_alive = 0.0, s_dead = 0.0;
    bool have_bracket = false;
    for (std::size_t i = 1; i < rep.curve.size(); ++i) {
        if (rep.curve[i - 1].n_e > 0 && rep.curve[i].n_e == 0) {
            s_alive = rep.curve[i - 1].S;
            s_dead = rep.curve[i].S;
            have_bracket = true;
            break;
        }
    }
    if (have_bracket) {
        for (int it = 0; it < 12; ++it) {
            double mid = 0.5 * (s_alive + s_dead);
            (run_at(mid).n_e > 0 ? s_alive : s_dead) = mid;
        }
        rep.s_critical = 0.5 * (s_alive + s_dead);
    }
    return rep;
}

}  // namespace ecodyn
