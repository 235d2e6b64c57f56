#include "ecodyn/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace ecodyn {

namespace {

// Growth response with resources clamped at zero; the integrator may
// produce round-off negatives that the model treats as empty resource.
double phi_clamped(const GrowthLaw& growth, std::size_t i, const Vec& v) {
    double ratio = 1.0;
    for (std::size_t k = 0; k < v.size(); ++k) {
        double vk = std::max(v[k], 0.0);
        ratio = std::min(ratio, vk / (growth.K(i, k) + vk));
    }
    return growth.r[i] * ratio;
}

void eval_rhs(const EcosystemParams& p, const Vec& y, const std::vector<bool>& alive,
              Vec& dy) {
    const std::size_t M = p.M, m = p.m;
    Vec v(y.begin() + static_cast<std::ptrdiff_t>(M), y.end());
    for (std::size_t k = 0; k < m; ++k) dy[M + k] = p.D[k] * (p.S[k] - y[M + k]);
    for (std::size_t i = 0; i < M; ++i) {
        if (!alive[i]) {
            dy[i] = 0.0;
            continue;
        }
        double phi = phi_clamped(p.growth, i, v);
        double xi = std::max(y[i], 0.0);
        dy[i] = xi * (phi - p.mu[i] - p.gamma[i] * xi);
        for (std::size_t k = 0; k < m; ++k) dy[M + k] -= p.c(k, i) * xi * phi;
    }
}

// Dormand-Prince 5(4) tableau.
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                 b5 = -2187.0 / 6784, b6 = 11.0 / 84;
// 5th-order minus embedded 4th-order weights (error estimator).
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

struct Stepper {
    const EcosystemParams& p;
    const std::vector<bool>& alive;
    std::size_t n;
    Vec k1, k2, k3, k4, k5, k6, k7, ytmp;

    Stepper(const EcosystemParams& params, const std::vector<bool>& alive_)
        : p(params), alive(alive_), n(params.M + params.m) {
        for (Vec* v : {&k1, &k2, &k3, &k4, &k5, &k6, &k7, &ytmp}) v->assign(n, 0.0);
    }

    // One trial step from (t, y) with derivative f = k1 already evaluated.
    // Fills ynew and returns the scaled error norm.
    double attempt(const Vec& y, double h, Vec& ynew, const IntegratorOptions& opts) {
        for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + h * a21 * k1[i];
        eval_rhs(p, ytmp, alive, k2);
        for (std::size_t i = 0; i < n; ++i)
            ytmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
        eval_rhs(p, ytmp, alive, k3);
        for (std::size_t i = 0; i < n; ++i)
            ytmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
        eval_rhs(p, ytmp, alive, k4);
        for (std::size_t i = 0; i < n; ++i)
            ytmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
        eval_rhs(p, ytmp, alive, k5);
        for (std::size_t i = 0; i < n; ++i)
            ytmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] +
                                  a65 * k5[i]);
        eval_rhs(p, ytmp, alive, k6);
        for (std::size_t i = 0; i < n; ++i)
            ynew[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] +
                                  b6 * k6[i]);
        eval_rhs(p, ynew, alive, k7);  // FSAL
        double err = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double ei = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] +
                             e6 * k6[i] + e7 * k7[i]);
            double scale =
                opts.abs_tol + opts.rel_tol * std::max(std::abs(y[i]), std::abs(ynew[i]));
            err = std::max(err, std::abs(ei) / scale);
        }
        return err;
    }
};

// Cubic Hermite interpolation on [t0, t0+h] for one component.
double hermite(double y0, double f0, double y1, double f1, double h, double theta) {
    double t2 = theta * theta, t3 = t2 * theta;
    double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + theta;
    double h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
    return h00 * y0 + h10 * h * f0 + h01 * y1 + h11 * h * f1;
}

State make_state(double t, const Vec& y, std::size_t M, std::size_t m,
                 const std::vector<bool>& alive) {
    State s;
    s.t = t;
    s.x.assign(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(M));
    s.v.assign(y.begin() + static_cast<std::ptrdiff_t>(M), y.end());
    (void)m;
    s.alive = alive;
    return s;
}

double state_dist(const State& a, const State& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.x.size(); ++i) d = std::max(d, std::abs(a.x[i] - b.x[i]));
    for (std::size_t k = 0; k < a.v.size(); ++k) d = std::max(d, std::abs(a.v[k] - b.v[k]));
    return d;
}

// Residual measured as an equivalent state offset: the resource equations
// relax at rate D_k, so their raw defect overstates the distance to the
// fixed point by that factor.
double residual_norm(const EcosystemParams& p, const State& s) {
    Vec dy = rhs(p, s);
    double r = 0.0;
    for (std::size_t i = 0; i < p.M; ++i) r = std::max(r, std::abs(dy[i]));
    for (std::size_t k = 0; k < p.m; ++k)
        r = std::max(r, std::abs(dy[p.M + k]) / std::max(1.0, p.D[k]));
    return r;
}

// Convergence cannot be certified tighter than the integrator resolves the
// trajectory; the floor mirrors the error-norm scale of the current state.
double accuracy_floor(const IntegratorOptions& opts, const Vec& y) {
    double ymax = 0.0;
    for (double yi : y) ymax = std::max(ymax, std::abs(yi));
    return opts.abs_tol + opts.rel_tol * ymax;
}

}  // namespace

std::size_t State::n_alive() const {
    return static_cast<std::size_t>(std::count(alive.begin(), alive.end(), true));
}

double Trajectory::last_event_time() const {
    return events.empty() ? 0.0 : events.back().time;
}

Vec rhs(const EcosystemParams& params, const State& state) {
    if (state.x.size() != params.M || state.v.size() != params.m ||
        state.alive.size() != params.M)
        throw std::invalid_argument("rhs: state dimension mismatch");
    Vec y = state.x;
    y.insert(y.end(), state.v.begin(), state.v.end());
    Vec dy(params.M + params.m, 0.0);
    eval_rhs(params, y, state.alive, dy);
    return dy;
}

Trajectory integrate(const EcosystemParams& params, const State& init, double horizon,
                     const IntegratorOptions& opts) {
    params.validate();
    const std::size_t M = params.M, m = params.m, n = M + m;
    if (init.x.size() != M || init.v.size() != m || init.alive.size() != M)
        throw std::invalid_argument("integrate: initial state dimension mismatch");
    if (horizon <= init.t) throw std::invalid_argument("integrate: horizon before start");
    const bool thresholds = params.thresholds_active();
    for (std::size_t i = 0; i < M; ++i) {
        if (!init.alive[i]) continue;
        if (init.x[i] <= 0.0)
            throw std::invalid_argument("integrate: initial abundances must be positive");
        if (thresholds && params.x_ext[i] > 0.0 && init.x[i] <= params.x_ext[i])
            throw std::invalid_argument(
                "integrate: initial abundance at or below extinction threshold");
    }
    for (std::size_t k = 0; k < m; ++k)
        if (init.v[k] < 0.0 || init.v[k] > params.S[k])
            throw std::invalid_argument("integrate: initial resources must lie in [0,S]");

    Trajectory traj;
    std::vector<bool> alive = init.alive;
    Vec y = init.x;
    y.insert(y.end(), init.v.begin(), init.v.end());
    double t = init.t;
    traj.samples.push_back(make_state(t, y, M, m, alive));

    Stepper st(params, alive);
    eval_rhs(params, y, alive, st.k1);
    double h = std::min(1e-3, (horizon - t) / 10.0);
    double err_prev = 1.0;
    Vec ynew(n), y0(n), f0(n);

    for (std::size_t step = 0; step < opts.max_steps && t < horizon; ++step) {
        h = std::min(h, horizon - t);
        if (h < 1e-14 * std::max(1.0, std::abs(t)))
            throw std::runtime_error("integrate: step-size underflow at t=" +
                                     std::to_string(t));
        y0 = y;
        f0 = st.k1;
        double err = st.attempt(y, h, ynew, opts);
        if (!std::isfinite(err))
            throw std::runtime_error("integrate: non-finite state at t=" +
                                     std::to_string(t));
        if (err > 1.0) {
            double fac = std::max(0.2, 0.9 * std::pow(err, -0.2));
            h *= fac;
            continue;
        }
        // Guard against round-off escapes below zero.
        bool reject = false;
        for (std::size_t i = 0; i < n; ++i) {
            if (ynew[i] < 0.0) {
                if (ynew[i] < -1e-9) {
                    reject = true;
                    break;
                }
                ynew[i] = 0.0;
            }
        }
        if (reject) {
            h *= 0.5;
            continue;
        }

        double t1 = t + h;

        // Threshold crossings: earliest first, ties by lowest index.
        std::size_t hit = M;
        double hit_theta = 2.0;
        if (thresholds) {
            for (std::size_t i = 0; i < M; ++i) {
                if (!alive[i] || params.x_ext[i] <= 0.0) continue;
                if (ynew[i] - params.x_ext[i] > 0.0) continue;
                // Bisect the cubic interpolant for the crossing instant.
                double lo = 0.0, hi = 1.0;
                while ((hi - lo) * h > opts.event_tol) {
                    double mid = 0.5 * (lo + hi);
                    double g = hermite(y0[i], f0[i], ynew[i], st.k7[i], h, mid) -
                               params.x_ext[i];
                    (g > 0.0 ? lo : hi) = mid;
                }
                double theta = 0.5 * (lo + hi);
                if (theta < hit_theta - 1e-30) {
                    hit_theta = theta;
                    hit = i;
                }
            }
        }

        if (hit < M) {
            double te = t + hit_theta * h;
            Vec ye(n);
            for (std::size_t i = 0; i < n; ++i)
                ye[i] = std::max(0.0,
                                 hermite(y0[i], f0[i], ynew[i], st.k7[i], h, hit_theta));
            ye[hit] = params.x_ext[hit];  // pin at the threshold
            alive[hit] = false;
            traj.events.push_back({hit, te, params.x_ext[hit]});
            y = ye;
            t = te;
            traj.samples.push_back(make_state(t, y, M, m, alive));
            eval_rhs(params, y, alive, st.k1);
            err_prev = 1.0;
            continue;
        }

        // Accept.
        y = ynew;
        t = t1;
        st.k1 = st.k7;  // FSAL
        traj.samples.push_back(make_state(t, y, M, m, alive));
        double fac = 0.9 * std::pow(std::max(err, 1e-10), -0.14) *
                     std::pow(std::max(err_prev, 1e-10), 0.08);
        h *= std::clamp(fac, 0.2, 5.0);
        err_prev = std::max(err, 1e-10);

        if (opts.conv_tol > 0.0) {
            const State& cur = traj.samples.back();
            double tol = opts.conv_tol + accuracy_floor(opts, y);
            double res = residual_norm(params, cur);
            if (res <= tol) {
                // Compare against the newest sample older than the lookback window.
                const State* past = nullptr;
                for (auto it = traj.samples.rbegin(); it != traj.samples.rend(); ++it) {
                    if (cur.t - it->t >= opts.window) {
                        past = &*it;
                        break;
                    }
                }
                if (past && past->alive == cur.alive && state_dist(cur, *past) <= tol) {
                    traj.converged = ConvergenceInfo{cur, res};
                    break;
                }
            }
        }
    }

    if (!traj.converged && opts.conv_tol > 0.0) {
        // Horizon reached: record convergence if the terminal state qualifies.
        auto conv = detect_convergence(traj, params,
                                       opts.conv_tol + accuracy_floor(opts, y),
                                       opts.window);
        if (conv) traj.converged = conv;
    }
    return traj;
}

double time_average(const Trajectory& traj, const EcosystemParams& params, Quantity q,
                    std::size_t index) {
    if (traj.samples.size() < 2)
        throw std::invalid_argument("time_average: trajectory too short");
    auto eval = [&](const State& s) -> double {
        switch (q) {
            case Quantity::Abundance:
                return s.x.at(index);
            case Quantity::Resource:
                return s.v.at(index);
            case Quantity::Uptake:
                return s.x.at(index) * phi_clamped(params.growth, index, s.v);
            case Quantity::Growth:
                return phi_clamped(params.growth, index, s.v);
        }
        return 0.0;
    };
    double integral = 0.0;
    for (std::size_t i = 1; i < traj.samples.size(); ++i) {
        double dt = traj.samples[i].t - traj.samples[i - 1].t;
        integral += 0.5 * dt * (eval(traj.samples[i]) + eval(traj.samples[i - 1]));
    }
    double span = traj.samples.back().t - traj.samples.front().t;
    if (span <= 0.0) throw std::invalid_argument("time_average: zero time span");
    return integral / span;
}

std::optional<ConvergenceInfo> detect_convergence(const Trajectory& traj,
                                                  const EcosystemParams& params, double tol,
                                                  double window) {
    if (traj.samples.empty()) return std::nullopt;
    const State& cur = traj.samples.back();
    double res = residual_norm(params, cur);
    if (res > tol) return std::nullopt;
    if (traj.samples.size() == 1) {
        // A lone sample with zero residual is an exact equilibrium.
        if (res <= tol) return ConvergenceInfo{cur, res};
        return std::nullopt;
    }
    for (auto it = traj.samples.rbegin(); it != traj.samples.rend(); ++it) {
        if (cur.t - it->t >= window) {
            if (it->alive == cur.alive && state_dist(cur, *it) <= tol)
                return ConvergenceInfo{cur, res};
            return std::nullopt;
        }
    }
    return std::nullopt;
}

double apriori_bound_violation(const Trajectory& traj, const EcosystemParams& params,
                               const State& init) {
    double worst = -std::numeric_limits<double>::infinity();
    Vec abar(params.M);
    for (std::size_t i = 0; i < params.M; ++i)
        abar[i] = evaluate_growth(params.growth, i, params.S) - params.mu[i];
    for (const State& s : traj.samples) {
        double t = s.t - init.t;
        for (std::size_t i = 0; i < params.M; ++i) {
            if (!s.alive[i]) continue;  // pinned entries no longer follow the flow
            double xb;
            double g = params.gamma[i], x0 = init.x[i], a = abar[i];
            if (std::abs(a) < 1e-14) {
                xb = x0 / (1.0 + x0 * g * t);
            } else {
                double em = std::exp(-a * t);
                xb = x0 / (em + x0 * g / a * (1.0 - em));
                if (!std::isfinite(xb) || xb < 0.0) xb = 0.0;  // decayed past range
            }
            worst = std::max(worst, s.x[i] - xb);
        }
        for (std::size_t k = 0; k < params.m; ++k) {
            double ed = std::exp(-params.D[k] * t);
            double vb = params.S[k] * (1.0 - ed) + init.v[k] * ed;
            worst = std::max(worst, s.v[k] - vb);
            worst = std::max(worst, -s.v[k]);  // nonnegativity is part of the envelope
        }
        for (double xi : s.x) worst = std::max(worst, -xi);
    }
    return worst;
}

}  // namespace ecodyn
