#ifndef ECODYN_DYNAMICS_HPP
#define ECODYN_DYNAMICS_HPP

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "ecodyn/model.hpp"

namespace ecodyn {

struct State {
    double t = 0.0;
    Vec x;                    // abundances; extinct entries stay pinned at their threshold
    Vec v;                    // resources
    std::vector<bool> alive;  // S_e(t)

    std::size_t n_alive() const;
};

struct ExtinctionEvent {
    std::size_t species = 0;
    double time = 0.0;
    double abundance_at_event = 0.0;  // equals the species' threshold
};

struct ConvergenceInfo {
    State state;
    double residual = 0.0;
};

struct Trajectory {
    std::vector<State> samples;  // one per accepted integrator step
    std::vector<ExtinctionEvent> events;
    std::optional<ConvergenceInfo> converged;

    double last_event_time() const;  // T_e; 0 when no events occurred
};

struct IntegratorOptions {
    double rel_tol = 1e-8;
    double abs_tol = 1e-10;
    double event_tol = 1e-10;   // time tolerance for locating threshold crossings
    double conv_tol = 0.0;      // > 0 enables early stop on convergence
    double window = 1.0;        // lookback interval for the convergence test
    std::size_t max_steps = 50'000'000;
};

// Right-hand side of the competition system restricted to alive species;
// extinct species contribute zero to both blocks. Returns length M+m.
Vec rhs(const EcosystemParams& params, const State& state);

// Adaptive embedded RK 4(5) with threshold-crossing events located by
// bisection on cubic dense output. Throws std::invalid_argument on bad
// initial data and std::runtime_error on step-size underflow or a
// non-finite state (the message carries the last good time).
Trajectory integrate(const EcosystemParams& params, const State& init, double horizon,
                     const IntegratorOptions& opts);

enum class Quantity {
    Abundance,  // x_i
    Resource,   // v_k
    Uptake,     // x_i phi_i(v)
    Growth,     // phi_i(v)
};

// Trapezoid-rule time average (1/t) int_0^t f ds over the trajectory samples.
double time_average(const Trajectory& traj, const EcosystemParams& params, Quantity q,
                    std::size_t index);

// Fires when both the residual (resource defects scaled by 1/D_k so the
// norm reads as a state offset) and the state change over the lookback
// window stay below tol. Inside integrate the tolerance is widened by the
// integrator accuracy floor abs_tol + rel_tol*||y||_inf.
std::optional<ConvergenceInfo> detect_convergence(const Trajectory& traj,
                                                  const EcosystemParams& params, double tol,
                                                  double window);

// Worst violation of the a-priori envelope along the trajectory: positive
// entries mean a sample escaped the closed-form upper bounds seeded at init.
double apriori_bound_violation(const Trajectory& traj, const EcosystemParams& params,
                               const State& init);

}  // namespace ecodyn

#endif
