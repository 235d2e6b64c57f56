#ifndef ECODYN_IO_HPP
#define ECODYN_IO_HPP

#include <cstdint>
#include <string>

#include <json.hpp>

#include "ecodyn/dynamics.hpp"
#include "ecodyn/ensemble.hpp"
#include "ecodyn/equilibrium.hpp"
#include "ecodyn/estimates.hpp"
#include "ecodyn/model.hpp"

namespace ecodyn {

// 17-significant-digit scientific notation; identical bytes wherever binary64
// arithmetic agrees.
std::string format_double(double x);

// JSON dump with every number rendered through format_double.
std::string dump_json_fixed(const nlohmann::json& j, int indent = 2);

std::uint64_t fnv1a64(const std::string& s);

nlohmann::json to_json(const EquilibriumResult& eq);
nlohmann::json to_json(const BiodiversityBounds& b);
nlohmann::json to_json(const RStarReport& r);
nlohmann::json to_json(const RobustnessReport& r);

// CSV with header `t, x_1..x_M, v_1..v_m, n_alive`.
std::string trajectory_csv(const Trajectory& traj);
// CSV with header `species, t_star` (1-based species indices).
std::string events_csv(const Trajectory& traj);
// CSV with header `S, N_e, v_eq, mass_extinct`.
std::string sweep_csv(const std::vector<SweepPoint>& curve);

void write_file(const std::string& path, const std::string& contents);

}  // namespace ecodyn

#endif
