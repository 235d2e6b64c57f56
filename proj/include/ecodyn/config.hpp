#ifndef ECODYN_CONFIG_HPP
#define ECODYN_CONFIG_HPP

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "ecodyn/dynamics.hpp"
#include "ecodyn/ensemble.hpp"
#include "ecodyn/model.hpp"

namespace ecodyn {

enum class Command { Simulate, Equilibrium, Bounds, RStar, Robustness };

// Raised for malformed or contradictory configs; `pointer` is the JSON
// pointer of the offending element.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& pointer, const std::string& what)
        : std::runtime_error("config error at " + (pointer.empty() ? "/" : pointer) + ": " +
                             what),
          pointer_(pointer) {}
    const std::string& pointer() const { return pointer_; }

private:
    std::string pointer_;
};

struct RunConfig {
    Command command = Command::Simulate;
    std::optional<EcosystemParams> params;
    std::optional<Vec> initial_x;  // simulate: defaults derived from params
    std::optional<Vec> initial_v;  // simulate: defaults to S
    std::optional<CommunityDistributions> distributions;
    std::size_t species = 0;  // ensemble community size
    std::size_t trials = 1;
    Vec s_grid;

    IntegratorOptions integ{};
    double horizon = 1e3;

    std::string out_dir = ".";
    std::uint64_t seed = 0;
    unsigned threads = 0;  // 0 = machine parallelism
    bool quiet = false;
};

// Strict parse: defaults applied, unknown keys rejected with their pointer.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig parse_config_file(const std::string& path);

// Canonical serialization of the semantically meaningful fields; its FNV-1a
// hash goes into run_meta.json.
std::string canonical_config(const RunConfig& cfg);

// Dispatches and writes artifacts into cfg.out_dir.
// Returns 0 on success; throws ConfigError (exit 2) or std::runtime_error
// (numerical failure, exit 3).
int run(const RunConfig& cfg);

}  // namespace ecodyn

#endif
