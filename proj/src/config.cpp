#include "ecodyn/config.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "ecodyn/equilibrium.hpp"
#include "ecodyn/estimates.hpp"
#include "ecodyn/io.hpp"
#include "ecodyn/rng.hpp"

namespace ecodyn {

namespace {

using nlohmann::json;

void check_keys(const json& obj, const std::string& ptr,
                const std::set<std::string>& allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key())) throw ConfigError(ptr + "/" + it.key(), "unknown key");
}

const json* find(const json& obj, const std::string& key) {
    auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
}

double as_num(const json& j, const std::string& ptr) {
    if (!j.is_number()) throw ConfigError(ptr, "expected a number");
    return j.get<double>();
}

double num_or(const json& obj, const std::string& ptr, const std::string& key,
              double fallback) {
    const json* j = find(obj, key);
    return j ? as_num(*j, ptr + "/" + key) : fallback;
}

Vec as_vec(const json& j, const std::string& ptr) {
    if (!j.is_array()) throw ConfigError(ptr, "expected an array of numbers");
    Vec out;
    for (std::size_t i = 0; i < j.size(); ++i)
        out.push_back(as_num(j[i], ptr + "/" + std::to_string(i)));
    return out;
}

Matrix as_matrix(const json& j, const std::string& ptr) {
    if (!j.is_array() || j.empty()) throw ConfigError(ptr, "expected an array of rows");
    std::vector<Vec> rows;
    for (std::size_t i = 0; i < j.size(); ++i)
        rows.push_back(as_vec(j[i], ptr + "/" + std::to_string(i)));
    Matrix m(rows.size(), rows.front().size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != m.cols())
            throw ConfigError(ptr + "/" + std::to_string(r), "ragged matrix row");
        for (std::size_t c = 0; c < m.cols(); ++c) m(r, c) = rows[r][c];
    }
    return m;
}

EcosystemParams parse_params(const json& obj, const std::string& ptr) {
    check_keys(obj, ptr, {"mu", "gamma", "c", "d", "s", "growth", "x_ext"});
    EcosystemParams p;
    for (const char* key : {"mu", "gamma", "c", "d", "s", "growth"})
        if (!find(obj, key)) throw ConfigError(ptr, std::string("missing key ") + key);
    p.mu = as_vec(obj["mu"], ptr + "/mu");
    p.gamma = as_vec(obj["gamma"], ptr + "/gamma");
    p.c = as_matrix(obj["c"], ptr + "/c");
    p.D = as_vec(obj["d"], ptr + "/d");
    p.S = as_vec(obj["s"], ptr + "/s");
    p.M = p.mu.size();
    p.m = p.D.size();

    const json& g = obj["growth"];
    if (!g.is_object()) throw ConfigError(ptr + "/growth", "expected an object");
    check_keys(g, ptr + "/growth", {"kind", "r", "k"});
    for (const char* key : {"kind", "r", "k"})
        if (!find(g, key))
            throw ConfigError(ptr + "/growth", std::string("missing key ") + key);
    std::string kind = g["kind"].is_string() ? g["kind"].get<std::string>() : "";
    if (kind == "liebig")
        p.growth.kind = GrowthKind::Liebig;
    else if (kind == "holling")
        p.growth.kind = GrowthKind::Holling;
    else
        throw ConfigError(ptr + "/growth/kind", "expected \"liebig\" or \"holling\"");
    p.growth.r = as_vec(g["r"], ptr + "/growth/r");
    p.growth.K = as_matrix(g["k"], ptr + "/growth/k");

    if (const json* x = find(obj, "x_ext"))
        p.x_ext = as_vec(*x, ptr + "/x_ext");
    else
        p.x_ext.assign(p.M, 0.0);
    try {
        p.validate();
    } catch (const std::exception& e) {
        throw ConfigError(ptr, e.what());
    }
    return p;
}

DistSpec parse_dist(const json& obj, const std::string& ptr) {
    if (obj.is_number()) return DistSpec::point(obj.get<double>());
    if (!obj.is_object()) throw ConfigError(ptr, "expected a number or a distribution");
    std::string kind = obj.contains("kind") && obj["kind"].is_string()
                           ? obj["kind"].get<std::string>()
                           : "";
    if (kind == "uniform") {
        check_keys(obj, ptr, {"kind", "a", "b"});
        double a = num_or(obj, ptr, "a", 0.0), b = num_or(obj, ptr, "b", 0.0);
        if (b < a) throw ConfigError(ptr, "uniform support requires a <= b");
        return DistSpec::uniform(a, b);
    }
    if (kind == "lognormal") {
        check_keys(obj, ptr, {"kind", "mean", "sigma", "lo", "hi"});
        for (const char* key : {"lo", "hi"})
            if (!find(obj, key))
                throw ConfigError(ptr, std::string("lognormal requires truncation key ") + key);
        return DistSpec::lognormal(num_or(obj, ptr, "mean", 0.0),
                                   num_or(obj, ptr, "sigma", 1.0),
                                   num_or(obj, ptr, "lo", 0.0), num_or(obj, ptr, "hi", 1.0));
    }
    throw ConfigError(ptr + "/kind", "expected \"uniform\" or \"lognormal\"");
}

std::pair<CommunityDistributions, std::size_t> parse_distributions(const json& obj,
                                                                   const std::string& ptr) {
    check_keys(obj, ptr,
               {"species", "mu", "gamma", "r", "k", "c", "x_ext", "x0", "d", "s"});
    for (const char* key : {"species", "mu", "gamma", "r", "k", "c", "x_ext", "x0", "d", "s"})
        if (!find(obj, key)) throw ConfigError(ptr, std::string("missing key ") + key);
    if (!obj["species"].is_number_unsigned() || obj["species"].get<std::size_t>() == 0)
        throw ConfigError(ptr + "/species", "expected a positive integer");
    CommunityDistributions d;
    d.mu = parse_dist(obj["mu"], ptr + "/mu");
    d.gamma = parse_dist(obj["gamma"], ptr + "/gamma");
    d.r = parse_dist(obj["r"], ptr + "/r");
    d.K = parse_dist(obj["k"], ptr + "/k");
    d.c = parse_dist(obj["c"], ptr + "/c");
    d.x_ext = parse_dist(obj["x_ext"], ptr + "/x_ext");
    d.x0 = parse_dist(obj["x0"], ptr + "/x0");
    d.D = as_num(obj["d"], ptr + "/d");
    d.S = as_num(obj["s"], ptr + "/s");
    if (d.D <= 0.0 || d.S <= 0.0)
        throw ConfigError(ptr, "d and s must be positive");
    return {d, obj["species"].get<std::size_t>()};
}

json dist_json(const DistSpec& d) {
    if (d.kind == DistSpec::Kind::Uniform)
        return {{"kind", "uniform"}, {"a", d.a}, {"b", d.b}};
    return {{"kind", "lognormal"}, {"mean", d.mean}, {"sigma", d.sigma}, {"lo", d.a},
            {"hi", d.b}};
}

json matrix_json(const Matrix& m) {
    json rows = json::array();
    for (std::size_t r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (std::size_t c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(row);
    }
    return rows;
}

const char* command_name(Command c) {
    switch (c) {
        case Command::Simulate: return "simulate";
        case Command::Equilibrium: return "equilibrium";
        case Command::Bounds: return "bounds";
        case Command::RStar: return "rstar";
        case Command::Robustness: return "robustness";
    }
    return "?";
}

}  // namespace

RunConfig parse_config(const json& doc) {
    if (!doc.is_object()) throw ConfigError("", "config must be a JSON object");
    check_keys(doc, "",
               {"command", "params", "distributions", "initial", "integrator", "trials",
                "s_grid", "seed", "out", "threads", "quiet"});
    RunConfig cfg;

    if (const json* c = find(doc, "command")) {
        std::string name = c->is_string() ? c->get<std::string>() : "";
        if (name == "simulate") cfg.command = Command::Simulate;
        else if (name == "equilibrium") cfg.command = Command::Equilibrium;
        else if (name == "bounds") cfg.command = Command::Bounds;
        else if (name == "rstar") cfg.command = Command::RStar;
        else if (name == "robustness") cfg.command = Command::Robustness;
        else
            throw ConfigError("/command",
                              "expected one of simulate, equilibrium, bounds, rstar, "
                              "robustness");
    } else {
        throw ConfigError("", "missing key command");
    }

    const json* params = find(doc, "params");
    const json* dists = find(doc, "distributions");
    if (params && dists)
        throw ConfigError("", "keys params and distributions are mutually exclusive");
    if (params) cfg.params = parse_params(*params, "/params");
    if (dists) {
        auto [d, M] = parse_distributions(*dists, "/distributions");
        cfg.distributions = d;
        cfg.species = M;
    }

    bool needs_params = cfg.command == Command::Simulate ||
                        cfg.command == Command::Equilibrium ||
                        cfg.command == Command::Bounds;
    if (needs_params && !cfg.params)
        throw ConfigError("", std::string(command_name(cfg.command)) +
                                  " requires a params section");
    if (!needs_params && !cfg.distributions)
        throw ConfigError("", std::string(command_name(cfg.command)) +
                                  " requires a distributions section");

    if (const json* init = find(doc, "initial")) {
        if (cfg.command != Command::Simulate)
            throw ConfigError("/initial", "only valid for simulate");
        check_keys(*init, "/initial", {"x", "v"});
        if (const json* x = find(*init, "x")) cfg.initial_x = as_vec(*x, "/initial/x");
        if (const json* v = find(*init, "v")) cfg.initial_v = as_vec(*v, "/initial/v");
    }

    if (const json* integ = find(doc, "integrator")) {
        check_keys(*integ, "/integrator",
                   {"tol", "abs_tol", "event_tol", "conv_tol", "window", "horizon"});
        cfg.integ.rel_tol = num_or(*integ, "/integrator", "tol", cfg.integ.rel_tol);
        cfg.integ.abs_tol = num_or(*integ, "/integrator", "abs_tol", cfg.integ.abs_tol);
        cfg.integ.event_tol = num_or(*integ, "/integrator", "event_tol", cfg.integ.event_tol);
        cfg.integ.conv_tol = num_or(*integ, "/integrator", "conv_tol", cfg.integ.conv_tol);
        cfg.integ.window = num_or(*integ, "/integrator", "window", cfg.integ.window);
        cfg.horizon = num_or(*integ, "/integrator", "horizon", cfg.horizon);
    }
    if (cfg.integ.rel_tol <= 0.0 || cfg.integ.abs_tol <= 0.0 || cfg.horizon <= 0.0)
        throw ConfigError("/integrator", "tolerances and horizon must be positive");

    if (const json* t = find(doc, "trials")) {
        if (!t->is_number_unsigned())
            throw ConfigError("/trials", "expected a nonnegative integer");
        cfg.trials = t->get<std::size_t>();
    }
    if (cfg.command == Command::RStar && cfg.trials == 0)
        throw ConfigError("/trials", "rstar requires at least one trial");

    if (const json* g = find(doc, "s_grid")) {
        cfg.s_grid = as_vec(*g, "/s_grid");
        for (std::size_t i = 1; i < cfg.s_grid.size(); ++i)
            if (cfg.s_grid[i] >= cfg.s_grid[i - 1])
                throw ConfigError("/s_grid", "grid must strictly decrease");
    }
    if (cfg.command == Command::Robustness && cfg.s_grid.size() < 2)
        throw ConfigError("/s_grid", "robustness requires a decreasing grid of >= 2 supplies");

    if (const json* s = find(doc, "seed")) {
        if (!s->is_number_unsigned()) throw ConfigError("/seed", "expected an unsigned integer");
        cfg.seed = s->get<std::uint64_t>();
    }
    if (const json* o = find(doc, "out")) {
        if (!o->is_string()) throw ConfigError("/out", "expected a string");
        cfg.out_dir = o->get<std::string>();
    }
    if (const json* t = find(doc, "threads")) {
        if (!t->is_number_unsigned()) throw ConfigError("/threads", "expected an unsigned integer");
        cfg.threads = t->get<unsigned>();
    }
    if (const json* q = find(doc, "quiet")) {
        if (!q->is_boolean()) throw ConfigError("/quiet", "expected a boolean");
        cfg.quiet = q->get<bool>();
    }
    return cfg;
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("", "cannot open config file: " + path);
    json doc;
    try {
        doc = json::parse(f);
    } catch (const json::parse_error& e) {
        throw ConfigError("", std::string("malformed JSON: ") + e.what());
    }
    return parse_config(doc);
}

std::string canonical_config(const RunConfig& cfg) {
    json j;
    j["command"] = command_name(cfg.command);
    if (cfg.params) {
        const EcosystemParams& p = *cfg.params;
        j["params"] = {{"mu", p.mu},
                       {"gamma", p.gamma},
                       {"c", matrix_json(p.c)},
                       {"d", p.D},
                       {"s", p.S},
                       {"x_ext", p.x_ext},
                       {"growth",
                        {{"kind", p.growth.kind == GrowthKind::Liebig ? "liebig" : "holling"},
                         {"r", p.growth.r},
                         {"k", matrix_json(p.growth.K)}}}};
    }
    if (cfg.distributions) {
        const CommunityDistributions& d = *cfg.distributions;
        j["distributions"] = {{"species", cfg.species},
                              {"mu", dist_json(d.mu)},
                              {"gamma", dist_json(d.gamma)},
                              {"r", dist_json(d.r)},
                              {"k", dist_json(d.K)},
                              {"c", dist_json(d.c)},
                              {"x_ext", dist_json(d.x_ext)},
                              {"x0", dist_json(d.x0)},
                              {"d", d.D},
                              {"s", d.S}};
    }
    if (cfg.initial_x) j["initial_x"] = *cfg.initial_x;
    if (cfg.initial_v) j["initial_v"] = *cfg.initial_v;
    j["integrator"] = {{"tol", cfg.integ.rel_tol},
                       {"abs_tol", cfg.integ.abs_tol},
                       {"event_tol", cfg.integ.event_tol},
                       {"conv_tol", cfg.integ.conv_tol},
                       {"window", cfg.integ.window},
                       {"horizon", cfg.horizon}};
    j["trials"] = cfg.trials;
    j["s_grid"] = cfg.s_grid;
    j["seed"] = cfg.seed;
    return dump_json_fixed(j, 0);
}

int run(const RunConfig& cfg) {
    namespace fs = std::filesystem;
    fs::create_directories(cfg.out_dir);
    auto path = [&](const char* name) { return (fs::path(cfg.out_dir) / name).string(); };

    std::ostringstream hash;
    hash << "0x" << std::hex << fnv1a64(canonical_config(cfg));
    json meta = {{"command", command_name(cfg.command)},
                 {"config_hash", hash.str()},
                 {"seed", cfg.seed},
                 {"version", "0.1.0"}};

    switch (cfg.command) {
        case Command::Simulate: {
            const EcosystemParams& p = *cfg.params;
            State init;
            init.t = 0.0;
            init.alive.assign(p.M, true);
            if (cfg.initial_x) {
                if (cfg.initial_x->size() != p.M)
                    throw ConfigError("/initial/x", "length must equal the species count");
                init.x = *cfg.initial_x;
            } else {
                init.x.resize(p.M);
                for (std::size_t i = 0; i < p.M; ++i)
                    init.x[i] = std::max(1.0, 2.0 * p.x_ext[i]);
            }
            if (cfg.initial_v) {
                if (cfg.initial_v->size() != p.m)
                    throw ConfigError("/initial/v", "length must equal the resource count");
                init.v = *cfg.initial_v;
            } else {
                init.v = p.S;
            }
            Trajectory traj = integrate(p, init, cfg.horizon, cfg.integ);
            write_file(path("trajectory.csv"), trajectory_csv(traj));
            write_file(path("events.csv"), events_csv(traj));
            EquilibriumResult eq = solve_special_equilibrium(
                p, p.thresholds_active(), traj.samples.back().alive);
            write_file(path("equilibrium.json"), dump_json_fixed(to_json(eq)));
            break;
        }
        case Command::Equilibrium: {
            const EcosystemParams& p = *cfg.params;
            std::vector<bool> alive(p.M, true);
            EquilibriumResult eq =
                solve_special_equilibrium(p, p.thresholds_active(), alive);
            write_file(path("equilibrium.json"), dump_json_fixed(to_json(eq)));
            break;
        }
        case Command::Bounds: {
            write_file(path("bounds.json"),
                       dump_json_fixed(to_json(biodiversity_bounds(*cfg.params))));
            break;
        }
        case Command::RStar: {
            SimOptions opts;
            opts.horizon = cfg.horizon;
            opts.integ = cfg.integ;
            if (opts.integ.conv_tol <= 0.0) opts.integ.conv_tol = 1e-9;
            auto reports = run_rstar_trials(*cfg.distributions, cfg.species, cfg.trials,
                                            cfg.seed, opts, cfg.threads);
            json arr = json::array();
            std::size_t converged = 0, exact = 0;
            for (const auto& r : reports) {
                arr.push_back(to_json(r));
                if (r.converged) ++converged;
                if (r.converged && r.mismatch_count == 0) ++exact;
            }
            json rep = {{"trials", arr},
                        {"summary",
                         {{"n_trials", reports.size()},
                          {"converged", converged},
                          {"exact_match", exact}}}};
            write_file(path("rstar_report.json"), dump_json_fixed(rep));
            break;
        }
        case Command::Robustness: {
            SimOptions opts;
            opts.horizon = cfg.horizon;
            opts.integ = cfg.integ;
            if (opts.integ.conv_tol <= 0.0) opts.integ.conv_tol = 1e-9;
            CommunitySample sample = sample_community(
                *cfg.distributions, cfg.species, CounterRng::derive_seed(cfg.seed, 1));
            RobustnessReport rep = robustness_sweep(sample, cfg.s_grid, opts);
            write_file(path("sweep.csv"), sweep_csv(rep.curve));
            write_file(path("robustness.json"), dump_json_fixed(to_json(rep)));
            break;
        }
    }
    write_file(path("run_meta.json"), dump_json_fixed(meta));
    return 0;
}

}  // namespace ecodyn
