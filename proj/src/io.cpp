#include "ecodyn/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ecodyn {

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.16e", x);
    return buf;
}

namespace {

void dump_rec(const nlohmann::json& j, std::ostringstream& os, int indent, int depth) {
    const std::string pad(static_cast<std::size_t>(indent * depth), ' ');
    const std::string pad_in(static_cast<std::size_t>(indent * (depth + 1)), ' ');
    switch (j.type()) {
        case nlohmann::json::value_t::object: {
            if (j.empty()) {
                os << "{}";
                return;
            }
            os << "{\n";
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (!first) os << ",\n";
                first = false;
                os << pad_in << nlohmann::json(it.key()).dump() << ": ";
                dump_rec(it.value(), os, indent, depth + 1);
            }
            os << "\n" << pad << "}";
            return;
        }
        case nlohmann::json::value_t::array: {
            if (j.empty()) {
                os << "[]";
                return;
            }
            os << "[\n";
            bool first = true;
            for (const auto& el : j) {
                if (!first) os << ",\n";
                first = false;
                os << pad_in;
                dump_rec(el, os, indent, depth + 1);
            }
            os << "\n" << pad << "]";
            return;
        }
        case nlohmann::json::value_t::number_float:
            os << format_double(j.get<double>());
            return;
        default:
            os << j.dump();
            return;
    }
}

nlohmann::json vec_json(const Vec& v) {
    nlohmann::json a = nlohmann::json::array();
    for (double x : v) a.push_back(x);
    return a;
}

nlohmann::json index_json(const std::vector<std::size_t>& v) {
    nlohmann::json a = nlohmann::json::array();
    for (std::size_t x : v) a.push_back(x + 1);  // 1-based in reports
    return a;
}

}  // namespace

std::string dump_json_fixed(const nlohmann::json& j, int indent) {
    std::ostringstream os;
    dump_rec(j, os, indent, 0);
    os << "\n";
    return os.str();
}

std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

nlohmann::json to_json(const EquilibriumResult& eq) {
    return {{"v_eq", vec_json(eq.v_eq)},
            {"x_eq", vec_json(eq.x_eq)},
            {"bracket", {{"v_lo", vec_json(eq.v_lo)}, {"v_hi", vec_json(eq.v_hi)}}},
            {"residual", eq.residual},
            {"iterations", eq.iterations},
            {"unique_certified", eq.unique_certified}};
}

nlohmann::json to_json(const BiodiversityBounds& b) {
    nlohmann::json j{{"resource_floor",
                      {{"value", vec_json(b.resource_floor)}, {"provenance", "closed-form"}}},
                     {"lower_bm", b.lower_bm},
                     {"mass_extinction", b.mass_extinction},
                     {"mass_extinction_margin", b.mass_extinction_margin}};
    if (!b.lambda.empty()) {
        j["v_bar"] = b.v_bar;
        j["lambda"] = vec_json(b.lambda);
        j["beta"] = vec_json(b.beta);
    }
    if (b.upper_rough_finite)
        j["upper_rough"] = {{"value", b.upper_rough}, {"provenance", "closed-form"}};
    else
        j["upper_rough"] = {{"value", "unbounded"}, {"provenance", "closed-form"}};
    if (b.n_star_bracket)
        j["n_max_bracket"] = {b.n_star_bracket->first, b.n_star_bracket->second};
    return j;
}

nlohmann::json to_json(const RStarReport& r) {
    return {{"m_species", r.M},
            {"n_e_simulated", r.n_e_simulated},
            {"n_e_predicted", r.n_e_predicted},
            {"survivors_simulated", index_json(r.survivors_simulated)},
            {"survivors_predicted", index_json(r.survivors_predicted)},
            {"mismatch_count", r.mismatch_count},
            {"beta_gap", r.beta_gap},
            {"v_eq", r.v_eq},
            {"v_terminal", r.v_terminal},
            {"converged", r.converged},
            {"rho_certified", r.rho_certified}};
}

nlohmann::json to_json(const RobustnessReport& r) {
    nlohmann::json curve = nlohmann::json::array();
    for (const auto& pt : r.curve)
        curve.push_back({{"s", pt.S},
                         {"n_e", pt.n_e},
                         {"v_eq", pt.v_eq},
                         {"mass_extinct", pt.mass_extinct}});
    return {{"p_stress", r.p_stress},
            {"r_b_empirical", r.r_b_empirical},
            {"delta_s", r.delta_s},
            {"delta_ne", r.delta_ne},
            {"s_critical", r.s_critical},
            {"monotone", r.monotone},
            {"curve", curve}};
}

std::string trajectory_csv(const Trajectory& traj) {
    std::ostringstream os;
    if (traj.samples.empty()) return "";
    std::size_t M = traj.samples.front().x.size(), m = traj.samples.front().v.size();
    os << "t";
    for (std::size_t i = 1; i <= M; ++i) os << ",x_" << i;
    for (std::size_t k = 1; k <= m; ++k) os << ",v_" << k;
    os << ",n_alive\n";
    for (const State& s : traj.samples) {
        os << format_double(s.t);
        for (double x : s.x) os << "," << format_double(x);
        for (double v : s.v) os << "," << format_double(v);
        os << "," << s.n_alive() << "\n";
    }
    return os.str();
}

std::string events_csv(const Trajectory& traj) {
    std::ostringstream os;
    os << "species,t_star\n";
    for (const auto& ev : traj.events)
        os << (ev.species + 1) << "," << format_double(ev.time) << "\n";
    return os.str();
}

std::string sweep_csv(const std::vector<SweepPoint>& curve) {
    std::ostringstream os;
    os << "S,N_e,v_eq,mass_extinct\n";
    for (const auto& pt : curve)
        os << format_double(pt.S) << "," << pt.n_e << "," << format_double(pt.v_eq) << ","
           << (pt.mass_extinct ? 1 : 0) << "\n";
    return os.str();
}

void write_file(const std::string& path, const std::string& contents) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f << contents;
    if (!f) throw std::runtime_error("write failed: " + path);
}

}  // namespace ecodyn
