#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "ecodyn/config.hpp"
#include "ecodyn/io.hpp"
#include "test_util.hpp"

using namespace ecodyn;
using nlohmann::json;

namespace {

namespace fs = std::filesystem;

json reference_doc() {
    return json{{"command", "equilibrium"},
                {"params",
                 {{"mu", {0.2}},
                  {"gamma", {1.0}},
                  {"c", {{1.0}}},
                  {"d", {10.0}},
                  {"s", {1.0}},
                  {"x_ext", {0.0}},
                  {"growth", {{"kind", "holling"}, {"r", {1.0}}, {"k", {{1.0}}}}}}}};
}

json rstar_doc() {
    return json{{"command", "rstar"},
                {"trials", 3u},
                {"seed", 42u},
                {"integrator", {{"horizon", 400.0}}},
                {"distributions",
                 {{"species", 8u},
                  {"mu", {{"kind", "uniform"}, {"a", 0.1}, {"b", 0.4}}},
                  {"gamma", 1.0},
                  {"r", 1.0},
                  {"k", {{"kind", "uniform"}, {"a", 0.5}, {"b", 1.5}}},
                  {"c", 1.0},
                  {"x_ext", 0.05},
                  {"x0", 0.5},
                  {"d", 10.0},
                  {"s", 1.0}}}};
}

std::string pointer_of(const json& doc) {
    try {
        parse_config(doc);
    } catch (const ConfigError& e) {
        return e.pointer();
    }
    return "<no error>";
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("ecodyn_cli_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    static int& counter() {
        static int c = 0;
        return c;
    }
};

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream f(p);
    f << text;
}

std::string read_text(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    REQUIRE(f.good());
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

// Runs the installed binary; returns the exit code and captures all output.
int run_cli(const std::string& args, const fs::path& log) {
    std::string cmd = std::string(ECODYN_CLI_PATH) + " " + args + " > " + log.string() +
                      " 2>&1";
    int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("minimal config parses with documented defaults") {
    RunConfig cfg = parse_config(reference_doc());
    CHECK(cfg.command == Command::Equilibrium);
    REQUIRE(cfg.params.has_value());
    CHECK(cfg.params->M == 1);
    CHECK(cfg.params->D[0] == 10.0);
    CHECK(cfg.seed == 0);
    CHECK(cfg.trials == 1);
    CHECK(cfg.out_dir == ".");
    CHECK(cfg.integ.rel_tol == 1e-8);
    CHECK(cfg.horizon == 1e3);
    CHECK_FALSE(cfg.quiet);
}

TEST_CASE("strict parsing reports json pointers") {
    json doc = reference_doc();
    doc["params"]["mu_rate"] = 0.1;
    CHECK(pointer_of(doc) == "/params/mu_rate");

    doc = reference_doc();
    doc["params"]["growth"]["m"] = 2;
    CHECK(pointer_of(doc) == "/params/growth/m");

    doc = reference_doc();
    doc["params"]["s"] = "high";
    CHECK(pointer_of(doc) == "/params/s");

    doc = reference_doc();
    doc["integrator"] = {{"tol", -1.0}};
    CHECK(pointer_of(doc) == "/integrator");

    doc = reference_doc();
    doc.erase("command");
    CHECK_THROWS_AS(parse_config(doc), ConfigError);
    doc["command"] = "meditate";
    CHECK(pointer_of(doc) == "/command");
}

TEST_CASE("structural rules: sections, trials, grids") {
    json doc = reference_doc();
    doc["distributions"] = rstar_doc()["distributions"];
    CHECK_THROWS_WITH_AS(parse_config(doc),
                         "config error at /: keys params and distributions are "
                         "mutually exclusive",
                         ConfigError);

    doc = rstar_doc();
    doc["trials"] = 0u;
    CHECK(pointer_of(doc) == "/trials");

    doc = rstar_doc();
    doc["command"] = "robustness";
    CHECK(pointer_of(doc) == "/s_grid");
    doc["s_grid"] = {0.5, 0.9};
    CHECK(pointer_of(doc) == "/s_grid");
    doc["s_grid"] = {0.9, 0.5};
    CHECK_NOTHROW(parse_config(doc));

    doc = reference_doc();  // equilibrium takes no initial section
    doc["initial"] = {{"x", {1.0}}};
    CHECK(pointer_of(doc) == "/initial");

    doc = rstar_doc();
    doc.erase("distributions");
    CHECK_THROWS_AS(parse_config(doc), ConfigError);
}

TEST_CASE("canonical form ignores presentation and tracks semantics") {
    json a = reference_doc();
    json b = reference_doc();
    b["quiet"] = true;           // presentation-only
    b["out"] = "/tmp/elsewhere"; // not part of the hash
    RunConfig ca = parse_config(a), cb = parse_config(b);
    CHECK(canonical_config(ca) == canonical_config(cb));

    json c = reference_doc();
    c["seed"] = 7u;
    CHECK(canonical_config(parse_config(c)) != canonical_config(ca));

    json d = reference_doc();
    d["params"]["mu"] = {0.21};
    CHECK(canonical_config(parse_config(d)) != canonical_config(ca));
}

TEST_CASE("fixed-format serialization building blocks") {
    CHECK(format_double(1.0) == "1.0000000000000000e+00");
    CHECK(format_double(-0.5) == "-5.0000000000000000e-01");
    CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);

    json j = {{"x", 0.5}, {"n", 3}};
    std::string s = dump_json_fixed(j, 0);
    CHECK(s.find("5.0000000000000000e-01") != std::string::npos);
    CHECK(s.find("\"n\": 3") != std::string::npos);
}

TEST_CASE("equilibrium run writes the frozen fixed point") {
    TempDir dir;
    fs::path cfg = dir.path / "cfg.json";
    write_text(cfg, reference_doc().dump());
    int rc = run_cli("equilibrium --config " + cfg.string() + " --quiet --out " +
                         (dir.path / "out").string(),
                     dir.path / "log.txt");
    CHECK(rc == 0);
    json eq = json::parse(read_text(dir.path / "out" / "equilibrium.json"));
    CHECK(eq["v_eq"][0].get<double>() ==
          doctest::Approx(test::kReferenceVeq).epsilon(1e-12));
    CHECK(eq["x_eq"][0].get<double>() ==
          doctest::Approx(test::kReferenceXeq).epsilon(1e-12));
    CHECK(eq["unique_certified"].get<bool>());

    json meta = json::parse(read_text(dir.path / "out" / "run_meta.json"));
    CHECK(meta["command"] == "equilibrium");
    CHECK(meta["version"] == "0.1.0");
    std::string hash = meta["config_hash"].get<std::string>();
    CHECK(hash.rfind("0x", 0) == 0);
}

TEST_CASE("simulate run writes trajectory, events and terminal equilibrium") {
    TempDir dir;
    json doc = reference_doc();
    doc["command"] = "simulate";
    doc["integrator"] = {{"horizon", 100.0}, {"conv_tol", 1e-9}};
    fs::path cfg = dir.path / "cfg.json";
    write_text(cfg, doc.dump());
    int rc = run_cli("simulate --config " + cfg.string() + " --quiet --out " +
                         (dir.path / "out").string(),
                     dir.path / "log.txt");
    CHECK(rc == 0);
    std::string traj = read_text(dir.path / "out" / "trajectory.csv");
    CHECK(traj.rfind("t,x_1,v_1,n_alive\n", 0) == 0);
    CHECK(read_text(dir.path / "out" / "events.csv") == "species,t_star\n");
    CHECK(fs::exists(dir.path / "out" / "equilibrium.json"));
}

TEST_CASE("config failures exit with code 2 and a pointered message") {
    TempDir dir;
    fs::path cfg = dir.path / "cfg.json";

    write_text(cfg, "{ not json");
    CHECK(run_cli("simulate --config " + cfg.string(), dir.path / "log.txt") == 2);

    json doc = reference_doc();
    doc["params"]["mu_rate"] = 0.1;
    write_text(cfg, doc.dump());
    fs::path log = dir.path / "log2.txt";
    CHECK(run_cli("equilibrium --config " + cfg.string(), log) == 2);
    CHECK(read_text(log).find("/params/mu_rate") != std::string::npos);

    write_text(cfg, rstar_doc().dump());
    CHECK(run_cli("rstar --config " + cfg.string() + " --trials 0 --out " +
                      (dir.path / "out").string(),
                  dir.path / "log3.txt") == 2);

    CHECK(run_cli("equilibrium --config " + (dir.path / "missing.json").string(),
                  dir.path / "log4.txt") == 2);
}

TEST_CASE("repeated ensemble runs reproduce artifacts byte for byte") {
    TempDir dir;
    fs::path cfg = dir.path / "cfg.json";
    write_text(cfg, rstar_doc().dump());
    std::string base = "rstar --config " + cfg.string() + " --quiet --seed 42 ";
    REQUIRE(run_cli(base + "--threads 1 --out " + (dir.path / "a").string(),
                    dir.path / "log_a.txt") == 0);
    REQUIRE(run_cli(base + "--threads 3 --out " + (dir.path / "b").string(),
                    dir.path / "log_b.txt") == 0);
    std::string a = read_text(dir.path / "a" / "rstar_report.json");
    std::string b = read_text(dir.path / "b" / "rstar_report.json");
    CHECK(a == b);
    json rep = json::parse(a);
    CHECK(rep["summary"]["n_trials"] == 3);
    CHECK(rep["trials"].size() == 3);

    // a different seed must change the report
    REQUIRE(run_cli("rstar --config " + cfg.string() + " --quiet --seed 43 --out " +
                        (dir.path / "c").string(),
                    dir.path / "log_c.txt") == 0);
    CHECK(read_text(dir.path / "c" / "rstar_report.json") != a);
}
