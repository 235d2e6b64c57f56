#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "ecodyn/config.hpp"

namespace {

int run_command(ecodyn::Command cmd, const std::string& config_path,
                const std::optional<std::uint64_t>& seed,
                const std::optional<unsigned>& threads,
                const std::optional<std::size_t>& trials, const std::string& out_dir,
                bool quiet) {
    try {
        ecodyn::RunConfig cfg = ecodyn::parse_config_file(config_path);
        cfg.command = cmd;
        if (seed) cfg.seed = *seed;
        if (threads) cfg.threads = *threads;
        if (trials) {
            if (cmd == ecodyn::Command::RStar && *trials == 0)
                throw ecodyn::ConfigError("/trials", "rstar requires at least one trial");
            cfg.trials = *trials;
        }
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        if (quiet) cfg.quiet = true;
        int rc = ecodyn::run(cfg);
        if (!cfg.quiet) std::cout << "artifacts written to " << cfg.out_dir << "\n";
        return rc;
    } catch (const ecodyn::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: numerical failure: " << e.what() << "\n";
        return 3;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "ecodyn: resource-competition ecosystem simulation, equilibria, biodiversity "
        "bounds, and Monte Carlo ensembles"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    std::optional<std::size_t> trials;
    bool quiet = false;

    if (const char* env = std::getenv("ECODYN_THREADS")) {
        try {
            threads = static_cast<unsigned>(std::stoul(env));
        } catch (...) {
            std::cerr << "error: config error: ECODYN_THREADS is not a number\n";
            return 2;
        }
    }

    struct Sub {
        const char* name;
        const char* desc;
        ecodyn::Command cmd;
    };
    const Sub subs[] = {
        {"simulate", "integrate the ODE system and export the trajectory",
         ecodyn::Command::Simulate},
        {"equilibrium", "solve the special-equilibrium fixed point",
         ecodyn::Command::Equilibrium},
        {"bounds", "compute closed-form biodiversity bounds", ecodyn::Command::Bounds},
        {"rstar", "run random-community assembly trials and check the R* rule",
         ecodyn::Command::RStar},
        {"robustness", "sweep decreasing supplies and locate the collapse",
         ecodyn::Command::Robustness},
    };

    for (const Sub& s : subs) {
        CLI::App* sub = app.add_subcommand(s.name, s.desc);
        sub->add_option("--config", config_path, "JSON config file (see README for schema)")
            ->required();
        sub->add_option("--seed", seed, "override the RNG seed (default 0)");
        sub->add_option("--threads", threads,
                        "worker pool width (default: machine parallelism)");
        sub->add_option("--out", out_dir, "output directory (default from config)");
        sub->add_flag("--quiet", quiet, "suppress the completion message");
        if (s.cmd == ecodyn::Command::RStar)
            sub->add_option("--trials", trials, "number of independent trials");
        ecodyn::Command cmd = s.cmd;
        sub->callback([&, cmd] {
            std::exit(run_command(cmd, config_path, seed, threads, trials, out_dir, quiet));
        });
    }

    CLI11_PARSE(app, argc, argv);
    return 0;
}
