#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "collapsar/errors.hpp"
#include "collapsar/experiments.hpp"

namespace {

struct Options {
    std::string config_path;
    std::string output_dir;
    long long seed = -1;
    int jobs = 0;
    bool check = false;
};

int run(const std::string& name, const Options& opt) {
    collapsar::ExperimentConfig cfg = collapsar::load_experiment_config(opt.config_path);
    if (cfg.experiment.empty())
        cfg.experiment = name;
    else if (cfg.experiment != name)
        throw collapsar::ConfigError("config names experiment '" + cfg.experiment +
                                     "' but the '" + name + "' command was invoked");
    if (!opt.output_dir.empty()) cfg.output_dir = opt.output_dir;
    if (opt.seed >= 0) cfg.seed = static_cast<std::uint64_t>(opt.seed);
    if (opt.jobs > 0) cfg.jobs = opt.jobs;

    if (opt.check) {
        std::string msg;
        bool ok = collapsar::run_with_check(cfg, &msg);
        std::cout << (ok ? "check passed" : "check failed: " + msg) << "\n";
        return ok ? 0 : 4;
    }
    collapsar::run_experiment(cfg);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"pseudospectral toolkit for semirelativistic Hartree collapse"};
    app.require_subcommand(1);

    const struct {
        const char* name;
        const char* help;
    } commands[] = {
        {"evolve", "integrate one trajectory and record monitor rows"},
        {"reg-sweep", "regularized-kernel convergence sweep against the bare run"},
        {"blowup", "collapse-criterion check plus monitored integration"},
        {"critical-lambda", "variational upper estimate of the critical coupling"},
        {"fock-check", "truncated Fock-space identity suite"},
        {"inequalities", "randomized Kato/Hardy ratio bounds"},
    };

    Options opt;
    int code = 0;
    for (const auto& c : commands) {
        CLI::App* cmd = app.add_subcommand(c.name, c.help);
        cmd->add_option("--config", opt.config_path, "experiment config file")
            ->required();
        cmd->add_option("--output-dir", opt.output_dir, "override output.dir");
        cmd->add_option("--seed", opt.seed, "override the config seed");
        cmd->add_option("--jobs", opt.jobs, "worker threads for independent runs");
        cmd->add_flag("--check", opt.check,
                      "verify the experiment's thresholds; exit 4 when violated");
        std::string name = c.name;
        cmd->callback([&, name] { code = run(name, opt); });
    }

    try {
        app.parse(argc, argv);
        return code;
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const collapsar::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const collapsar::ContractViolation& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const collapsar::NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
