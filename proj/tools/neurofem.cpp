#include "neurofem/experiments.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace neurofem;

namespace {

constexpr int kConfigError = 2;
constexpr int kNumericalFailure = 3;

ExperimentConfig load(const std::string& experiment, const std::string& config_path) {
    ExperimentConfig c = ExperimentConfig::defaults(experiment);
    if (!config_path.empty())
        c.apply_ini(config_path);
    return c;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Finite elements with neural-network-controlled weights"};
    app.require_subcommand(1);

    std::string experiment, config_path, out_dir;
    std::int64_t seed = -1;
    unsigned workers = 0;
    auto* run = app.add_subcommand("run", "run an experiment and write trace, solution and summary files");
    run->add_option("experiment", experiment, "experiment name")->required()->check(CLI::IsMember(experiment_names()));
    run->add_option("--config", config_path, "INI file overriding the experiment defaults");
    run->add_option("--out", out_dir, "output directory");
    run->add_option("--seed", seed, "network seed");
    run->add_option("--workers", workers, "sweep workers (0: hardware threads)");

    std::string verify_config, verify_experiment_name;
    auto* verify = app.add_subcommand("verify", "stability and Petrov-Galerkin checks at the initial control");
    verify->add_option("--config", verify_config, "INI file")->required()->check(CLI::ExistingFile);
    verify->add_option("--experiment", verify_experiment_name, "experiment whose defaults the file overrides");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kConfigError;
    }

    try {
        if (*run) {
            ExperimentConfig c = load(experiment, config_path);
            if (!out_dir.empty())
                c.out_dir = out_dir;
            if (seed >= 0)
                c.seed = static_cast<std::uint64_t>(seed);
            if (workers > 0)
                c.workers = workers;
            const ExperimentResult r = run_experiment(c);
            std::cout << r.summary.dump(2) << '\n';
            return 0;
        }
        const std::string name = verify_experiment_name.empty() ? experiment_in_ini(verify_config) : verify_experiment_name;
        ExperimentConfig c = ExperimentConfig::defaults(name);
        c.apply_ini(verify_config);
        const auto report = verify_experiment(c);
        std::cout << report.dump(2) << '\n';
        return report["passed"].get<bool>() ? 0 : kNumericalFailure;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kNumericalFailure;
    }
}
