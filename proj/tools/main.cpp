#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "cvxbandit/harness.hpp"

namespace {

constexpr int kExitConfigError = 2;
constexpr int kExitSolverError = 3;

struct CommonFlags {
    std::string config_path;
    std::string out_dir;
    std::string algorithm;
    std::uint64_t seed = 0;
    bool seed_set = false;
};

void add_common(CLI::App* cmd, CommonFlags& flags, bool config_required) {
    auto* conf = cmd->add_option("--config", flags.config_path, "experiment config JSON");
    if (config_required) conf->required();
    cmd->add_option("--out", flags.out_dir, "output directory override");
    cmd->add_option("--algorithm", flags.algorithm, "algorithm override");
    cmd->add_option("--seed", flags.seed, "master seed override")
        ->each([&](const std::string&) { flags.seed_set = true; });
}

cvxbandit::ExperimentConfig load_with_overrides(const CommonFlags& flags) {
    cvxbandit::ExperimentConfig config = cvxbandit::ExperimentConfig::load(flags.config_path);
    if (!flags.out_dir.empty()) config.output_dir = flags.out_dir;
    if (!flags.algorithm.empty()) config.algorithm = cvxbandit::parse_algorithm(flags.algorithm);
    if (flags.seed_set) config.master_seed = flags.seed;
    config.validate();
    return config;
}

int cmd_run(const CommonFlags& flags) {
    const auto config = load_with_overrides(flags);
    const auto art = cvxbandit::run_experiment(config);
    std::printf("ledger: %s\n", art.ledger_csv.c_str());
    std::printf("final cumulative regret: %s\n",
                cvxbandit::format_double(art.summary.final_cumulative_regret).c_str());
    std::printf("violations: %d\n", art.summary.violation_count);
    return 0;
}

int cmd_replicate(const CommonFlags& flags, int workers) {
    const auto config = load_with_overrides(flags);
    const auto art = cvxbandit::replicate_and_write(config, workers);
    std::printf("aggregate: %s\n", art.aggregate_csv.c_str());
    std::printf("mean terminal regret: %s\n",
                cvxbandit::format_double(art.result.mean_terminal_regret).c_str());
    std::printf("zero-violation fraction: %s\n",
                cvxbandit::format_double(art.result.zero_violation_fraction).c_str());
    return 0;
}

int cmd_plot(const std::string& dir) {
    for (const std::string& path : cvxbandit::emit_plots(dir))
        std::printf("wrote %s\n", path.c_str());
    return 0;
}

int cmd_oracle(const CommonFlags& flags) {
    const auto config = load_with_overrides(flags);
    const auto set = config.build_decision_set();
    const auto policy =
        cvxbandit::oracle_policy(config.theta_star, config.gamma_star, config.tau, set);
    std::printf("optimal value: %s\n",
                cvxbandit::format_double(config.theta_star.dot(policy.mean)).c_str());
    std::printf("support (%zu points):\n", policy.support.size());
    for (const auto& wp : policy.support) {
        std::printf("  weight %s at (", cvxbandit::format_double(wp.weight).c_str());
        for (int i = 0; i < wp.point.size(); ++i)
            std::printf("%s%s", i ? ", " : "", cvxbandit::format_double(wp.point(i)).c_str());
        std::printf(")\n");
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Constrained linear bandit simulator"};
    app.require_subcommand(1);

    CommonFlags flags;
    int workers = 0;
    std::string plot_dir;

    auto* run = app.add_subcommand("run", "single seeded run, writes ledger and trajectory");
    add_common(run, flags, true);

    auto* rep = app.add_subcommand("replicate", "seeded replicate study with aggregation");
    add_common(rep, flags, true);
    rep->add_option("--workers", workers, "worker pool size (default: hardware)");

    auto* plot = app.add_subcommand("plot", "render SVG plots for an artifact directory");
    plot->add_option("--dir", plot_dir, "artifact directory")->required();

    auto* oracle = app.add_subcommand("oracle", "print the omniscient policy for a config");
    add_common(oracle, flags, true);

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(flags);
        if (rep->parsed()) return cmd_replicate(flags, workers);
        if (plot->parsed()) return cmd_plot(plot_dir);
        if (oracle->parsed()) return cmd_oracle(flags);
    } catch (const cvxbandit::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfigError;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitSolverError;
    }
    return 0;
}
