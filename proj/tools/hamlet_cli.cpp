#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hamlet/experiment.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Replay tuning traces under wallclock budgets and compare bandit policies"};
    app.require_subcommand(1);

    std::string config_path;
    std::vector<double> budgets;
    std::vector<std::uint64_t> seeds;
    unsigned workers = 0;
    std::string output;

    auto* run = app.add_subcommand("run", "Run every (dataset, budget, policy, seed) cell of a config");
    run->add_option("--config", config_path, "Experiment config (JSON)")->required();
    run->add_option("--budget", budgets, "Override budgets in seconds (repeatable)");
    run->add_option("--seed", seeds, "Override seeds (repeatable)");
    run->add_option("--workers", workers, "Number of concurrent runs");
    run->add_option("--out", output, "Override the output directory");

    auto* sweep = app.add_subcommand("sweep", "Expand the config's parameter grids, then run");
    sweep->add_option("--config", config_path, "Experiment config (JSON)")->required();
    sweep->add_option("--workers", workers, "Number of concurrent runs");
    sweep->add_option("--out", output, "Override the output directory");

    std::string results_dir;
    std::string out_dir;
    auto* analyze = app.add_subcommand("analyze", "Rank run results and compute mean-rank confidence intervals");
    analyze->add_option("--results", results_dir, "Directory containing run result JSON files")->required();
    analyze->add_option("--out", out_dir, "Report output directory")->required();

    std::string spec_path;
    std::string traces_out;
    auto* gen = app.add_subcommand("gen-traces", "Generate synthetic traces from a spec");
    gen->add_option("--spec", spec_path, "Synthetic trace spec (JSON object or array)")->required();
    gen->add_option("--out", traces_out, "Output trace file (.csv or .json)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : hamlet::exit_code::config_error;
    }

    hamlet::RunOverrides overrides;
    overrides.budgets = budgets;
    overrides.seeds = seeds;
    if (workers > 0) overrides.workers = workers;
    if (!output.empty()) overrides.output = output;

    if (*run) return hamlet::cmd_run(config_path, overrides, std::cerr);
    if (*sweep) return hamlet::cmd_sweep(config_path, overrides, std::cerr);
    if (*analyze) return hamlet::cmd_analyze(results_dir, out_dir, std::cerr);
    if (*gen) return hamlet::cmd_gen_traces(spec_path, traces_out, std::cerr);
    return hamlet::exit_code::config_error;
}
