#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hamlet/policies.hpp"
#include "hamlet/simulator.hpp"
#include "hamlet/trace.hpp"

namespace hamlet {

// Parameter sets of the verification experiments.
namespace table2 {
inline const std::vector<double> eps1 = {0.01, 0.05, 0.10, 0.20, 0.40, 0.60};
inline const std::vector<double> eps2 = {0.00, 0.01, 0.05, 0.10, 0.20, 0.40};
inline const std::vector<double> rho = {0.00, 0.05, 0.10, 0.25, 0.50, 0.75, 1.00};
inline const std::vector<std::size_t> k = {3, 5, 7, 10, 20, 50, 100};
inline const std::vector<double> budgets_experiment1 = {150, 300, 450, 600, 900, 1800, 3600};
inline const std::vector<double> budgets_experiment2 = {900, 1800, 2700, 3600, 7200, 10800, 21600, 43200};
} // namespace table2

struct TraceSource {
    std::filesystem::path path;           // used when `synthetic` is empty
    std::optional<TraceFormat> format;    // inferred from the extension when unset
    std::vector<SyntheticSpec> synthetic; // one dataset per spec
};

struct GridSpec {
    std::vector<double> eps1;  // hamlet_v1 rows (cartesian with eps2)
    std::vector<double> eps2;
    std::vector<double> rho;                    // hamlet_v3
    std::vector<std::size_t> best_k_rewards;    // k values
    std::vector<std::size_t> best_k_velocity;   // k values

    static GridSpec table2();
};

struct GridExpansion {
    std::vector<PolicySpec> policies;
    std::vector<std::string> rejected;  // (eps1, eps2) pairs summing above 1
};

GridExpansion expand_grid(const GridSpec& grid);

struct ExperimentConfig {
    TraceSource traces;
    std::vector<double> budgets;
    double dt = 10.0;
    std::vector<PolicySpec> policies;
    std::optional<GridSpec> grid;
    OverheadModel overhead;
    std::vector<std::uint64_t> seeds = {0};
    std::filesystem::path output = "results";
    unsigned workers = 1;
    bool log_curves = false;
};

// Relative trace and output paths resolve against `base_dir`. Throws ConfigError.
ExperimentConfig parse_experiment_config(const nlohmann::json& doc, const std::filesystem::path& base_dir);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);
nlohmann::json to_json(const ExperimentConfig& config);

// Throws ParseError / DomainError.
TraceCollection materialize_traces(const TraceSource& source);

// Checks non-empty lists, policy parameters and that every budget covers the
// init phase of every dataset. Throws ConfigError before anything runs.
void validate_experiment(const ExperimentConfig& config, const TraceCollection& traces);

struct ManifestEntry {
    std::string dataset_id;
    std::string policy;
    double budget = 0.0;
    std::uint64_t seed = 0;
    std::string file;    // relative to the output directory
    std::string sha256;  // of the file contents
};

struct ExperimentOutcome {
    std::vector<ManifestEntry> completed;
    std::vector<std::string> failures;
    std::vector<RunResult> results;  // same order as `completed`
};

// Runs the (dataset x budget x policy x seed) product on `config.workers`
// threads, writes one JSON per run under <output>/runs, then the sorted manifest.
ExperimentOutcome execute_experiment(const ExperimentConfig& config, const TraceCollection& traces);

std::string sha256_hex(std::string_view data);
std::string result_file_name(const RunResult& result);

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int config_error = 2;
inline constexpr int data_error = 3;
inline constexpr int partial_failure = 4;
} // namespace exit_code

struct RunOverrides {
    std::vector<double> budgets;
    std::vector<std::uint64_t> seeds;
    std::optional<unsigned> workers;
    std::optional<std::filesystem::path> output;
};

int cmd_run(const std::filesystem::path& config_path, const RunOverrides& overrides, std::ostream& log);
int cmd_sweep(const std::filesystem::path& config_path, const RunOverrides& overrides, std::ostream& log);
int cmd_analyze(const std::filesystem::path& results_dir, const std::filesystem::path& out_dir, std::ostream& log);
int cmd_gen_traces(const std::filesystem::path& spec_path, const std::filesystem::path& out_path, std::ostream& log);

} // namespace hamlet
