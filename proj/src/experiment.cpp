#include "hamlet/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <iostream>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include <openssl/evp.h>

#include "hamlet/analysis.hpp"
#include "hamlet/error.hpp"
#include "hamlet/json_io.hpp"
#include "text_util.hpp"

namespace hamlet {

using nlohmann::json;
namespace fs = std::filesystem;

GridSpec GridSpec::table2() {
    return {table2::eps1, table2::eps2, table2::rho, table2::k, table2::k};
}

GridExpansion expand_grid(const GridSpec& grid) {
    GridExpansion out;
    for (double e1 : grid.eps1) {
        for (double e2 : grid.eps2) {
            auto spec = PolicySpec::hamlet_v1(e1, e2);
            if (e1 + e2 > 1.0 + 1e-12) {
                out.rejected.push_back(spec.name());
                continue;
            }
            out.policies.push_back(spec);
        }
    }
    for (double rho : grid.rho) out.policies.push_back(PolicySpec::hamlet_v3(rho));
    for (auto k : grid.best_k_rewards) out.policies.push_back(PolicySpec::best_k_rewards(k));
    for (auto k : grid.best_k_velocity) out.policies.push_back(PolicySpec::best_k_velocity(k));
    return out;
}

namespace {

std::vector<double> parse_budgets(const json& j) {
    if (j.is_string()) {
        const auto name = j.get<std::string>();
        if (name == "experiment1") return table2::budgets_experiment1;
        if (name == "experiment2") return table2::budgets_experiment2;
        throw ConfigError("unknown budget preset '" + name + "'");
    }
    return j.get<std::vector<double>>();
}

GridSpec parse_grid(const json& j) {
    if (j.is_string()) {
        if (j.get<std::string>() == "table2") return GridSpec::table2();
        throw ConfigError("unknown grid preset '" + j.get<std::string>() + "'");
    }
    GridSpec grid;
    for (const auto& [key, value] : j.items()) {
        if (key == "hamlet_v1") {
            grid.eps1 = value.at("eps1").get<std::vector<double>>();
            grid.eps2 = value.at("eps2").get<std::vector<double>>();
        } else if (key == "hamlet_v3") {
            grid.rho = value.at("rho").get<std::vector<double>>();
        } else if (key == "best_k_rewards") {
            grid.best_k_rewards = value.at("k").get<std::vector<std::size_t>>();
        } else if (key == "best_k_velocity") {
            grid.best_k_velocity = value.at("k").get<std::vector<std::size_t>>();
        } else {
            throw ConfigError("unknown grid section '" + key + "'");
        }
    }
    return grid;
}

json grid_to_json(const GridSpec& g) {
    json out = json::object();
    if (!g.eps1.empty() || !g.eps2.empty()) out["hamlet_v1"] = {{"eps1", g.eps1}, {"eps2", g.eps2}};
    if (!g.rho.empty()) out["hamlet_v3"] = {{"rho", g.rho}};
    if (!g.best_k_rewards.empty()) out["best_k_rewards"] = {{"k", g.best_k_rewards}};
    if (!g.best_k_velocity.empty()) out["best_k_velocity"] = {{"k", g.best_k_velocity}};
    return out;
}

fs::path resolve(const fs::path& p, const fs::path& base) { return p.is_absolute() ? p : (base / p).lexically_normal(); }

std::string sanitize(std::string_view s) {
    std::string out;
    for (char c : s) {
        const bool keep = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '.' ||
                          c == '-' || c == '_';
        out += keep ? c : '_';
    }
    return out;
}

std::vector<PolicySpec> dedupe(std::vector<PolicySpec> policies) {
    std::set<std::string> seen;
    std::vector<PolicySpec> out;
    for (auto& p : policies) {
        if (seen.insert(p.name()).second) out.push_back(p);
    }
    return out;
}

json manifest_json(const ExperimentOutcome& outcome) {
    json cells = json::array();
    for (const auto& e : outcome.completed) {
        cells.push_back({{"dataset_id", e.dataset_id},
                         {"policy", e.policy},
                         {"budget", e.budget},
                         {"seed", e.seed},
                         {"file", e.file},
                         {"sha256", e.sha256}});
    }
    return json{{"complete", outcome.failures.empty()}, {"cells", cells}, {"failed", outcome.failures}};
}

} // namespace

ExperimentConfig parse_experiment_config(const json& doc, const fs::path& base_dir) {
    static const std::set<std::string> known = {"traces", "budgets",  "dt",      "policies",  "grid",
                                                "overhead", "seeds", "output", "workers", "log_curves"};
    if (!doc.is_object()) throw ConfigError("config: expected a JSON object");
    for (const auto& [key, _] : doc.items()) {
        if (!known.contains(key)) throw ConfigError("config: unknown key '" + key + "'");
    }
    ExperimentConfig cfg;
    try {
        const auto& traces = doc.at("traces");
        if (traces.contains("synthetic")) {
            const auto& syn = traces.at("synthetic");
            if (syn.is_array()) {
                cfg.traces.synthetic = syn.get<std::vector<SyntheticSpec>>();
            } else {
                cfg.traces.synthetic.push_back(syn.get<SyntheticSpec>());
            }
        } else {
            cfg.traces.path = resolve(traces.at("path").get<std::string>(), base_dir);
            if (traces.contains("format")) {
                const auto f = traces.at("format").get<std::string>();
                if (f == "csv") {
                    cfg.traces.format = TraceFormat::csv;
                } else if (f == "json") {
                    cfg.traces.format = TraceFormat::json;
                } else {
                    throw ConfigError("config: unknown trace format '" + f + "'");
                }
            }
        }
        cfg.budgets = parse_budgets(doc.at("budgets"));
        cfg.dt = doc.value("dt", cfg.dt);
        if (doc.contains("policies")) cfg.policies = doc.at("policies").get<std::vector<PolicySpec>>();
        if (doc.contains("grid")) cfg.grid = parse_grid(doc.at("grid"));
        if (doc.contains("overhead")) cfg.overhead = doc.at("overhead").get<OverheadModel>();
        if (doc.contains("seeds")) cfg.seeds = doc.at("seeds").get<std::vector<std::uint64_t>>();
        cfg.output = resolve(doc.value("output", std::string("results")), base_dir);
        cfg.workers = std::max(1u, doc.value("workers", 1u));
        cfg.log_curves = doc.value("log_curves", false);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    } catch (const DomainError& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return cfg;
}

ExperimentConfig load_experiment_config(const fs::path& path) {
    std::string text;
    try {
        text = detail::read_file(path.string());
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    return parse_experiment_config(doc, fs::absolute(path).parent_path());
}

json to_json(const ExperimentConfig& cfg) {
    json traces;
    if (!cfg.traces.synthetic.empty()) {
        traces["synthetic"] = cfg.traces.synthetic;
    } else {
        traces["path"] = fs::absolute(cfg.traces.path).string();
        if (cfg.traces.format) traces["format"] = *cfg.traces.format == TraceFormat::csv ? "csv" : "json";
    }
    json doc{{"traces", traces},
             {"budgets", cfg.budgets},
             {"dt", cfg.dt},
             {"policies", cfg.policies},
             {"overhead", cfg.overhead},
             {"seeds", cfg.seeds},
             {"output", fs::absolute(cfg.output).string()},
             {"workers", cfg.workers},
             {"log_curves", cfg.log_curves}};
    if (cfg.grid) doc["grid"] = grid_to_json(*cfg.grid);
    return doc;
}

TraceCollection materialize_traces(const TraceSource& source) {
    if (!source.synthetic.empty()) {
        TraceCollection out;
        for (const auto& spec : source.synthetic) {
            if (out.contains(spec.dataset_id)) throw DomainError("duplicate synthetic dataset_id '" + spec.dataset_id + "'");
            out[spec.dataset_id] = generate_traces(spec);
        }
        return out;
    }
    try {
        return load_traces(source.path, source.format.value_or(trace_format_from_path(source.path)));
    } catch (const ParseError&) {
        throw;
    } catch (const DomainError&) {
        throw;
    } catch (const Error& e) {
        throw DomainError(e.what());
    }
}

void validate_experiment(const ExperimentConfig& cfg, const TraceCollection& traces) {
    if (cfg.budgets.empty()) throw ConfigError("config: budgets must not be empty");
    if (cfg.policies.empty()) throw ConfigError("config: policies must not be empty");
    if (cfg.seeds.empty()) throw ConfigError("config: seeds must not be empty");
    if (traces.empty()) throw ConfigError("config: trace source holds no datasets");
    for (const auto& p : cfg.policies) p.validate();
    for (const auto& [dataset, group] : traces) {
        for (double b : cfg.budgets) {
            RunConfig rc{b, cfg.dt, cfg.policies.front(), cfg.overhead, 0};
            try {
                rc.validate(group.size());
            } catch (const ConfigError& e) {
                throw ConfigError("dataset " + dataset + ": " + e.what());
            }
        }
    }
}

std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw Error("sha256 computation failed");
    }
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    for (unsigned i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 0xF];
    }
    return out;
}

std::string result_file_name(const RunResult& r) {
    return sanitize(r.dataset_id) + "__" + sanitize(r.policy_name) + "__B" + detail::format_double(r.budget) +
           "__seed" + std::to_string(r.seed) + ".json";
}

ExperimentOutcome execute_experiment(const ExperimentConfig& cfg, const TraceCollection& traces) {
    struct Cell {
        const std::vector<TuningTrace>* group;
        RunConfig run;
    };
    std::vector<Cell> cells;
    for (const auto& [dataset, group] : traces) {
        for (double b : cfg.budgets) {
            for (const auto& p : cfg.policies) {
                for (auto seed : cfg.seeds) cells.push_back({&group, RunConfig{b, cfg.dt, p, cfg.overhead, seed}});
            }
        }
    }

    const fs::path runs_dir = cfg.output / "runs";
    std::error_code ec;
    fs::create_directories(runs_dir, ec);
    if (ec) throw Error("cannot create '" + runs_dir.string() + "': " + ec.message());

    struct Slot {
        std::optional<RunResult> result;
        std::optional<ManifestEntry> entry;
        std::string failure;
    };
    std::vector<Slot> slots(cells.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < cells.size(); i = next++) {
            const auto& cell = cells[i];
            try {
                auto result = run(*cell.group, cell.run);
                const auto text = to_json(result, cfg.log_curves).dump(1) + "\n";
                const auto name = result_file_name(result);
                detail::write_file((runs_dir / name).string(), text);
                slots[i].entry = ManifestEntry{result.dataset_id, result.policy_name, result.budget, result.seed,
                                               "runs/" + name, sha256_hex(text)};
                slots[i].result = std::move(result);
            } catch (const std::exception& e) {
                slots[i].failure = cell.group->front().dataset_id + " / " + cell.run.policy.name() + " / B" +
                                   detail::format_double(cell.run.budget) + " / seed " +
                                   std::to_string(cell.run.seed) + ": " + e.what();
            }
        }
    };
    const unsigned n_threads = std::max(1u, std::min<unsigned>(cfg.workers, static_cast<unsigned>(cells.size())));
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < slots.size(); ++i) {
        if (slots[i].entry) order.push_back(i);
    }
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto& x = *slots[a].entry;
        const auto& y = *slots[b].entry;
        return std::tie(x.dataset_id, x.policy, x.budget, x.seed) < std::tie(y.dataset_id, y.policy, y.budget, y.seed);
    });

    ExperimentOutcome outcome;
    std::set<std::string> files;
    for (auto i : order) {
        if (!files.insert(slots[i].entry->file).second) {
            outcome.failures.push_back("output file name collision: " + slots[i].entry->file);
            continue;
        }
        outcome.completed.push_back(*slots[i].entry);
        outcome.results.push_back(std::move(*slots[i].result));
    }
    for (const auto& s : slots) {
        if (!s.failure.empty()) outcome.failures.push_back(s.failure);
    }
    std::sort(outcome.failures.begin(), outcome.failures.end());
    detail::write_file((cfg.output / "manifest.json").string(), manifest_json(outcome).dump(1) + "\n");
    return outcome;
}

namespace {

void apply_overrides(ExperimentConfig& cfg, const RunOverrides& o) {
    if (!o.budgets.empty()) cfg.budgets = o.budgets;
    if (!o.seeds.empty()) cfg.seeds = o.seeds;
    if (o.workers) cfg.workers = std::max(1u, *o.workers);
    if (o.output) cfg.output = *o.output;
}

int execute_checked(ExperimentConfig cfg, std::ostream& log) {
    TraceCollection traces;
    try {
        traces = materialize_traces(cfg.traces);
    } catch (const ConfigError& e) {
        log << "config error: " << e.what() << "\n";
        return exit_code::config_error;
    } catch (const Error& e) {
        log << "data error: " << e.what() << "\n";
        return exit_code::data_error;
    }
    try {
        validate_experiment(cfg, traces);
    } catch (const Error& e) {
        log << "config error: " << e.what() << "\n";
        return exit_code::config_error;
    }

    std::error_code ec;
    fs::create_directories(cfg.output, ec);
    try {
        detail::write_file((cfg.output / "config.json").string(), to_json(cfg).dump(2) + "\n");
        const auto outcome = execute_experiment(cfg, traces);
        log << "completed " << outcome.completed.size() << " runs into " << cfg.output.string() << "\n";
        if (!outcome.failures.empty()) {
            for (const auto& f : outcome.failures) log << "failed: " << f << "\n";
            return exit_code::partial_failure;
        }
    } catch (const Error& e) {
        log << "error: " << e.what() << "\n";
        return exit_code::partial_failure;
    }
    return exit_code::ok;
}

} // namespace

int cmd_run(const fs::path& config_path, const RunOverrides& overrides, std::ostream& log) {
    ExperimentConfig cfg;
    try {
        cfg = load_experiment_config(config_path);
    } catch (const Error& e) {
        log << "config error: " << e.what() << "\n";
        return exit_code::config_error;
    }
    apply_overrides(cfg, overrides);
    cfg.grid.reset();
    return execute_checked(std::move(cfg), log);
}

int cmd_sweep(const fs::path& config_path, const RunOverrides& overrides, std::ostream& log) {
    ExperimentConfig cfg;
    try {
        cfg = load_experiment_config(config_path);
    } catch (const Error& e) {
        log << "config error: " << e.what() << "\n";
        return exit_code::config_error;
    }
    if (!cfg.grid) {
        log << "config error: sweep requires a 'grid' section\n";
        return exit_code::config_error;
    }
    apply_overrides(cfg, overrides);
    const auto expansion = expand_grid(*cfg.grid);
    if (!expansion.rejected.empty()) {
        log << "warning: skipping " << expansion.rejected.size() << " grid points with eps1 + eps2 > 1:";
        for (const auto& r : expansion.rejected) log << " " << r;
        log << "\n";
    }
    auto policies = cfg.policies;
    policies.insert(policies.end(), expansion.policies.begin(), expansion.policies.end());
    cfg.policies = dedupe(std::move(policies));
    cfg.grid.reset();
    return execute_checked(std::move(cfg), log);
}

int cmd_analyze(const fs::path& results_dir, const fs::path& out_dir, std::ostream& log) {
    std::vector<fs::path> files;
    std::error_code ec;
    if (!fs::is_directory(results_dir, ec)) {
        log << "data error: '" << results_dir.string() << "' is not a directory\n";
        return exit_code::data_error;
    }
    for (const auto& entry : fs::recursive_directory_iterator(results_dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());

    std::vector<RunResult> results;
    for (const auto& f : files) {
        json doc;
        try {
            doc = json::parse(detail::read_file(f.string()));
        } catch (const std::exception& e) {
            log << "data error: " << f.string() << ": " << e.what() << "\n";
            return exit_code::data_error;
        }
        if (!doc.is_object() || !doc.contains("policy_name") || !doc.contains("best_accuracy")) continue;
        try {
            results.push_back(doc.get<RunResult>());
        } catch (const std::exception& e) {
            log << "data error: " << f.string() << ": " << e.what() << "\n";
            return exit_code::data_error;
        }
    }

    const auto missing = find_missing_cells(results);
    if (!missing.empty()) {
        log << "data error: incomplete comparison groups, missing " << missing.size() << " cells:\n";
        for (const auto& m : missing) log << "  " << m << "\n";
        return exit_code::data_error;
    }
    try {
        const auto table = rank_runs(results);
        const auto cis = all_mean_rank_cis(table);
        emit_report(table, cis, out_dir);
        log << "ranked " << results.size() << " runs over " << table.policies.size() << " policies into "
            << out_dir.string() << "\n";
    } catch (const DomainError& e) {
        log << "data error: " << e.what() << "\n";
        return exit_code::data_error;
    } catch (const Error& e) {
        log << "error: " << e.what() << "\n";
        return exit_code::partial_failure;
    }
    return exit_code::ok;
}

int cmd_gen_traces(const fs::path& spec_path, const fs::path& out_path, std::ostream& log) {
    std::vector<SyntheticSpec> specs;
    try {
        const auto doc = json::parse(detail::read_file(spec_path.string()));
        if (doc.is_array()) {
            specs = doc.get<std::vector<SyntheticSpec>>();
        } else {
            specs.push_back(doc.get<SyntheticSpec>());
        }
    } catch (const std::exception& e) {
        log << "config error: " << spec_path.string() << ": " << e.what() << "\n";
        return exit_code::config_error;
    }
    TraceSource source;
    source.synthetic = specs;
    TraceCollection traces;
    try {
        traces = materialize_traces(source);
    } catch (const Error& e) {
        log << "config error: " << e.what() << "\n";
        return exit_code::config_error;
    }
    try {
        if (out_path.has_parent_path()) fs::create_directories(out_path.parent_path());
        save_traces(out_path, traces, trace_format_from_path(out_path));
    } catch (const std::exception& e) {
        log << "error: " << e.what() << "\n";
        return exit_code::partial_failure;
    }
    std::size_t n = 0;
    for (const auto& [_, g] : traces) n += g.size();
    log << "wrote " << n << " traces in " << traces.size() << " datasets to " << out_path.string() << "\n";
    return exit_code::ok;
}

} // namespace hamlet
