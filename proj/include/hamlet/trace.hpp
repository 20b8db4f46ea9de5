#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace hamlet {

// One completed evaluation of a tuner: cumulative arm execution time and test score.
struct TraceEvent {
    double t = 0.0;
    double accuracy = 0.0;

    friend bool operator==(const TraceEvent&, const TraceEvent&) = default;
};

// Recorded evaluations of one tuner arm on one dataset. Events are strictly
// ascending in t; accuracies are raw scores and need not be monotone.
struct TuningTrace {
    std::string arm_id;
    std::string dataset_id;
    std::vector<TraceEvent> events;

    friend bool operator==(const TuningTrace&, const TuningTrace&) = default;
};

// Traces grouped by dataset_id. Within a group, arms keep their order of first
// appearance in the source.
using TraceCollection = std::map<std::string, std::vector<TuningTrace>>;

enum class TraceFormat { csv, json };

// Ground truth of one synthetic arm:
// asymptote * (1 - exp(-rate * max(0, t - delay))).
struct SaturatingCurve {
    double asymptote = 0.8;
    double rate = 0.01;
    double delay = 0.0;

    double operator()(double t) const;
};

struct SyntheticSpec {
    std::string dataset_id = "synthetic";
    double horizon = 600.0;
    std::vector<SaturatingCurve> arms;
    double mean_gap = 5.0;
    double noise = 0.02;
    std::uint64_t seed = 0;

    std::size_t n_arms() const { return arms.size(); }
    // Throws DomainError when an invariant is violated.
    void validate() const;
};

// Throws DomainError on invariant violations (accuracy range, t order, ids).
void validate_trace(const TuningTrace& trace);

TraceFormat trace_format_from_path(const std::filesystem::path& path);

// Reads a CSV (header `dataset_id,arm_id,elapsed_seconds,accuracy`) or JSON
// trace file. ParseError reports the offending line, DomainError the offending row.
TraceCollection load_traces(const std::filesystem::path& path, TraceFormat format);
TraceCollection parse_traces_csv(const std::string& text, const std::string& source = "<string>");
TraceCollection parse_traces_json(const std::string& text, const std::string& source = "<string>");

void save_traces(const std::filesystem::path& path, const TraceCollection& traces, TraceFormat format);
std::string format_traces_csv(const TraceCollection& traces);
std::string format_traces_json(const TraceCollection& traces);

// Reproducible synthetic traces: Poisson evaluation arrivals with the given
// mean gap, scores at or below the ground-truth curve by half-normal noise.
std::vector<TuningTrace> generate_traces(const SyntheticSpec& spec);

} // namespace hamlet
