#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "hamlet/learning_curve.hpp"
#include "hamlet/policies.hpp"
#include "hamlet/trace.hpp"

namespace hamlet {

enum class OverheadMode { none, fixed, measured };

std::string_view to_string(OverheadMode mode);
OverheadMode overhead_mode_from_string(std::string_view name);

struct OverheadModel {
    OverheadMode mode = OverheadMode::none;
    double seconds = 0.0;  // per-iteration charge in fixed mode
};

struct RunConfig {
    double budget = 0.0;  // B, seconds
    double dt = 10.0;     // interval, seconds
    PolicySpec policy;
    OverheadModel overhead;
    std::uint64_t seed = 0;

    // Throws ConfigError. The init phase (one dt per arm) must fit in the budget,
    // and a fixed overhead must stay below dt.
    void validate(std::size_t n_arms) const;
};

// Seconds charged against the budget for one iteration's bandit computation.
double charge_overhead(const RunConfig& config, double measured);

// Events with from < t <= to, in order. Windows that partition [0, T] reveal
// every event exactly once.
std::span<const TraceEvent> reveal(const TuningTrace& trace, double from, double to);

// Per-arm replay state.
struct ArmState {
    std::string arm_id;
    std::size_t pulls = 0;
    double t_x = 0.0;  // pulls * dt
    std::vector<TraceEvent> observed;
    std::vector<EnvelopePoint> envelope;
    FittedCurve curve;
    std::vector<double> rewards;  // per-interval rewards fed to the baselines

    double best_so_far() const { return envelope.empty() ? 0.0 : envelope.back().y; }
};

struct DecisionRecord {
    std::size_t iteration = 0;  // 0 is the Round Robin init
    std::size_t arm = 0;
    Rationale rationale = Rationale::round_robin;
    double remaining = 0.0;  // B_rem when the decision was taken
    std::vector<double> scores;
    std::vector<FittedCurve> curves;  // snapshot the decision was based on (empty for init and baselines)
};

struct ArmAllocation {
    std::string arm_id;
    double seconds = 0.0;
    std::size_t pulls = 0;
};

struct RunResult {
    std::string dataset_id;
    std::string policy_name;
    double budget = 0.0;
    double dt = 0.0;
    std::uint64_t seed = 0;
    double best_accuracy = 0.0;
    std::vector<ArmAllocation> allocations;
    double overhead = 0.0;
    std::vector<DecisionRecord> decisions;

    double allocated() const;  // sum of per-arm seconds
};

// Monotonic clock in seconds, injectable for the measured overhead mode.
using Clock = std::function<double()>;
Clock steady_clock();

struct RunOptions {
    Clock clock;  // defaults to steady_clock()
    // Called after every executed pull with the current arm states.
    std::function<void(std::size_t iteration, std::span<const ArmState>)> observer;
};

// Replays one dataset group under a budget. Deterministic for the none and
// fixed overhead modes. Throws ConfigError / DomainError.
RunResult run(std::span<const TuningTrace> traces, const RunConfig& config, const RunOptions& options = {});

// Same loop with a caller-supplied policy (config.policy only names the run).
RunResult run(std::span<const TuningTrace> traces, const RunConfig& config, Policy& policy,
              const RunOptions& options = {});

// Debug CSV of the decision log: iteration,arm,rationale,remaining,score_0..score_{I-1}.
std::string format_decision_log_csv(const RunResult& result);

} // namespace hamlet
