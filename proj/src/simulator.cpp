#include "hamlet/simulator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <set>

#include "hamlet/error.hpp"
#include "text_util.hpp"

namespace hamlet {

std::string_view to_string(OverheadMode mode) {
    switch (mode) {
    case OverheadMode::none: return "none";
    case OverheadMode::fixed: return "fixed";
    case OverheadMode::measured: return "measured";
    }
    return "unknown";
}

OverheadMode overhead_mode_from_string(std::string_view name) {
    if (name == "none") return OverheadMode::none;
    if (name == "fixed") return OverheadMode::fixed;
    if (name == "measured") return OverheadMode::measured;
    throw ConfigError("unknown overhead mode '" + std::string(name) + "'");
}

void RunConfig::validate(std::size_t n_arms) const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("dt must be positive");
    if (n_arms == 0) throw ConfigError("at least one arm required");
    if (!std::isfinite(budget) || budget < dt * static_cast<double>(n_arms)) {
        throw ConfigError("budget " + detail::format_double(budget) + " s cannot cover the init phase of " +
                          std::to_string(n_arms) + " arms x dt " + detail::format_double(dt) + " s");
    }
    if (overhead.mode == OverheadMode::fixed && !(overhead.seconds >= 0.0 && overhead.seconds < dt)) {
        throw ConfigError("fixed overhead must be in [0, dt)");
    }
    policy.validate();
}

double charge_overhead(const RunConfig& config, double measured) {
    switch (config.overhead.mode) {
    case OverheadMode::none: return 0.0;
    case OverheadMode::fixed: return config.overhead.seconds;
    case OverheadMode::measured: return std::max(0.0, measured);
    }
    return 0.0;
}

std::span<const TraceEvent> reveal(const TuningTrace& trace, double from, double to) {
    const auto& ev = trace.events;
    auto by_time = [](const TraceEvent& e, double t) { return e.t <= t; };
    const auto first = std::lower_bound(ev.begin(), ev.end(), from, by_time);
    const auto last = std::lower_bound(first, ev.end(), to, by_time);
    return {first, last};
}

double RunResult::allocated() const {
    double total = 0.0;
    for (const auto& a : allocations) total += a.seconds;
    return total;
}

Clock steady_clock() {
    return [] {
        using namespace std::chrono;
        return duration<double>(steady_clock::now().time_since_epoch()).count();
    };
}

namespace {

void check_traces(std::span<const TuningTrace> traces) {
    if (traces.empty()) throw DomainError("run: no traces");
    std::set<std::string> ids;
    for (const auto& t : traces) {
        if (t.dataset_id != traces.front().dataset_id)
            throw DomainError("run: traces span datasets '" + traces.front().dataset_id + "' and '" + t.dataset_id + "'");
        if (!ids.insert(t.arm_id).second) throw DomainError("run: duplicate arm '" + t.arm_id + "'");
    }
}

class Replay {
public:
    Replay(std::span<const TuningTrace> traces, const RunConfig& config) : traces_(traces), config_(config) {
        arms_.resize(traces.size());
        for (std::size_t i = 0; i < traces.size(); ++i) arms_[i].arm_id = traces[i].arm_id;
    }

    void pull(std::size_t i) {
        auto& arm = arms_[i];
        const double from = static_cast<double>(arm.pulls) * config_.dt;
        ++arm.pulls;
        ++total_pulls_;
        arm.t_x = static_cast<double>(arm.pulls) * config_.dt;
        const auto fresh = reveal(traces_[i], from, arm.t_x);
        for (const auto& e : fresh) {
            arm.observed.push_back(e);
            if (arm.envelope.empty() || e.accuracy > arm.envelope.back().y) arm.envelope.push_back({e.t, e.accuracy});
            best_accuracy_ = std::max(best_accuracy_, e.accuracy);
        }
        if (fresh.empty()) {
            arm.rewards.push_back(arm.best_so_far());
        } else {
            for (const auto& e : fresh) arm.rewards.push_back(e.accuracy);
        }
    }

    // The fit depends only on the envelope, which changes only when the arm reveals a new record.
    void refit() {
        for (auto& arm : arms_) {
            if (!fitted_once_ || arm.curve.n_points != arm.envelope.size()) {
                arm.curve = fit_arctan(arm.envelope);
            }
        }
        fitted_once_ = true;
    }

    BanditView view(bool with_predictions, double remaining) const {
        BanditView v;
        v.total_pulls = total_pulls_;
        v.remaining = remaining;
        v.budget = config_.budget;
        v.dt = config_.dt;
        v.arms.reserve(arms_.size());
        for (const auto& arm : arms_) {
            ArmView a;
            a.pulls = arm.pulls;
            a.rewards = arm.rewards;
            a.best_so_far = arm.best_so_far();
            a.predicted = with_predictions ? extrapolate_reward(arm.curve, arm.t_x, std::max(0.0, remaining)) : 0.0;
            v.arms.push_back(std::move(a));
        }
        return v;
    }

    double remaining(double overhead) const {
        return config_.budget - static_cast<double>(total_pulls_) * config_.dt - overhead;
    }

    std::vector<FittedCurve> curves() const {
        std::vector<FittedCurve> out;
        for (const auto& arm : arms_) out.push_back(arm.curve);
        return out;
    }

    std::span<const ArmState> arms() const { return arms_; }
    double best_accuracy() const { return best_accuracy_; }

private:
    std::span<const TuningTrace> traces_;
    const RunConfig& config_;
    std::vector<ArmState> arms_;
    std::size_t total_pulls_ = 0;
    double best_accuracy_ = 0.0;
    bool fitted_once_ = false;
};

} // namespace

RunResult run(std::span<const TuningTrace> traces, const RunConfig& config, const RunOptions& options) {
    auto policy = make_policy(config.policy);
    return run(traces, config, *policy, options);
}

RunResult run(std::span<const TuningTrace> traces, const RunConfig& config, Policy& policy,
              const RunOptions& options) {
    check_traces(traces);
    config.validate(traces.size());
    const Clock clock = options.clock ? options.clock : steady_clock();
    // Remaining budget within this tolerance counts as spent, so that
    // accumulated rounding in pulls * dt never grants an extra interval.
    const double exhausted = 1e-9 * std::max(config.budget, config.dt);

    Rng rng(config.seed);
    Replay replay(traces, config);
    RunResult result;
    result.dataset_id = traces.front().dataset_id;
    result.policy_name = policy.name();
    result.budget = config.budget;
    result.dt = config.dt;
    result.seed = config.seed;

    double overhead = 0.0;
    for (std::size_t i = 0; i < traces.size(); ++i) {
        const double before = replay.remaining(overhead);
        replay.pull(i);
        result.decisions.push_back({0, i, Rationale::round_robin, before, {}, {}});
    }
    if (options.observer) options.observer(0, replay.arms());

    const bool fits = policy.uses_curves();
    for (std::size_t iteration = 1; replay.remaining(overhead) > exhausted; ++iteration) {
        const double remaining = replay.remaining(overhead);
        const double started = config.overhead.mode == OverheadMode::measured ? clock() : 0.0;
        if (fits) replay.refit();
        auto decision = policy.choose(replay.view(fits, remaining), rng);
        const double measured = config.overhead.mode == OverheadMode::measured ? clock() - started : 0.0;
        if (decision.arm >= traces.size()) throw DomainError("policy returned invalid arm index");

        // Bandit computation is paid before the interval it schedules; if it
        // exhausts the budget the interval is not run.
        overhead += charge_overhead(config, measured);
        if (replay.remaining(overhead) <= exhausted) break;

        replay.pull(decision.arm);
        result.decisions.push_back({iteration, decision.arm, decision.rationale, remaining, std::move(decision.scores),
                                    fits ? replay.curves() : std::vector<FittedCurve>{}});
        if (options.observer) options.observer(iteration, replay.arms());
    }

    for (const auto& arm : replay.arms()) result.allocations.push_back({arm.arm_id, arm.t_x, arm.pulls});
    result.best_accuracy = replay.best_accuracy();
    result.overhead = overhead;
    return result;
}

std::string format_decision_log_csv(const RunResult& result) {
    const std::size_t n_arms = result.allocations.size();
    std::string out = "iteration,arm,rationale,remaining";
    for (std::size_t i = 0; i < n_arms; ++i) out += ",score_" + std::to_string(i);
    out += '\n';
    for (const auto& d : result.decisions) {
        out += std::to_string(d.iteration) + ',' + std::to_string(d.arm) + ',' + std::string(to_string(d.rationale)) +
               ',' + detail::format_double(d.remaining);
        for (std::size_t i = 0; i < n_arms; ++i) {
            out += ',';
            if (i < d.scores.size()) out += detail::format_double(d.scores[i]);
        }
        out += '\n';
    }
    return out;
}

} // namespace hamlet
