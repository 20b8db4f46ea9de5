#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hamlet/random.hpp"

namespace hamlet {

enum class PolicyKind {
    round_robin,
    ucb1,
    best_k_rewards,
    best_k_velocity,
    hamlet_v1,
    hamlet_v2,
    hamlet_v3,
};

std::string_view to_string(PolicyKind kind);
PolicyKind policy_kind_from_string(std::string_view name);

struct PolicySpec {
    PolicyKind kind = PolicyKind::round_robin;
    double eps1 = 0.1;   // hamlet_v1: runner-up probability
    double eps2 = 0.1;   // hamlet_v1: uniform-random probability
    double rho = 0.05;   // hamlet_v3: exploration bonus scale
    std::size_t k = 7;   // best_k_*: number of top rewards

    // Output name, e.g. "MasterLC-0.1-0.1", "MasterLC-UCB-0.05", "BestKReward-7".
    std::string name() const;
    // Throws ConfigError.
    void validate() const;

    static PolicySpec round_robin() { return {}; }
    static PolicySpec ucb1() { return {.kind = PolicyKind::ucb1}; }
    static PolicySpec best_k_rewards(std::size_t k) { return {.kind = PolicyKind::best_k_rewards, .k = k}; }
    static PolicySpec best_k_velocity(std::size_t k) { return {.kind = PolicyKind::best_k_velocity, .k = k}; }
    static PolicySpec hamlet_v1(double eps1, double eps2) {
        return {.kind = PolicyKind::hamlet_v1, .eps1 = eps1, .eps2 = eps2};
    }
    static PolicySpec hamlet_v2() { return {.kind = PolicyKind::hamlet_v2}; }
    static PolicySpec hamlet_v3(double rho) { return {.kind = PolicyKind::hamlet_v3, .rho = rho}; }
};

// Inverse of PolicySpec::name(). Throws ConfigError on unknown names.
PolicySpec policy_from_name(std::string_view name);

// Value of one arm as seen by a policy.
struct ArmView {
    double predicted = 0.0;            // r^i, extrapolated reward (HAMLET policies)
    std::size_t pulls = 0;             // n^i
    std::span<const double> rewards;   // per-interval rewards observed (baselines)
    double best_so_far = 0.0;
};

struct BanditView {
    std::vector<ArmView> arms;
    std::size_t total_pulls = 0;  // n
    double remaining = 0.0;       // B_rem
    double budget = 0.0;          // B
    double dt = 0.0;

    double elapsed() const { return budget - remaining; }
    std::vector<double> predicted() const;
};

enum class Rationale { greedy, runner_up, random, ucb_bonus, round_robin };

std::string_view to_string(Rationale rationale);
Rationale rationale_from_string(std::string_view name);

struct Decision {
    std::size_t arm = 0;
    Rationale rationale = Rationale::greedy;
    std::vector<double> scores;  // one action value per arm
};

// Index of the maximum, lowest index on ties.
std::size_t argmax(std::span<const double> values);
// Second entry of the ordering by (value descending, index ascending).
std::size_t runner_up(std::span<const double> values);

// r + rho * sqrt(2 ln n / ln n_i). n_i <= 1 gives +infinity (the arm is forced);
// rho == 0 returns r unchanged.
double ucb_bonus(double r, std::size_t n, std::size_t n_i, double rho);

Decision choose_round_robin(const BanditView& view);
Decision choose_v1(const BanditView& view, double eps1, double eps2, Rng& rng);
Decision choose_v2(const BanditView& view, Rng& rng);
Decision choose_v3(const BanditView& view, double rho);
Decision choose_ucb1(const BanditView& view);

enum class BestKMode { rewards, velocity };

// Mean of the top-min(k, count) rewards, or the mean consecutive increment of
// those values sorted ascending (0 with fewer than two).
double best_k_value(std::span<const double> rewards, std::size_t k, BestKMode mode);
Decision choose_best_k(const BanditView& view, std::size_t k, BestKMode mode);

// A stateful arm-selection rule driven by the simulator.
class Policy {
public:
    virtual ~Policy() = default;
    virtual Decision choose(const BanditView& view, Rng& rng) = 0;
    // Whether the policy reads predicted rewards; the simulator only fits curves when it does.
    virtual bool uses_curves() const = 0;
    virtual std::string name() const = 0;
};

std::unique_ptr<Policy> make_policy(const PolicySpec& spec);

} // namespace hamlet
