#include "hamlet/policies.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>

#include "hamlet/error.hpp"
#include "text_util.hpp"

namespace hamlet {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct KindName {
    PolicyKind kind;
    std::string_view name;
};

constexpr KindName kKindNames[] = {
    {PolicyKind::round_robin, "round_robin"},       {PolicyKind::ucb1, "ucb1"},
    {PolicyKind::best_k_rewards, "best_k_rewards"}, {PolicyKind::best_k_velocity, "best_k_velocity"},
    {PolicyKind::hamlet_v1, "hamlet_v1"},           {PolicyKind::hamlet_v2, "hamlet_v2"},
    {PolicyKind::hamlet_v3, "hamlet_v3"},
};

std::optional<double> number_after(std::string_view name, std::string_view prefix) {
    if (!name.starts_with(prefix)) return std::nullopt;
    return detail::parse_double(name.substr(prefix.size()));
}

double exploration_term(std::size_t n, std::size_t n_i) {
    if (n_i == 0) return kInf;
    return std::sqrt(2.0 * std::log(static_cast<double>(std::max<std::size_t>(n, 1))) / static_cast<double>(n_i));
}

Decision greedy(const BanditView& view) {
    auto r = view.predicted();
    const auto arm = argmax(r);
    return {arm, Rationale::greedy, std::move(r)};
}

Decision uniform_random(const BanditView& view, Rng& rng) {
    return {rng.index(view.arms.size()), Rationale::random, view.predicted()};
}

void require_arms(const BanditView& view) {
    if (view.arms.empty()) throw DomainError("policy: bandit view has no arms");
}

} // namespace

std::string_view to_string(PolicyKind kind) {
    for (const auto& kn : kKindNames) {
        if (kn.kind == kind) return kn.name;
    }
    return "unknown";
}

PolicyKind policy_kind_from_string(std::string_view name) {
    for (const auto& kn : kKindNames) {
        if (kn.name == name) return kn.kind;
    }
    throw ConfigError("unknown policy kind '" + std::string(name) + "'");
}

std::string PolicySpec::name() const {
    switch (kind) {
    case PolicyKind::round_robin: return "RoundRobin";
    case PolicyKind::ucb1: return "UCB";
    case PolicyKind::best_k_rewards: return "BestKReward-" + std::to_string(k);
    case PolicyKind::best_k_velocity: return "BestKVelocity-" + std::to_string(k);
    case PolicyKind::hamlet_v1: return "MasterLC-" + detail::format_double(eps1) + "-" + detail::format_double(eps2);
    case PolicyKind::hamlet_v2: return "MasterLCDecay";
    case PolicyKind::hamlet_v3: return "MasterLC-UCB-" + detail::format_double(rho);
    }
    return "unknown";
}

void PolicySpec::validate() const {
    const std::string where = "policy " + name() + ": ";
    switch (kind) {
    case PolicyKind::hamlet_v1:
        if (!(eps1 >= 0.0 && eps1 <= 1.0) || !(eps2 >= 0.0 && eps2 <= 1.0))
            throw ConfigError(where + "eps1 and eps2 must be probabilities");
        if (eps1 + eps2 > 1.0 + 1e-12) throw ConfigError(where + "eps1 + eps2 must not exceed 1");
        break;
    case PolicyKind::hamlet_v3:
        if (!(rho >= 0.0) || !std::isfinite(rho)) throw ConfigError(where + "rho must be finite and >= 0");
        break;
    case PolicyKind::best_k_rewards:
    case PolicyKind::best_k_velocity:
        if (k < 1) throw ConfigError(where + "k must be >= 1");
        break;
    default: break;
    }
}

PolicySpec policy_from_name(std::string_view name) {
    if (name == "RoundRobin") return PolicySpec::round_robin();
    if (name == "UCB") return PolicySpec::ucb1();
    if (name == "MasterLCDecay") return PolicySpec::hamlet_v2();
    if (auto rho = number_after(name, "MasterLC-UCB-")) return PolicySpec::hamlet_v3(*rho);
    if (auto k = number_after(name, "BestKReward-"); k && *k >= 1 && *k == std::floor(*k))
        return PolicySpec::best_k_rewards(static_cast<std::size_t>(*k));
    if (auto k = number_after(name, "BestKVelocity-"); k && *k >= 1 && *k == std::floor(*k))
        return PolicySpec::best_k_velocity(static_cast<std::size_t>(*k));
    if (name.starts_with("MasterLC-")) {
        const auto rest = name.substr(9);
        const auto dash = rest.find('-');
        if (dash != std::string_view::npos) {
            auto e1 = detail::parse_double(rest.substr(0, dash));
            auto e2 = detail::parse_double(rest.substr(dash + 1));
            if (e1 && e2) return PolicySpec::hamlet_v1(*e1, *e2);
        }
    }
    throw ConfigError("unknown policy name '" + std::string(name) + "'");
}

std::vector<double> BanditView::predicted() const {
    std::vector<double> r;
    r.reserve(arms.size());
    for (const auto& a : arms) r.push_back(a.predicted);
    return r;
}

std::string_view to_string(Rationale rationale) {
    switch (rationale) {
    case Rationale::greedy: return "greedy";
    case Rationale::runner_up: return "runner_up";
    case Rationale::random: return "random";
    case Rationale::ucb_bonus: return "ucb_bonus";
    case Rationale::round_robin: return "round_robin";
    }
    return "unknown";
}

Rationale rationale_from_string(std::string_view name) {
    for (auto r : {Rationale::greedy, Rationale::runner_up, Rationale::random, Rationale::ucb_bonus,
                   Rationale::round_robin}) {
        if (to_string(r) == name) return r;
    }
    throw ParseError("unknown rationale '" + std::string(name) + "'");
}

std::size_t argmax(std::span<const double> values) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (values[i] > values[best]) best = i;
    }
    return best;
}

std::size_t runner_up(std::span<const double> values) {
    if (values.size() < 2) return 0;
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t lhs, std::size_t rhs) { return values[lhs] > values[rhs]; });
    return order[1];
}

double ucb_bonus(double r, std::size_t n, std::size_t n_i, double rho) {
    if (rho == 0.0) return r;
    if (n_i <= 1) return kInf;
    const double log_n = std::log(static_cast<double>(std::max<std::size_t>(n, 1)));
    return r + rho * std::sqrt(2.0 * log_n / std::log(static_cast<double>(n_i)));
}

Decision choose_round_robin(const BanditView& view) {
    require_arms(view);
    std::vector<double> scores;
    for (const auto& a : view.arms) scores.push_back(static_cast<double>(a.pulls));
    return {view.total_pulls % view.arms.size(), Rationale::round_robin, std::move(scores)};
}

Decision choose_v1(const BanditView& view, double eps1, double eps2, Rng& rng) {
    require_arms(view);
    if (view.arms.size() == 1) return greedy(view);
    const double u = rng.uniform();
    if (u < 1.0 - (eps1 + eps2)) return greedy(view);
    if (u < 1.0 - eps2) {
        auto r = view.predicted();
        const auto arm = runner_up(r);
        return {arm, Rationale::runner_up, std::move(r)};
    }
    return uniform_random(view, rng);
}

Decision choose_v2(const BanditView& view, Rng& rng) {
    require_arms(view);
    if (view.arms.size() == 1) return greedy(view);
    const double eps = view.budget > 0.0 ? std::clamp(1.0 - view.elapsed() / view.budget, 0.0, 1.0) : 0.0;
    const double u = rng.uniform();
    if (u < eps) return uniform_random(view, rng);
    return greedy(view);
}

Decision choose_v3(const BanditView& view, double rho) {
    require_arms(view);
    std::vector<double> scores;
    scores.reserve(view.arms.size());
    for (const auto& a : view.arms) scores.push_back(ucb_bonus(a.predicted, view.total_pulls, a.pulls, rho));
    const auto arm = argmax(scores);
    // The bonus is credited only when it changed the outcome.
    const bool bonus_decided = rho != 0.0 && (std::isinf(scores[arm]) || arm != argmax(view.predicted()));
    return {arm, bonus_decided ? Rationale::ucb_bonus : Rationale::greedy, std::move(scores)};
}

Decision choose_ucb1(const BanditView& view) {
    require_arms(view);
    std::vector<double> scores;
    scores.reserve(view.arms.size());
    for (const auto& a : view.arms) {
        const double mean = a.rewards.empty()
                                ? 0.0
                                : std::accumulate(a.rewards.begin(), a.rewards.end(), 0.0) /
                                      static_cast<double>(a.rewards.size());
        scores.push_back(mean + exploration_term(view.total_pulls, a.pulls));
    }
    const auto arm = argmax(scores);
    return {arm, Rationale::ucb_bonus, std::move(scores)};
}

double best_k_value(std::span<const double> rewards, std::size_t k, BestKMode mode) {
    if (rewards.empty()) return 0.0;
    std::vector<double> sorted(rewards.begin(), rewards.end());
    const std::size_t take = std::min(k, sorted.size());
    std::partial_sort(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(take), sorted.end(),
                      std::greater<>());
    sorted.resize(take);
    if (mode == BestKMode::rewards) {
        return std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(take);
    }
    if (take < 2) return 0.0;
    std::reverse(sorted.begin(), sorted.end());
    double sum = 0.0;
    for (std::size_t i = 1; i < take; ++i) sum += sorted[i] - sorted[i - 1];
    return sum / static_cast<double>(take - 1);
}

Decision choose_best_k(const BanditView& view, std::size_t k, BestKMode mode) {
    require_arms(view);
    std::vector<double> scores;
    scores.reserve(view.arms.size());
    for (const auto& a : view.arms) {
        scores.push_back(best_k_value(a.rewards, k, mode) + exploration_term(view.total_pulls, a.pulls));
    }
    const auto arm = argmax(scores);
    return {arm, Rationale::ucb_bonus, std::move(scores)};
}

namespace {

class FunctionPolicy final : public Policy {
public:
    using Chooser = std::function<Decision(const BanditView&, Rng&)>;

    FunctionPolicy(std::string name, bool uses_curves, Chooser chooser)
        : name_(std::move(name)), uses_curves_(uses_curves), chooser_(std::move(chooser)) {}

    Decision choose(const BanditView& view, Rng& rng) override { return chooser_(view, rng); }
    bool uses_curves() const override { return uses_curves_; }
    std::string name() const override { return name_; }

private:
    std::string name_;
    bool uses_curves_;
    Chooser chooser_;
};

} // namespace

std::unique_ptr<Policy> make_policy(const PolicySpec& spec) {
    spec.validate();
    const auto name = spec.name();
    switch (spec.kind) {
    case PolicyKind::round_robin:
        return std::make_unique<FunctionPolicy>(name, false,
                                                [](const BanditView& v, Rng&) { return choose_round_robin(v); });
    case PolicyKind::ucb1:
        return std::make_unique<FunctionPolicy>(name, false, [](const BanditView& v, Rng&) { return choose_ucb1(v); });
    case PolicyKind::best_k_rewards:
        return std::make_unique<FunctionPolicy>(name, false, [k = spec.k](const BanditView& v, Rng&) {
            return choose_best_k(v, k, BestKMode::rewards);
        });
    case PolicyKind::best_k_velocity:
        return std::make_unique<FunctionPolicy>(name, false, [k = spec.k](const BanditView& v, Rng&) {
            return choose_best_k(v, k, BestKMode::velocity);
        });
    case PolicyKind::hamlet_v1:
        return std::make_unique<FunctionPolicy>(name, true, [e1 = spec.eps1, e2 = spec.eps2](const BanditView& v,
                                                                                             Rng& rng) {
            return choose_v1(v, e1, e2, rng);
        });
    case PolicyKind::hamlet_v2:
        return std::make_unique<FunctionPolicy>(name, true, [](const BanditView& v, Rng& rng) { return choose_v2(v, rng); });
    case PolicyKind::hamlet_v3:
        return std::make_unique<FunctionPolicy>(name, true,
                                                [rho = spec.rho](const BanditView& v, Rng&) { return choose_v3(v, rho); });
    }
    throw ConfigError("unsupported policy kind");
}

} // namespace hamlet
