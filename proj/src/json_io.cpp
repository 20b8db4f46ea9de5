#include "hamlet/json_io.hpp"

#include <cmath>
#include <limits>

#include "hamlet/error.hpp"

namespace hamlet {

using nlohmann::json;

void to_json(json& j, const SaturatingCurve& c) {
    j = json{{"asymptote", c.asymptote}, {"rate", c.rate}, {"delay", c.delay}};
}

void from_json(const json& j, SaturatingCurve& c) {
    c.asymptote = j.at("asymptote").get<double>();
    c.rate = j.at("rate").get<double>();
    c.delay = j.value("delay", 0.0);
}

void to_json(json& j, const SyntheticSpec& s) {
    j = json{{"dataset_id", s.dataset_id}, {"horizon", s.horizon}, {"arms", s.arms},
             {"mean_gap", s.mean_gap},     {"noise", s.noise},     {"seed", s.seed}};
}

void from_json(const json& j, SyntheticSpec& s) {
    s.dataset_id = j.value("dataset_id", std::string("synthetic"));
    s.horizon = j.at("horizon").get<double>();
    s.arms = j.at("arms").get<std::vector<SaturatingCurve>>();
    s.mean_gap = j.at("mean_gap").get<double>();
    s.noise = j.value("noise", 0.0);
    s.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("n_arms") && j.at("n_arms").get<std::size_t>() != s.arms.size()) {
        throw ConfigError("synthetic spec: n_arms does not match the number of arm curves");
    }
}

void to_json(json& j, const PolicySpec& p) {
    j = json{{"kind", std::string(to_string(p.kind))}, {"name", p.name()}};
    switch (p.kind) {
    case PolicyKind::hamlet_v1:
        j["eps1"] = p.eps1;
        j["eps2"] = p.eps2;
        break;
    case PolicyKind::hamlet_v3: j["rho"] = p.rho; break;
    case PolicyKind::best_k_rewards:
    case PolicyKind::best_k_velocity: j["k"] = p.k; break;
    default: break;
    }
}

void from_json(const json& j, PolicySpec& p) {
    if (j.is_string()) {
        p = policy_from_name(j.get<std::string>());
        return;
    }
    p = PolicySpec{};
    p.kind = policy_kind_from_string(j.at("kind").get<std::string>());
    p.eps1 = j.value("eps1", p.eps1);
    p.eps2 = j.value("eps2", p.eps2);
    p.rho = j.value("rho", p.rho);
    const auto k = j.value("k", static_cast<long long>(p.k));
    if (k < 1) throw ConfigError("policy: k must be >= 1");
    p.k = static_cast<std::size_t>(k);
}

void to_json(json& j, const OverheadModel& o) {
    j = json{{"mode", std::string(to_string(o.mode))}, {"seconds", o.seconds}};
}

void from_json(const json& j, OverheadModel& o) {
    if (j.is_string()) {
        o = OverheadModel{overhead_mode_from_string(j.get<std::string>()), 0.0};
        return;
    }
    o.mode = overhead_mode_from_string(j.at("mode").get<std::string>());
    o.seconds = j.value("seconds", 0.0);
}

void to_json(json& j, const FittedCurve& c) {
    if (c.fallback) {
        j = json{{"fallback", true}, {"level", c.level}, {"n_points", c.n_points}};
    } else {
        j = json{{"fallback", false}, {"a", c.params.a}, {"b", c.params.b},       {"c", c.params.c},
                 {"d", c.params.d},   {"residual", c.residual}, {"n_points", c.n_points}};
    }
}

namespace {

json score_array(const std::vector<double>& scores) {
    json out = json::array();
    for (double s : scores) {
        if (std::isfinite(s)) {
            out.push_back(s);
        } else {
            out.push_back(nullptr);
        }
    }
    return out;
}

} // namespace

json to_json(const RunResult& r, bool with_curves) {
    json allocations = json::object();
    json pulls = json::object();
    for (const auto& a : r.allocations) {
        allocations[a.arm_id] = a.seconds;
        pulls[a.arm_id] = a.pulls;
    }
    json arm_order = json::array();
    for (const auto& a : r.allocations) arm_order.push_back(a.arm_id);

    json decisions = json::array();
    for (const auto& d : r.decisions) {
        json entry{{"iteration", d.iteration},
                   {"arm", d.arm},
                   {"rationale", std::string(to_string(d.rationale))},
                   {"remaining", d.remaining},
                   {"scores", score_array(d.scores)}};
        if (with_curves && !d.curves.empty()) entry["curves"] = d.curves;
        decisions.push_back(std::move(entry));
    }
    return json{{"dataset_id", r.dataset_id},
                {"policy_name", r.policy_name},
                {"budget", r.budget},
                {"dt", r.dt},
                {"seed", r.seed},
                {"best_accuracy", r.best_accuracy},
                {"arms", arm_order},
                {"allocations", allocations},
                {"pulls", pulls},
                {"overhead", r.overhead},
                {"decisions", decisions}};
}

void to_json(json& j, const RunResult& r) { j = to_json(r, false); }

void from_json(const json& j, RunResult& r) {
    r = RunResult{};
    r.dataset_id = j.at("dataset_id").get<std::string>();
    r.policy_name = j.at("policy_name").get<std::string>();
    r.budget = j.at("budget").get<double>();
    r.dt = j.value("dt", 0.0);
    r.seed = j.at("seed").get<std::uint64_t>();
    r.best_accuracy = j.at("best_accuracy").get<double>();
    r.overhead = j.value("overhead", 0.0);
    const auto& alloc = j.at("allocations");
    std::vector<std::string> order;
    if (j.contains("arms")) {
        order = j.at("arms").get<std::vector<std::string>>();
    } else {
        for (const auto& [arm, _] : alloc.items()) order.push_back(arm);
    }
    for (const auto& arm : order) {
        ArmAllocation a{arm, alloc.at(arm).get<double>(), 0};
        if (j.contains("pulls")) a.pulls = j.at("pulls").at(arm).get<std::size_t>();
        r.allocations.push_back(a);
    }
    if (j.contains("decisions")) {
        for (const auto& d : j.at("decisions")) {
            DecisionRecord rec;
            rec.iteration = d.at("iteration").get<std::size_t>();
            rec.arm = d.at("arm").get<std::size_t>();
            rec.rationale = rationale_from_string(d.at("rationale").get<std::string>());
            rec.remaining = d.at("remaining").get<double>();
            for (const auto& s : d.at("scores")) {
                rec.scores.push_back(s.is_null() ? std::numeric_limits<double>::infinity() : s.get<double>());
            }
            r.decisions.push_back(std::move(rec));
        }
    }
}

} // namespace hamlet
