// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hamlet/analysis.hpp"
#include "hamlet/experiment.hpp"
#include "hamlet/json_io.hpp"
#include "hamlet/learning_curve.hpp"
#include "hamlet/policies.hpp"
#include "hamlet/simulator.hpp"
#include "oracles.hpp"
#include "text_util.hpp"

using namespace hamlet;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Pinned tolerances and limits.
constexpr double envelope_time_limit_s = 5.0;
constexpr double fit_rms_tolerance = 1e-5;
constexpr double fit_grid_factor = 1.01;
constexpr double fit_time_limit_s = 60.0;
constexpr double bonus_tolerance = 1e-12;
constexpr double frequency_tolerance = 0.01;
constexpr double brute_force_time_limit_s = 1.0;
constexpr double ci_tolerance = 1e-3;
constexpr double study_share_threshold = 0.5;
constexpr double study_run_fraction = 0.7;
constexpr double study_time_limit_s = 300.0;

struct Outcome {
    bool pass = true;
    std::string detail;
};

class Checker {
public:
    void expect(bool ok, const std::string& what) {
        if (!ok && failures_.size() < 5) failures_.push_back(what);
        all_ &= ok;
    }
    Outcome finish(std::string summary) const {
        for (const auto& f : failures_) summary += "; " + f;
        return {all_, summary};
    }

private:
    bool all_ = true;
    std::vector<std::string> failures_;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v, int digits = 3) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
    return buf;
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("hamlet_acceptance_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

// Index of the first maximum, scanning left to right.
std::size_t first_max(const std::vector<double>& v) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (v[i] > v[best]) best = i;
    }
    return best;
}

BanditView random_view(Rng& rng) {
    BanditView v;
    const std::size_t n = 1 + rng.index(10);
    for (std::size_t i = 0; i < n; ++i) {
        ArmView a;
        a.predicted = static_cast<double>(rng.index(16)) / 16.0;  // coarse grid so ties are frequent
        a.pulls = 1 + rng.index(40);
        v.total_pulls += a.pulls;
        v.arms.push_back(a);
    }
    v.budget = 100.0 + rng.uniform() * 5000.0;
    v.dt = 10.0;
    v.remaining = rng.uniform() * v.budget;
    return v;
}

Outcome envelope_oracle() {
    Checker c;
    Rng rng(101);
    const auto t0 = std::chrono::steady_clock::now();
    std::size_t total_events = 0;
    for (int rep = 0; rep < 1000; ++rep) {
        const std::size_t len = rng.index(501);
        std::vector<TraceEvent> ev;
        double t = 0.0;
        for (std::size_t i = 0; i < len; ++i) {
            t += 0.01 + rng.uniform();
            ev.push_back({t, static_cast<double>(rng.index(200)) / 199.0});
        }
        total_events += len;
        c.expect(monotone_envelope(ev) == oracle::envelope(ev), "mismatch on sequence " + std::to_string(rep));
    }
    const double elapsed = seconds_since(t0);
    c.expect(elapsed < envelope_time_limit_s, "runtime " + fmt(elapsed) + " s");
    return c.finish("1000 sequences, " + std::to_string(total_events) + " events, " + fmt(elapsed) + " s");
}

// Parameter ranges: a in [0.05, 0.25], b in [0.002, 0.05] 1/s, c in [-100, 100] s,
// d in [0.35, 0.6]; 20 samples at x = 20, 40, ..., 400 s. All samples lie in [0, 1].
Outcome fit_recovery() {
    Checker c;
    Rng rng(202);
    const auto t0 = std::chrono::steady_clock::now();
    double worst_rms = 0.0;
    double worst_ratio = 0.0;
    for (int rep = 0; rep < 50; ++rep) {
        const CurveParams truth{0.05 + 0.2 * rng.uniform(), 0.002 + 0.048 * rng.uniform(), -100.0 + 200.0 * rng.uniform(),
                                0.35 + 0.25 * rng.uniform()};
        std::vector<EnvelopePoint> pts;
        for (int k = 1; k <= 20; ++k) {
            const double x = 20.0 * k;
            pts.push_back({x, truth(x)});
        }
        const auto fit = fit_arctan(pts);
        c.expect(!fit.fallback, "fallback on case " + std::to_string(rep));
        double sse = 0.0;
        for (const auto& p : pts) sse += std::pow(predict(fit, p.x) - p.y, 2);
        const double rms = std::sqrt(sse / static_cast<double>(pts.size()));
        worst_rms = std::max(worst_rms, rms);
        c.expect(rms <= fit_rms_tolerance, "case " + std::to_string(rep) + " rms " + std::to_string(rms));
        const auto grid = oracle::default_grid_fit(pts);
        c.expect(fit.residual <= fit_grid_factor * grid.rms,
                 "case " + std::to_string(rep) + " residual above grid oracle");
        if (grid.rms > 0.0) worst_ratio = std::max(worst_ratio, fit.residual / grid.rms);
    }
    const double elapsed = seconds_since(t0);
    c.expect(elapsed < fit_time_limit_s, "runtime " + fmt(elapsed) + " s");
    std::ostringstream s;
    s << "50 cases, worst rms " << worst_rms << ", worst residual/grid " << worst_ratio << ", " << fmt(elapsed) << " s";
    return c.finish(s.str());
}

Outcome bonus_checks() {
    Checker c;
    const double v = ucb_bonus(0.7, 100, 10, 0.05);
    c.expect(std::fabs(v - 0.8) <= bonus_tolerance, "ucb_bonus(0.7,100,10,0.05) = " + std::to_string(v));
    Rng rng(303);
    for (int i = 0; i < 100; ++i) {
        const double r = rng.uniform();
        const std::size_t n = 2 + rng.index(1000);
        const std::size_t ni = 2 + rng.index(n - 1);
        c.expect(ucb_bonus(r, n, ni, 0.0) == r, "rho = 0 identity");
    }
    for (std::size_t ni : {0u, 1u}) {
        c.expect(std::isinf(ucb_bonus(0.5, 50, ni, 0.05)), "n_i = " + std::to_string(ni) + " not forced");
        c.expect(ucb_bonus(0.5, 50, ni, 0.0) == 0.5, "rho = 0 not an identity at n_i = " + std::to_string(ni));
    }
    return c.finish("0.8 point check, 100 rho=0 identities, n_i in {0,1} forced for rho > 0");
}

Outcome policy_reductions() {
    Checker c;
    Rng gen(404);
    Rng rng(405);
    std::size_t agree = 0;
    for (int i = 0; i < 500; ++i) {
        auto v = random_view(gen);
        const auto expected = first_max(v.predicted());
        const auto a3 = choose_v3(v, 0.0).arm;
        const auto a1 = choose_v1(v, 0.0, 0.0, rng).arm;
        v.remaining = 0.0;
        const auto a2 = choose_v2(v, rng).arm;
        const bool ok = a3 == expected && a1 == expected && a2 == expected;
        agree += ok;
        c.expect(ok, "view " + std::to_string(i));
    }
    return c.finish(std::to_string(agree) + "/500 views agree");
}

Outcome branch_frequencies() {
    Checker c;
    BanditView v;
    for (double r : {0.3, 0.9, 0.5, 0.2, 0.6}) {
        ArmView a;
        a.predicted = r;
        a.pulls = 3;
        v.arms.push_back(a);
    }
    v.total_pulls = 15;
    v.budget = 1000.0;
    v.dt = 10.0;
    v.remaining = 500.0;
    const int n = 100000;
    Rng rng(505);
    std::map<Rationale, int> counts;
    for (int i = 0; i < n; ++i) ++counts[choose_v1(v, 0.1, 0.1, rng).rationale];
    const double g = counts[Rationale::greedy] / double(n);
    const double ru = counts[Rationale::runner_up] / double(n);
    const double rnd = counts[Rationale::random] / double(n);
    c.expect(std::fabs(g - 0.8) <= frequency_tolerance, "greedy " + fmt(g, 4));
    c.expect(std::fabs(ru - 0.1) <= frequency_tolerance, "runner-up " + fmt(ru, 4));
    c.expect(std::fabs(rnd - 0.1) <= frequency_tolerance, "random " + fmt(rnd, 4));

    v.remaining = v.budget / 2.0;
    int random = 0;
    for (int i = 0; i < n; ++i) random += choose_v2(v, rng).rationale == Rationale::random;
    const double f2 = random / double(n);
    c.expect(std::fabs(f2 - 0.5) <= frequency_tolerance, "V2 random " + fmt(f2, 4));
    return c.finish("V1 (" + fmt(g, 4) + ", " + fmt(ru, 4) + ", " + fmt(rnd, 4) + "), V2 random " + fmt(f2, 4));
}

class Scripted : public Policy {
public:
    explicit Scripted(std::vector<std::size_t> seq) : seq_(std::move(seq)) {}
    Decision choose(const BanditView& view, Rng&) override {
        Decision d;
        d.arm = seq_.at(next_++);
        d.scores.assign(view.arms.size(), 0.0);
        return d;
    }
    bool uses_curves() const override { return false; }
    std::string name() const override { return "Scripted"; }

private:
    std::vector<std::size_t> seq_;
    std::size_t next_ = 0;
};

// Final scores of every 2-arm continuation after the init pulls, by simulator and oracle.
struct Enumeration {
    std::vector<double> simulated;
    std::vector<double> oracle;
    std::vector<unsigned> masks;
};

Enumeration enumerate_two_arm(const std::vector<TuningTrace>& traces, double dt, int post_intervals) {
    Enumeration e;
    const double budget = dt * (2 + post_intervals);
    for (unsigned mask = 0; mask < (1u << post_intervals); ++mask) {
        std::vector<std::size_t> post;
        for (int j = 0; j < post_intervals; ++j) post.push_back((mask >> j) & 1u);
        Scripted policy(post);
        RunConfig rc{budget, dt, PolicySpec::round_robin(), {}, 0};
        const auto r = run(traces, rc, policy);
        std::vector<std::size_t> full = {0, 1};
        full.insert(full.end(), post.begin(), post.end());
        e.simulated.push_back(r.best_accuracy);
        e.oracle.push_back(oracle::replay_score(traces, dt, full));
        e.masks.push_back(mask);
    }
    return e;
}

Outcome brute_force_equivalence() {
    Checker c;
    SyntheticSpec s;
    s.dataset_id = "tiny";
    s.horizon = 120.0;
    s.mean_gap = 3.0;
    s.noise = 0.03;
    s.seed = 606;
    s.arms = {{0.8, 0.05, 0.0}, {0.9, 0.01, 5.0}};
    const auto traces = generate_traces(s);
    const auto t0 = std::chrono::steady_clock::now();
    const auto e = enumerate_two_arm(traces, 10.0, 6);
    const double elapsed = seconds_since(t0);
    std::size_t equal = 0;
    for (std::size_t i = 0; i < e.masks.size(); ++i) {
        const bool ok = e.simulated[i] == e.oracle[i];
        equal += ok;
        c.expect(ok, "sequence " + std::to_string(e.masks[i]));
    }
    c.expect(e.masks.size() == 64, "enumerated " + std::to_string(e.masks.size()));
    c.expect(elapsed < brute_force_time_limit_s, "runtime " + fmt(elapsed) + " s");
    return c.finish(std::to_string(equal) + "/64 sequences identical, " + fmt(elapsed, 4) + " s");
}

Outcome budget_conservation() {
    Checker c;
    Rng rng(707);
    const std::vector<PolicySpec> policies = {PolicySpec::round_robin(),     PolicySpec::ucb1(),
                                              PolicySpec::best_k_rewards(5),  PolicySpec::best_k_velocity(3),
                                              PolicySpec::hamlet_v1(0.1, 0.1), PolicySpec::hamlet_v2(),
                                              PolicySpec::hamlet_v3(0.05)};
    for (int rep = 0; rep < 200; ++rep) {
        SyntheticSpec s;
        s.horizon = 800.0;
        s.mean_gap = 4.0 + rng.uniform() * 10.0;
        s.noise = 0.03;
        s.seed = static_cast<std::uint64_t>(rep);
        const std::size_t n_arms = 1 + rng.index(5);
        for (std::size_t i = 0; i < n_arms; ++i) {
            s.arms.push_back({0.5 + 0.4 * rng.uniform(), 0.002 + 0.05 * rng.uniform(), 20.0 * rng.uniform()});
        }
        const auto traces = generate_traces(s);
        RunConfig rc;
        rc.dt = 2.0 + rng.uniform() * 18.0;
        rc.budget = rc.dt * n_arms + rng.uniform() * 700.0;
        rc.policy = policies[rep % policies.size()];
        rc.seed = static_cast<std::uint64_t>(rep);
        if (rep % 3 == 1) rc.overhead = {OverheadMode::fixed, rng.uniform() * 0.95 * rc.dt};
        const auto r = run(traces, rc);
        const double spent = r.allocated() + r.overhead;
        c.expect(spent > rc.budget - rc.dt && spent <= rc.budget + rc.dt,
                 "config " + std::to_string(rep) + " spent " + std::to_string(spent) + " of " + std::to_string(rc.budget));
    }
    // Round Robin with B = m * I * dt.
    for (std::size_t arms : {1u, 2u, 3u, 5u, 8u}) {
        for (std::size_t m : {1u, 4u, 13u}) {
            SyntheticSpec s;
            s.horizon = 500.0;
            s.mean_gap = 5.0;
            s.seed = arms * 100 + m;
            for (std::size_t i = 0; i < arms; ++i) s.arms.push_back({0.7, 0.02, 0.0});
            const double dt = 7.5;
            const auto r = run(generate_traces(s), RunConfig{static_cast<double>(m * arms) * dt, dt, PolicySpec::round_robin(), {}, 0});
            for (const auto& a : r.allocations) {
                c.expect(a.seconds == static_cast<double>(m) * dt,
                         "round robin I=" + std::to_string(arms) + " m=" + std::to_string(m));
            }
        }
    }
    return c.finish("200 random configs within (B - dt, B + dt], Round Robin exact over 15 (I, m) pairs");
}

std::map<std::string, std::string> read_tree(const fs::path& root) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = detail::read_file(e.path().string());
    }
    return out;
}

json small_study_config() {
    json arms = json::array({{{"asymptote", 0.8}, {"rate", 0.03}},
                             {{"asymptote", 0.9}, {"rate", 0.006}, {"delay", 10}},
                             {{"asymptote", 0.7}, {"rate", 0.08}}});
    json synthetic = json::array();
    for (int d = 0; d < 3; ++d) {
        synthetic.push_back({{"dataset_id", "ds" + std::to_string(d)},
                             {"horizon", 900},
                             {"mean_gap", 4},
                             {"noise", 0.03},
                             {"seed", 50 + d},
                             {"arms", arms}});
    }
    return {{"traces", {{"synthetic", synthetic}}},
            {"budgets", {300, 600}},
            {"dt", 10},
            {"policies", {"RoundRobin", "UCB", "BestKReward-5", "BestKVelocity-5", "MasterLC-0.1-0.1", "MasterLCDecay",
                          "MasterLC-UCB-0.05"}},
            {"overhead", {{"mode", "fixed"}, {"seconds", 0.5}}},
            {"seeds", {0, 1}},
            {"log_curves", true}};
}

Outcome determinism() {
    Checker c;
    const auto dir = scratch("determinism");
    auto doc = small_study_config();
    detail::write_file((dir / "config.json").string(), doc.dump(2));
    std::ostringstream log;
    std::vector<std::map<std::string, std::string>> runs, reports;
    for (unsigned workers : {1u, 3u}) {
        RunOverrides o;
        o.workers = workers;
        o.output = dir / ("out" + std::to_string(workers));
        c.expect(cmd_run(dir / "config.json", o, log) == exit_code::ok, "run failed: " + log.str());
        runs.push_back(read_tree(*o.output / "runs"));
        const auto report = dir / ("report" + std::to_string(workers));
        c.expect(cmd_analyze(*o.output, report, log) == exit_code::ok, "analyze failed: " + log.str());
        reports.push_back(read_tree(report));
    }
    c.expect(runs[0].size() == 3u * 2u * 7u * 2u, "run count " + std::to_string(runs[0].size()));
    c.expect(runs[0] == runs[1], "serialized RunResults differ");
    c.expect(reports[0] == reports[1], "analysis CSVs differ");
    // Direct re-execution of one stochastic cell.
    RunConfig rc{600.0, 10.0, PolicySpec::hamlet_v1(0.1, 0.1), {OverheadMode::fixed, 0.5}, 9};
    TraceSource src;
    src.synthetic.push_back(doc["traces"]["synthetic"][0].get<SyntheticSpec>());
    const auto traces = materialize_traces(src);
    const auto& group = traces.begin()->second;
    c.expect(to_json(run(group, rc), true).dump() == to_json(run(group, rc), true).dump(), "direct rerun differs");
    fs::remove_all(dir);
    return c.finish(std::to_string(runs[0].size()) + " run files and " + std::to_string(reports[0].size()) +
                    " report files byte-identical across two executions");
}

Outcome rank_ci() {
    Checker c;
    Rng rng(909);
    std::size_t cells = 0;
    for (int rep = 0; rep < 200; ++rep) {
        const std::size_t n_policies = 2 + rng.index(9);
        const std::size_t n_datasets = 1 + rng.index(4);
        std::vector<RunResult> results;
        for (std::size_t d = 0; d < n_datasets; ++d) {
            for (double b : {100.0, 200.0}) {
                for (std::size_t p = 0; p < n_policies; ++p) {
                    RunResult r;
                    r.dataset_id = "d" + std::to_string(d);
                    r.policy_name = "p" + std::to_string(p);
                    r.budget = b;
                    r.best_accuracy = static_cast<double>(rng.index(6)) / 5.0;
                    results.push_back(r);
                }
            }
        }
        const auto table = rank_runs(results);
        std::map<std::tuple<std::string, double, std::uint64_t>, double> sums;
        for (const auto& e : table.entries) sums[{e.dataset_id, e.budget, e.seed}] += e.rank;
        const double expected = n_policies * (n_policies + 1) / 2.0;
        for (const auto& [key, sum] : sums) c.expect(std::fabs(sum - expected) < 1e-9, "rank sum " + std::to_string(sum));
        cells += sums.size();
    }
    std::vector<double> ranks;
    for (int i = 0; i < 50; ++i) {
        ranks.push_back(1.0);
        ranks.push_back(3.0);
    }
    const auto ci = mean_rank_ci(ranks, "fixture");
    c.expect(std::fabs(ci.low - 1.803) <= ci_tolerance, "low " + fmt(ci.low, 4));
    c.expect(std::fabs(ci.high - 2.197) <= ci_tolerance, "high " + fmt(ci.high, 4));
    return c.finish(std::to_string(cells) + " random cells sum to P(P+1)/2, {1,3}x50 CI [" + fmt(ci.low, 4) + ", " +
                    fmt(ci.high, 4) + "]");
}

// Crossing family: a near-instant plateau arm, a slower arm with the highest
// asymptote, and a mediocre arm. Budgets 150-300 s, dt 15 s.
struct StudyFamily {
    static constexpr double horizon = 300.0;
    static constexpr double dt = 15.0;
    static constexpr std::size_t best_arm = 1;
    static inline const std::vector<double> budgets = {150, 180, 210, 250, 300};

    static SyntheticSpec dataset(int d) {
        Rng rng(mix_seed(777, static_cast<std::uint64_t>(d)));
        SyntheticSpec s;
        s.dataset_id = "study" + std::to_string(d);
        s.horizon = horizon;
        s.mean_gap = 1.0;
        s.noise = 0.01;
        s.seed = 1000 + static_cast<std::uint64_t>(d);
        s.arms = {{0.76 + 0.04 * rng.uniform(), 0.5 + 0.5 * rng.uniform(), 0.0},
                  {0.92 + 0.04 * rng.uniform(), 0.018 + 0.007 * rng.uniform(), 0.0},
                  {0.60 + 0.10 * rng.uniform(), 0.05 + 0.10 * rng.uniform(), 0.0}};
        return s;
    }
};

double truth(const SaturatingCurve& c, double t) { return c(t); }

Outcome desk_study() {
    Checker c;
    const auto t0 = std::chrono::steady_clock::now();
    const double early = 0.2 * StudyFamily::budgets.back();

    // Family properties on the ground truth, then on downscaled replays.
    std::size_t downscaled_ok = 0;
    for (int d = 0; d < 20; ++d) {
        const auto spec = StudyFamily::dataset(d);
        const auto& best = spec.arms[StudyFamily::best_arm];
        for (std::size_t i = 0; i < spec.arms.size(); ++i) {
            if (i == StudyFamily::best_arm) continue;
            c.expect(truth(best, StudyFamily::horizon) > truth(spec.arms[i], StudyFamily::horizon),
                     spec.dataset_id + " best arm not dominant at the horizon");
        }
        bool inferior = true;
        for (double t = 0.5; t <= early; t += 0.5) inferior &= truth(best, t) < truth(spec.arms[0], t);
        c.expect(inferior, spec.dataset_id + " best arm not inferior early");

        // Two arms (plateau, best), 8 intervals covering the horizon: the best
        // final score over all 64 continuations needs the majority on the best arm.
        auto traces = generate_traces(spec);
        const std::vector<TuningTrace> pair = {traces[0], traces[StudyFamily::best_arm]};
        const auto e = enumerate_two_arm(pair, StudyFamily::horizon / 8.0, 6);
        double best_majority = 0.0, best_minority = 0.0;
        bool agree = true;
        for (std::size_t k = 0; k < e.masks.size(); ++k) {
            agree &= e.simulated[k] == e.oracle[k];
            const int on_best = __builtin_popcount(e.masks[k]);
            (on_best >= 3 ? best_majority : best_minority) =
                std::max(on_best >= 3 ? best_majority : best_minority, e.oracle[k]);
        }
        c.expect(agree, spec.dataset_id + " downscaled replay disagrees with oracle");
        const bool majority_wins = best_majority > best_minority;
        downscaled_ok += majority_wins;
        c.expect(majority_wins, spec.dataset_id + " downscaled optimum does not favour the best arm");
    }

    const std::vector<PolicySpec> policies = {PolicySpec::round_robin(),      PolicySpec::ucb1(),
                                              PolicySpec::best_k_rewards(7),  PolicySpec::best_k_velocity(7),
                                              PolicySpec::hamlet_v1(0.1, 0.1), PolicySpec::hamlet_v2(),
                                              PolicySpec::hamlet_v3(0.05)};
    const std::string v3 = PolicySpec::hamlet_v3(0.05).name();
    const std::string rr = PolicySpec::round_robin().name();
    std::vector<RunResult> results;
    std::size_t v3_runs = 0, v3_concentrated = 0;
    for (int d = 0; d < 20; ++d) {
        const auto traces = generate_traces(StudyFamily::dataset(d));
        for (double b : StudyFamily::budgets) {
            for (const auto& p : policies) {
                auto r = run(traces, RunConfig{b, StudyFamily::dt, p, {}, 0});
                if (r.policy_name == v3) {
                    const double post_init = b - StudyFamily::dt * static_cast<double>(traces.size());
                    const double share = (r.allocations[StudyFamily::best_arm].seconds - StudyFamily::dt) / post_init;
                    ++v3_runs;
                    v3_concentrated += share >= study_share_threshold;
                }
                r.decisions.clear();
                results.push_back(std::move(r));
            }
        }
    }
    const auto table = rank_runs(results);
    const auto ci_v3 = mean_rank_ci(table, v3);
    const auto ci_rr = mean_rank_ci(table, rr);
    const double fraction = static_cast<double>(v3_concentrated) / static_cast<double>(v3_runs);
    c.expect(fraction >= study_run_fraction, "V3 concentrated in " + fmt(fraction) + " of runs");
    c.expect(ci_v3.mean <= ci_rr.mean, "V3 mean rank above Round Robin");
    c.expect(!ci_v3.overlaps(ci_rr), "confidence intervals overlap");
    const double elapsed = seconds_since(t0);
    c.expect(elapsed < study_time_limit_s, "runtime " + fmt(elapsed) + " s");
    return c.finish("downscaled optimum favours best arm in " + std::to_string(downscaled_ok) + "/20; V3 >= 50% in " +
                    std::to_string(v3_concentrated) + "/" + std::to_string(v3_runs) + " runs; mean rank V3 " +
                    fmt(ci_v3.mean) + " [" + fmt(ci_v3.low) + ", " + fmt(ci_v3.high) + "] vs RR " + fmt(ci_rr.mean) +
                    " [" + fmt(ci_rr.low) + ", " + fmt(ci_rr.high) + "]; " + fmt(elapsed, 1) + " s");
}

Outcome grid_fidelity() {
    Checker c;
    const auto grid = GridSpec::table2();
    c.expect(grid.eps1 == std::vector<double>{0.01, 0.05, 0.10, 0.20, 0.40, 0.60}, "eps1 grid");
    c.expect(grid.eps2 == std::vector<double>{0.00, 0.01, 0.05, 0.10, 0.20, 0.40}, "eps2 grid");
    c.expect(grid.rho == std::vector<double>{0.00, 0.05, 0.10, 0.25, 0.50, 0.75, 1.00}, "rho grid");
    const std::vector<std::size_t> k = {3, 5, 7, 10, 20, 50, 100};
    c.expect(grid.best_k_rewards == k && grid.best_k_velocity == k, "K grid");
    c.expect(table2::budgets_experiment1 == std::vector<double>{150, 300, 450, 600, 900, 1800, 3600}, "budgets");

    const auto dir = scratch("grid");
    json doc = {{"traces",
                 {{"synthetic",
                   {{"dataset_id", "grid"},
                    {"horizon", 4000},
                    {"mean_gap", 40},
                    {"noise", 0.02},
                    {"seed", 11},
                    {"arms", json::array({{{"asymptote", 0.8}, {"rate", 0.01}}, {{"asymptote", 0.85}, {"rate", 0.002}}})}}}}},
                {"budgets", "experiment1"},
                {"dt", 10},
                {"policies", {"RoundRobin", "UCB", "MasterLCDecay"}},
                {"grid", "table2"},
                {"seeds", {0}},
                {"workers", 4},
                {"output", "out"}};
    detail::write_file((dir / "sweep.json").string(), doc.dump(2));
    std::ostringstream log;
    const int code = cmd_sweep(dir / "sweep.json", {}, log);
    c.expect(code == exit_code::ok, "sweep exit " + std::to_string(code) + ": " + log.str());
    std::set<double> eps1, eps2, rho;
    std::set<std::size_t> kr, kv;
    std::size_t cells = 0;
    if (code == exit_code::ok) {
        const auto manifest = json::parse(detail::read_file((dir / "out" / "manifest.json").string()));
        cells = manifest.at("cells").size();
        std::set<std::string> names;
        for (const auto& cell : manifest.at("cells")) names.insert(cell.at("policy").get<std::string>());
        for (const auto& n : names) {
            const auto p = policy_from_name(n);
            if (p.kind == PolicyKind::hamlet_v1) {
                eps1.insert(p.eps1);
                eps2.insert(p.eps2);
            }
            if (p.kind == PolicyKind::hamlet_v3) rho.insert(p.rho);
            if (p.kind == PolicyKind::best_k_rewards) kr.insert(p.k);
            if (p.kind == PolicyKind::best_k_velocity) kv.insert(p.k);
        }
        const std::size_t n_policies = 6 * 6 + 7 + 7 + 7 + 3;
        c.expect(names.size() == n_policies, "distinct policies " + std::to_string(names.size()));
        c.expect(cells == n_policies * 7 * 1 * 1, "manifest cells " + std::to_string(cells));
        c.expect(eps1.size() == 6 && eps2.size() == 6 && rho.size() == 7 && kr.size() == 7 && kv.size() == 7,
                 "grid values in manifest");
    }
    fs::remove_all(dir);
    return c.finish("6 x 6 eps, 7 rho, 7 K per BestK mode, 7 budgets; manifest " + std::to_string(cells) +
                    " cells = 60 policies x 7 budgets x 1 dataset x 1 seed");
}

} // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"envelope oracle", envelope_oracle},
        {"fit recovery", fit_recovery},
        {"exploration bonus point checks", bonus_checks},
        {"policy reductions", policy_reductions},
        {"stochastic branch frequencies", branch_frequencies},
        {"simulator brute-force equivalence", brute_force_equivalence},
        {"budget conservation", budget_conservation},
        {"determinism", determinism},
        {"rank and CI correctness", rank_ci},
        {"desk-scale synthetic study", desk_study},
        {"grid fidelity", grid_fidelity},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += !o.pass;
        std::printf("[%s] %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
