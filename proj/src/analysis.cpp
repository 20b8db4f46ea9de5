#include "hamlet/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <set>
#include <tuple>

#include "hamlet/error.hpp"
#include "text_util.hpp"

namespace hamlet {

std::vector<double> RankTable::ranks_for(const std::string& policy) const {
    std::vector<double> out;
    for (const auto& e : entries) {
        if (e.policy == policy) out.push_back(e.rank);
    }
    return out;
}

std::vector<double> RankTable::ranks_for(const std::string& policy, double budget) const {
    std::vector<double> out;
    for (const auto& e : entries) {
        if (e.policy == policy && e.budget == budget) out.push_back(e.rank);
    }
    return out;
}

std::vector<double> average_ranks(std::span<const double> scores) {
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    std::vector<double> ranks(scores.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
        // positions i..j (0-based) hold ranks i+1..j+1
        const double shared = 0.5 * static_cast<double>(i + j + 2);
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = shared;
        i = j + 1;
    }
    return ranks;
}

RankTable rank_runs(std::span<const RunResult> results) {
    using CellKey = std::tuple<std::string, double, std::uint64_t>;
    std::map<CellKey, std::map<std::string, double>> cells;
    std::set<std::string> policies;
    std::set<double> budgets;
    for (const auto& r : results) {
        policies.insert(r.policy_name);
        budgets.insert(r.budget);
        auto& cell = cells[{r.dataset_id, r.budget, r.seed}];
        if (!cell.emplace(r.policy_name, r.best_accuracy).second) {
            throw DomainError("duplicate result for dataset " + r.dataset_id + ", budget " +
                              detail::format_double(r.budget) + ", seed " + std::to_string(r.seed) + ", policy " +
                              r.policy_name);
        }
    }

    RankTable table;
    table.policies.assign(policies.begin(), policies.end());
    table.budgets.assign(budgets.begin(), budgets.end());
    for (const auto& [key, cell] : cells) {
        const auto& [dataset, budget, seed] = key;
        for (const auto& p : table.policies) {
            if (!cell.contains(p)) {
                throw DomainError("incomplete group: missing dataset " + dataset + ", budget " +
                                  detail::format_double(budget) + ", seed " + std::to_string(seed) + ", policy " + p);
            }
        }
        std::vector<double> scores;
        for (const auto& [policy, accuracy] : cell) scores.push_back(accuracy);
        const auto ranks = average_ranks(scores);
        std::size_t i = 0;
        for (const auto& [policy, accuracy] : cell) {
            table.entries.push_back({policy, dataset, budget, seed, accuracy, ranks[i++]});
        }
    }
    return table;
}

std::vector<std::string> find_missing_cells(std::span<const RunResult> results) {
    std::set<std::string> policies;
    std::map<std::tuple<std::string, double, std::uint64_t>, std::set<std::string>> cells;
    for (const auto& r : results) {
        policies.insert(r.policy_name);
        cells[{r.dataset_id, r.budget, r.seed}].insert(r.policy_name);
    }
    std::vector<std::string> missing;
    for (const auto& [key, present] : cells) {
        const auto& [dataset, budget, seed] = key;
        for (const auto& p : policies) {
            if (!present.contains(p)) {
                missing.push_back("dataset " + dataset + ", budget " + detail::format_double(budget) + ", seed " +
                                  std::to_string(seed) + ", policy " + p);
            }
        }
    }
    return missing;
}

MeanRankCI mean_rank_ci(std::span<const double> ranks, std::string policy) {
    const std::size_t n = ranks.size();
    if (n < 2) {
        throw DomainError("mean rank CI for '" + policy + "' needs at least 2 runs, got " + std::to_string(n));
    }
    const double mean = std::accumulate(ranks.begin(), ranks.end(), 0.0) / static_cast<double>(n);
    double ss = 0.0;
    for (double r : ranks) ss += (r - mean) * (r - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    const double half = 1.96 * sd / std::sqrt(static_cast<double>(n));
    return {std::move(policy), n, mean, mean - half, mean + half};
}

MeanRankCI mean_rank_ci(const RankTable& table, const std::string& policy) {
    return mean_rank_ci(table.ranks_for(policy), policy);
}

std::vector<MeanRankCI> all_mean_rank_cis(const RankTable& table) {
    std::vector<MeanRankCI> out;
    for (const auto& p : table.policies) {
        const auto ranks = table.ranks_for(p);
        if (ranks.size() >= 2) out.push_back(mean_rank_ci(ranks, p));
    }
    std::stable_sort(out.begin(), out.end(), [](const MeanRankCI& a, const MeanRankCI& b) { return a.mean < b.mean; });
    return out;
}

double quantile(std::span<const double> sorted, double p) {
    if (sorted.empty()) return 0.0;
    const double pos = p * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

BoxStats box_stats(std::span<const double> values) {
    BoxStats s;
    if (values.empty()) return s;
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    s.q1 = quantile(sorted, 0.25);
    s.median = quantile(sorted, 0.5);
    s.q3 = quantile(sorted, 0.75);
    const double iqr = s.q3 - s.q1;
    const double lo_fence = s.q1 - 1.5 * iqr;
    const double hi_fence = s.q3 + 1.5 * iqr;
    s.whisker_low = s.q1;
    s.whisker_high = s.q3;
    for (double v : sorted) {
        if (v < lo_fence || v > hi_fence) {
            s.outliers.push_back(v);
            continue;
        }
        s.whisker_low = std::min(s.whisker_low, v);
        s.whisker_high = std::max(s.whisker_high, v);
    }
    return s;
}

namespace {

std::string join(std::span<const double> values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ';';
        out += detail::format_double(values[i]);
    }
    return out;
}

std::string fixed(double v, int digits = 3) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
    return buf;
}

} // namespace

std::string format_ranks_csv(const RankTable& table) {
    std::string out = "policy,dataset_id,budget_s,best_accuracy,rank,seed\n";
    for (const auto& e : table.entries) {
        out += e.policy + ',' + e.dataset_id + ',' + detail::format_double(e.budget) + ',' +
               detail::format_double(e.best_accuracy) + ',' + detail::format_double(e.rank) + ',' +
               std::to_string(e.seed) + '\n';
    }
    return out;
}

std::string format_boxplot_csv(const RankTable& table) {
    std::string out = "policy,budget_s,n,q1,median,q3,whisker_low,whisker_high,outliers,ranks\n";
    for (double budget : table.budgets) {
        for (const auto& p : table.policies) {
            const auto ranks = table.ranks_for(p, budget);
            if (ranks.empty()) continue;
            const auto s = box_stats(ranks);
            out += p + ',' + detail::format_double(budget) + ',' + std::to_string(ranks.size()) + ',' +
                   detail::format_double(s.q1) + ',' + detail::format_double(s.median) + ',' +
                   detail::format_double(s.q3) + ',' + detail::format_double(s.whisker_low) + ',' +
                   detail::format_double(s.whisker_high) + ',' + join(s.outliers) + ',' + join(ranks) + '\n';
        }
    }
    return out;
}

std::string format_cis_csv(std::span<const MeanRankCI> cis) {
    std::string out = "policy,n_runs,mean_rank,ci_low,ci_high\n";
    for (const auto& ci : cis) {
        out += ci.policy + ',' + std::to_string(ci.n_runs) + ',' + detail::format_double(ci.mean) + ',' +
               detail::format_double(ci.low) + ',' + detail::format_double(ci.high) + '\n';
    }
    return out;
}

std::string format_summary(const RankTable& table, std::span<const MeanRankCI> cis) {
    std::size_t width = 8;
    for (const auto& p : table.policies) width = std::max(width, p.size());
    auto pad = [&](const std::string& s) { return s + std::string(width + 2 - std::min(width + 2, s.size()), ' '); };

    std::string out = "Mean rank per budget (1 = best)\n\n";
    out += pad("policy");
    for (double b : table.budgets) {
        std::string head = detail::format_double(b) + "s";
        out += std::string(10 - std::min<std::size_t>(10, head.size()), ' ') + head;
    }
    out += '\n';
    for (const auto& p : table.policies) {
        out += pad(p);
        for (double b : table.budgets) {
            const auto ranks = table.ranks_for(p, b);
            const double mean =
                ranks.empty() ? 0.0 : std::accumulate(ranks.begin(), ranks.end(), 0.0) / static_cast<double>(ranks.size());
            const auto cell = fixed(mean, 2);
            out += std::string(10 - std::min<std::size_t>(10, cell.size()), ' ') + cell;
        }
        out += '\n';
    }
    out += "\nOverall mean rank with 95% confidence interval\n\n";
    out += pad("policy") + "    runs      mean       low      high\n";
    for (const auto& ci : cis) {
        auto col = [](const std::string& s) { return std::string(10 - std::min<std::size_t>(10, s.size()), ' ') + s; };
        out += pad(ci.policy) + col(std::to_string(ci.n_runs)).substr(2) + col(fixed(ci.mean)) + col(fixed(ci.low)) +
               col(fixed(ci.high)) + '\n';
    }
    return out;
}

void emit_report(const RankTable& table, std::span<const MeanRankCI> cis, const std::filesystem::path& out) {
    std::error_code ec;
    std::filesystem::create_directories(out, ec);
    if (ec) throw Error("cannot create report directory '" + out.string() + "': " + ec.message());
    detail::write_file((out / "ranks.csv").string(), format_ranks_csv(table));
    detail::write_file((out / "rank_boxplot.csv").string(), format_boxplot_csv(table));
    detail::write_file((out / "cis.csv").string(), format_cis_csv(cis));
    detail::write_file((out / "summary.txt").string(), format_summary(table, cis));
}

} // namespace hamlet
