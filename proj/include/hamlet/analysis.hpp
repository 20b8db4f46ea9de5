#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "hamlet/simulator.hpp"

namespace hamlet {

// One policy's placement within a (dataset, budget, seed) comparison cell.
struct RankEntry {
    std::string policy;
    std::string dataset_id;
    double budget = 0.0;
    std::uint64_t seed = 0;
    double best_accuracy = 0.0;
    double rank = 0.0;  // 1 is best; ties share the average rank they span
};

struct RankTable {
    std::vector<std::string> policies;  // sorted
    std::vector<double> budgets;        // sorted ascending
    std::vector<RankEntry> entries;     // sorted by (dataset, budget, seed, policy)

    std::vector<double> ranks_for(const std::string& policy) const;
    std::vector<double> ranks_for(const std::string& policy, double budget) const;
};

struct MeanRankCI {
    std::string policy;
    std::size_t n_runs = 0;
    double mean = 0.0;
    double low = 0.0;
    double high = 0.0;

    bool overlaps(const MeanRankCI& other) const { return low <= other.high && other.low <= high; }
};

// Five-number summary for boxplots: linear-interpolated quartiles, whiskers at
// the most extreme samples within 1.5 IQR of the box, everything else an outlier.
struct BoxStats {
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
    double whisker_low = 0.0;
    double whisker_high = 0.0;
    std::vector<double> outliers;
};

// Average ranks with exact-equality ties, descending order (higher is better).
std::vector<double> average_ranks(std::span<const double> scores);

// Groups results by (dataset, budget, seed) and ranks policies inside each cell.
// Throws DomainError naming the first missing or duplicated (dataset, budget, seed, policy).
RankTable rank_runs(std::span<const RunResult> results);

// Every (dataset, budget, seed, policy) combination absent from the results,
// formatted for diagnostics. Empty when rank_runs would succeed.
std::vector<std::string> find_missing_cells(std::span<const RunResult> results);

// mean +- 1.96 s / sqrt(n), s the sample standard deviation. Throws DomainError for n < 2.
MeanRankCI mean_rank_ci(std::span<const double> ranks, std::string policy = {});
MeanRankCI mean_rank_ci(const RankTable& table, const std::string& policy);
std::vector<MeanRankCI> all_mean_rank_cis(const RankTable& table);

// Linear interpolation between order statistics (position p * (n - 1)).
double quantile(std::span<const double> sorted, double p);
BoxStats box_stats(std::span<const double> values);

// Writes ranks.csv, rank_boxplot.csv, cis.csv and summary.txt into `out`.
void emit_report(const RankTable& table, std::span<const MeanRankCI> cis, const std::filesystem::path& out);

std::string format_ranks_csv(const RankTable& table);
std::string format_boxplot_csv(const RankTable& table);
std::string format_cis_csv(std::span<const MeanRankCI> cis);
std::string format_summary(const RankTable& table, std::span<const MeanRankCI> cis);

} // namespace hamlet
