#pragma once

#include <map>
#include <vector>

#include "dosesens/dataset.hpp"

namespace dosesens {

enum class StatisticKind { PermutationalT, Wilcoxon, DoubleRank, Custom };
enum class RankScope { Global, WithinSet };

/// A class of test statistics T = I^{-1} sum_i T_i with
/// T_i = sum_j q1(Z_ij) q2(R_ij) for prespecified score functions.
struct StatisticSpec {
    StatisticKind kind = StatisticKind::PermutationalT;
    RankScope dose_rank_scope = RankScope::Global;
    // Tabulated score maps for kind == Custom (value -> score).
    std::map<double, double> custom_q1;
    std::map<double, double> custom_q2;
};

/// Count-based outcome rank: number of outcomes <= r across the whole
/// dataset (tied outcomes share the maximal count).
double outcome_rank(const MatchedDataset& dataset, double r);

/// Dose-rank analog of outcome_rank over all doses in the dataset.
double dose_rank_global(const MatchedDataset& dataset, double z);

/// Score functions evaluated once over the full dataset. q1_sorted[i][k] is
/// the dose score of the k-th order statistic in set i; q2_units[i][j] is the
/// outcome score of unit j.
struct CompiledStatistic {
    std::vector<std::vector<double>> q1_sorted;
    std::vector<std::vector<double>> q2_units;
};

CompiledStatistic build_statistic(const StatisticSpec& spec, const MatchedDataset& dataset);

/// Per-permutation values t_{i,pi} for one matched set, aligned with the
/// lexicographic PermutationTable order, plus the observed value.
struct SetTValues {
    std::vector<double> t;
    double t_observed = 0.0;
    int observed_index = 0;
};

SetTValues t_values(const MatchedDataset& dataset, int set_index, const CompiledStatistic& stat,
                    const PermutationTable& perms);

/// T = I^{-1} sum_i T_i at the observed assignment.
double observed_T(const MatchedDataset& dataset, const CompiledStatistic& stat);

}  // namespace dosesens
