#include "dosesens/statistic.hpp"

#include <cmath>

namespace dosesens {

double outcome_rank(const MatchedDataset& dataset, double r) {
    double count = 0.0;
    for (const auto& s : dataset.sets)
        for (double rr : s.outcomes)
            if (r >= rr) count += 1.0;
    return count;
}

double dose_rank_global(const MatchedDataset& dataset, double z) {
    double count = 0.0;
    for (const auto& s : dataset.sets)
        for (double zz : s.doses)
            if (z >= zz) count += 1.0;
    return count;
}

namespace {

double custom_score(const std::map<double, double>& scores, double value, const char* which) {
    auto it = scores.find(value);
    if (it == scores.end())
        throw Error(ErrorCode::BadConfig,
                    std::string("no tabulated ") + which + " score for value " + std::to_string(value));
    return it->second;
}

}  // namespace

CompiledStatistic build_statistic(const StatisticSpec& spec, const MatchedDataset& dataset) {
    CompiledStatistic stat;
    stat.q1_sorted.resize(dataset.sets.size());
    stat.q2_units.resize(dataset.sets.size());

    for (std::size_t i = 0; i < dataset.sets.size(); ++i) {
        const MatchedSet& set = dataset.sets[i];
        std::vector<double> z = sorted_doses(set);
        auto& q1 = stat.q1_sorted[i];
        auto& q2 = stat.q2_units[i];
        q1.resize(z.size());
        q2.resize(set.outcomes.size());

        for (std::size_t k = 0; k < z.size(); ++k) {
            switch (spec.kind) {
                case StatisticKind::PermutationalT:
                case StatisticKind::Wilcoxon:
                    q1[k] = z[k];
                    break;
                case StatisticKind::DoubleRank:
                    if (spec.dose_rank_scope == RankScope::Global) {
                        q1[k] = dose_rank_global(dataset, z[k]);
                    } else {
                        double count = 0.0;
                        for (double zz : set.doses)
                            if (z[k] >= zz) count += 1.0;
                        q1[k] = count;
                    }
                    break;
                case StatisticKind::Custom:
                    q1[k] = custom_score(spec.custom_q1, z[k], "dose");
                    break;
                default:
                    throw Error(ErrorCode::UnknownKind, "unknown statistic kind");
            }
        }
        for (std::size_t j = 0; j < set.outcomes.size(); ++j) {
            double r = set.outcomes[j];
            switch (spec.kind) {
                case StatisticKind::PermutationalT:
                    q2[j] = r;
                    break;
                case StatisticKind::Wilcoxon:
                case StatisticKind::DoubleRank:
                    q2[j] = outcome_rank(dataset, r);
                    break;
                case StatisticKind::Custom:
                    q2[j] = custom_score(spec.custom_q2, r, "outcome");
                    break;
                default:
                    throw Error(ErrorCode::UnknownKind, "unknown statistic kind");
            }
        }
    }
    return stat;
}

SetTValues t_values(const MatchedDataset& dataset, int set_index, const CompiledStatistic& stat,
                    const PermutationTable& perms) {
    const auto& q1 = stat.q1_sorted[set_index];
    const auto& q2 = stat.q2_units[set_index];
    const int n = perms.n;

    SetTValues out;
    out.t.resize(perms.perms.size());
    for (std::size_t p = 0; p < perms.perms.size(); ++p) {
        const auto& pi = perms.perms[p];
        double t = 0.0;
        for (int j = 0; j < n; ++j) t += q1[pi[j]] * q2[j];
        out.t[p] = t;
    }

    std::vector<int> k = order_index(dataset.sets[set_index]);
    std::vector<int> observed(n);
    for (int j = 0; j < n; ++j) observed[j] = k[j] - 1;
    out.observed_index = 0;
    for (std::size_t p = 0; p < perms.perms.size(); ++p) {
        if (perms.perms[p] == observed) {
            out.observed_index = static_cast<int>(p);
            break;
        }
    }
    out.t_observed = out.t[out.observed_index];
    return out;
}

double observed_T(const MatchedDataset& dataset, const CompiledStatistic& stat) {
    double sum = 0.0;
    for (std::size_t i = 0; i < dataset.sets.size(); ++i) {
        const MatchedSet& set = dataset.sets[i];
        const auto& q1 = stat.q1_sorted[i];
        const auto& q2 = stat.q2_units[i];
        std::vector<int> k = order_index(set);
        double t = 0.0;
        for (int j = 0; j < set.size(); ++j) t += q1[k[j] - 1] * q2[j];
        sum += t;
    }
    return sum / static_cast<double>(dataset.num_sets());
}

}  // namespace dosesens
