#pragma once

#include <cstdint>
#include <vector>

#include "dosesens/statistic.hpp"
#include "dosesens/variance.hpp"

namespace dosesens {

enum class VarianceWeights { SampleSize, Unit };  // w_i = I n_i / N  vs  w_i = 1

/// Pairwise upper bounds U[p][q] on p_p / p_q over permutations of one set:
/// p_p <= U[p][q] * p_q for every ordered pair. At gamma = 0 all bounds are 1.
std::vector<std::vector<double>> ratio_bounds(const std::vector<double>& sorted_doses,
                                              double gamma, const PermutationTable& perms);

/// Optimal value of the per-set linear program: max sum_p p_p t_p over the
/// probability simplex intersected with the ratio bounds.
double mu_star_from_t(const std::vector<double>& t, const std::vector<std::vector<double>>& bounds,
                      double lp_tol = 1e-9);

double mu_star(const MatchedDataset& dataset, int set_index, const CompiledStatistic& stat,
               double gamma, int cap = kDefaultEnumerationCap, double lp_tol = 1e-9);

struct SharpOptions {
    double gamma = 0.0;  // sensitivity parameter on the log scale, >= 0
    QDesign q_design = QDesign::InterceptOnly;
    VarianceWeights weights = VarianceWeights::SampleSize;
    int cap = kDefaultEnumerationCap;
    double lp_tol = 1e-9;
};

struct SharpResult {
    double gamma = 0.0;
    double T = 0.0;           // observed statistic I^{-1} sum T_i
    double V_F = 0.0;         // I^{-1} sum (T_i - mu_i*)
    double S2 = 0.0;
    double S = 0.0;
    double p_bound = 1.0;
    std::vector<double> t_observed;  // per set
    std::vector<double> mu_star;     // per set
};

SharpResult sharp_analysis(const MatchedDataset& dataset, const CompiledStatistic& stat,
                           const SharpOptions& options);

/// Randomization p-value at Gamma = 1: exact enumeration when the assignment
/// space has at most `enumeration_limit` points, Monte Carlo otherwise (with
/// the add-one validity correction).
double exact_sharp_pvalue(const MatchedDataset& dataset, const CompiledStatistic& stat,
                          long draws, std::uint64_t seed,
                          std::int64_t enumeration_limit = 1000000);

/// Standard normal CDF.
double normal_cdf(double x);

}  // namespace dosesens
