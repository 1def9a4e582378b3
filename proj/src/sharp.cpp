#include "dosesens/sharp.hpp"

#include <cmath>

#include "dosesens/rng.hpp"
#include "dosesens/simplex.hpp"

namespace dosesens {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

std::vector<std::vector<double>> ratio_bounds(const std::vector<double>& sorted_doses,
                                              double gamma, const PermutationTable& perms) {
    const std::size_t P = perms.perms.size();
    const int n = perms.n;
    std::vector<std::vector<double>> bounds(P, std::vector<double>(P, 1.0));
    for (std::size_t p = 0; p < P; ++p) {
        for (std::size_t q = 0; q < P; ++q) {
            if (p == q) continue;
            double expo = 0.0;
            for (int j = 0; j < n; ++j) {
                double d = sorted_doses[perms.perms[p][j]] - sorted_doses[perms.perms[q][j]];
                if (d > 0.0) expo += d;
            }
            bounds[p][q] = std::exp(gamma * expo);
        }
    }
    return bounds;
}

double mu_star_from_t(const std::vector<double>& t, const std::vector<std::vector<double>>& bounds,
                      double lp_tol) {
    const std::size_t P = t.size();
    if (P == 1) return t[0];

    LinearProgram lp;
    lp.c = t;
    lp.A_eq.push_back(std::vector<double>(P, 1.0));
    lp.b_eq.push_back(1.0);
    lp.A_ub.reserve(P * (P - 1));
    for (std::size_t p = 0; p < P; ++p) {
        for (std::size_t q = 0; q < P; ++q) {
            if (p == q) continue;
            std::vector<double> row(P, 0.0);
            row[p] = 1.0;
            row[q] = -bounds[p][q];
            lp.A_ub.push_back(std::move(row));
            lp.b_ub.push_back(0.0);
        }
    }
    return simplex_solve(lp, lp_tol).value;
}

double mu_star(const MatchedDataset& dataset, int set_index, const CompiledStatistic& stat,
               double gamma, int cap, double lp_tol) {
    const MatchedSet& set = dataset.sets[set_index];
    PermutationTable perms = enumerate_assignments(set.size(), cap);
    SetTValues tv = t_values(dataset, set_index, stat, perms);
    auto bounds = ratio_bounds(sorted_doses(set), gamma, perms);
    return mu_star_from_t(tv.t, bounds, lp_tol);
}

SharpResult sharp_analysis(const MatchedDataset& dataset, const CompiledStatistic& stat,
                           const SharpOptions& options) {
    const int I = dataset.num_sets();
    if (I < 2) throw Error(ErrorCode::TooFewSets, "sharp analysis needs at least 2 matched sets");

    SharpResult res;
    res.gamma = options.gamma;
    res.t_observed.resize(I);
    res.mu_star.resize(I);

    std::vector<double> v(I);
    for (int i = 0; i < I; ++i) {
        const MatchedSet& set = dataset.sets[i];
        PermutationTable perms = enumerate_assignments(set.size(), options.cap);
        SetTValues tv = t_values(dataset, i, stat, perms);
        auto bounds = ratio_bounds(sorted_doses(set), options.gamma, perms);
        res.t_observed[i] = tv.t_observed;
        res.mu_star[i] = mu_star_from_t(tv.t, bounds, options.lp_tol);
        v[i] = tv.t_observed - res.mu_star[i];
    }

    double sum_t = 0.0, sum_v = 0.0;
    for (int i = 0; i < I; ++i) {
        sum_t += res.t_observed[i];
        sum_v += v[i];
    }
    res.T = sum_t / I;
    res.V_F = sum_v / I;

    Eigen::MatrixXd Q = build_design(dataset, options.q_design);
    std::vector<double> w = options.weights == VarianceWeights::SampleSize
                                ? default_weights(dataset)
                                : std::vector<double>(I, 1.0);
    res.S2 = variance_estimate(v, w, Q);
    res.S = std::sqrt(res.S2);
    if (res.S > 0.0) {
        res.p_bound = 1.0 - normal_cdf(res.V_F / res.S);
    } else {
        res.p_bound = res.V_F > 0.0 ? 0.0 : 1.0;
    }
    return res;
}

double exact_sharp_pvalue(const MatchedDataset& dataset, const CompiledStatistic& stat,
                          long draws, std::uint64_t seed, std::int64_t enumeration_limit) {
    const int I = dataset.num_sets();
    std::vector<SetTValues> tvs;
    std::vector<PermutationTable> tables;
    std::int64_t space = 1;
    bool enumerable = true;
    for (int i = 0; i < I; ++i) {
        PermutationTable perms = enumerate_assignments(dataset.sets[i].size(), kMaxEnumerationCap);
        tvs.push_back(t_values(dataset, i, stat, perms));
        tables.push_back(std::move(perms));
        if (enumerable) {
            space *= static_cast<std::int64_t>(tvs.back().t.size());
            if (space > enumeration_limit) enumerable = false;
        }
    }

    double observed = 0.0;
    for (const auto& tv : tvs) observed += tv.t_observed;
    const double eps = 1e-9 * (1.0 + std::abs(observed));

    if (enumerable) {
        // Distribution of sum_i T_i by successive cartesian sums.
        std::vector<double> sums{0.0};
        for (const auto& tv : tvs) {
            std::vector<double> next;
            next.reserve(sums.size() * tv.t.size());
            for (double s : sums)
                for (double t : tv.t) next.push_back(s + t);
            sums.swap(next);
        }
        std::int64_t count = 0;
        for (double s : sums)
            if (s >= observed - eps) ++count;
        return static_cast<double>(count) / static_cast<double>(sums.size());
    }

    long count = 0;
    for (long d = 0; d < draws; ++d) {
        auto rng = make_engine(seed, 0x6d63, static_cast<std::uint64_t>(d));
        double s = 0.0;
        for (int i = 0; i < I; ++i) {
            std::uniform_int_distribution<std::size_t> pick(0, tvs[i].t.size() - 1);
            s += tvs[i].t[pick(rng)];
        }
        if (s >= observed - eps) ++count;
    }
    return static_cast<double>(count + 1) / static_cast<double>(draws + 1);
}

}  // namespace dosesens
