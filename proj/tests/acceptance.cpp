// Acceptance suite: each criterion prints a single pass/fail line and the
// process exit code reports the verdict. Usage: acceptance <1..10 | all>.
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "dosesens/perm_model.hpp"
#include "dosesens/sharp.hpp"
#include "dosesens/sim.hpp"
#include "dosesens/statistic.hpp"
#include "dosesens/variance.hpp"
#include "dosesens/weak.hpp"

using namespace dosesens;

namespace {

struct Verdict {
    bool pass;
    std::string detail;
};

MatchedDataset random_dataset(std::mt19937_64& rng, int num_sets, int min_n, int max_n,
                              int covariate_dim = 0) {
    std::uniform_int_distribution<int> size_dist(min_n, max_n);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> norm(0.0, 1.0);
    MatchedDataset ds;
    ds.covariate_dim = covariate_dim;
    for (int i = 0; i < num_sets; ++i) {
        MatchedSet set;
        set.set_id = std::to_string(i);
        int n = size_dist(rng);
        for (int j = 0; j < n; ++j) {
            set.doses.push_back(unif(rng));
            set.outcomes.push_back(norm(rng));
            if (covariate_dim > 0) {
                std::vector<double> x(covariate_dim);
                for (double& v : x) v = norm(rng);
                set.covariates.push_back(std::move(x));
            }
        }
        ds.sets.push_back(std::move(set));
    }
    return ds;
}

// ---- 1. sharp-null size ----------------------------------------------------

Verdict criterion1() {
    SimConfig cfg;
    cfg.protocol = SimProtocol::Sharp;
    cfg.num_sets = 400;
    cfg.reps = 500;
    cfg.seed = 20260823;
    cfg.gamma = std::log(1.8);
    cfg.alpha = 0.1;
    cfg.dose_law = parse_dist("unif");
    cfg.outcome_law = parse_dist("normal(0,1)");
    cfg.statistic.kind = StatisticKind::DoubleRank;
    SimReport rep = run_sim(cfg);
    double rate = rep.methods[0].rejection_rate;
    char buf[160];
    std::snprintf(buf, sizeof buf, "sharp worst-case rejection rate %.3f (target 0.100 +- 0.045)",
                  rate);
    return {std::abs(rate - 0.10) <= 0.045, buf};
}

// ---- 2/3. weak-null size and conservativeness -------------------------------

SimReport weak_run(const std::string& dose_law, double Gamma, std::uint64_t seed) {
    SimConfig cfg;
    cfg.protocol = SimProtocol::Weak;
    cfg.num_sets = 250;
    cfg.reps = 500;
    cfg.seed = seed;
    cfg.gamma = std::log(Gamma);
    cfg.alpha = 0.1;
    cfg.size_poisson_rate = 1.0;
    cfg.max_set_size = 5;
    cfg.dose_law = parse_dist(dose_law);
    cfg.effect_law = parse_dist("normal(0,1)");
    cfg.noise_min_dose_law = parse_dist("normal(0,5)");
    cfg.noise_law = parse_dist("normal(0,1)");
    cfg.b_sign = 1.0;
    cfg.threshold = 0.5;
    return run_sim(cfg);
}

Verdict criterion2() {
    SimReport rep = weak_run("beta(2,5)", 1.0, 41);
    double vc = rep.methods[0].rejection_rate;
    double vn = rep.methods[1].rejection_rate;
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "weak-null size at Gamma=1: vc %.3f, vn %.3f (target 0.100 +- 0.045)", vc, vn);
    return {std::abs(vc - 0.10) <= 0.045 && std::abs(vn - 0.10) <= 0.045, buf};
}

Verdict criterion3() {
    const char* laws[] = {"beta(2,5)", "beta(2,2)", "unif"};
    int vc_wins = 0;
    bool level_ok = true;
    std::string detail;
    for (double Gamma : {1.4, 1.8}) {
        for (int l = 0; l < 3; ++l) {
            SimReport rep = weak_run(laws[l], Gamma, 1000 + l);
            double vc = rep.methods[0].rejection_rate;
            double vn = rep.methods[1].rejection_rate;
            double se_vc = rep.methods[0].rejection_se;
            double se_vn = rep.methods[1].rejection_se;
            if (vc > 0.10 + 2.0 * std::max(se_vc, 1e-3) ||
                vn > 0.10 + 2.0 * std::max(se_vn, 1e-3))
                level_ok = false;
            if (vc >= vn) ++vc_wins;
            char buf[96];
            std::snprintf(buf, sizeof buf, " [%s G=%.1f vc=%.3f vn=%.3f]", laws[l], Gamma, vc, vn);
            detail += buf;
        }
    }
    char head[96];
    std::snprintf(head, sizeof head, "conservativeness: level_ok=%d, vc>=vn in %d/6;", level_ok,
                  vc_wins);
    return {level_ok && vc_wins >= 5, head + detail};
}

// ---- 4. Proposition 1 unbiasedness oracle -----------------------------------

Verdict criterion4() {
    std::mt19937_64 rng(404);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> norm(0.0, 1.0);
    double worst = 0.0;
    for (int d = 0; d < 50; ++d) {
        // Random dataset with prod n_i! <= 1e4 (sizes 2..4 over few sets).
        std::uniform_int_distribution<int> nsets(2, 4);
        int I = nsets(rng);
        for (int kind = 0; kind < 5; ++kind) {
            double theta = 0.0, mean_vn = 0.0, total_units = 0.0;
            std::vector<double> thetas, means, sizes;
            for (int i = 0; i < I; ++i) {
                int n = 2 + static_cast<int>(unif(rng) * 3);
                std::vector<double> z(n);
                z[0] = 0.25 * unif(rng);
                z[n - 1] = 0.75 + 0.25 * unif(rng);
                for (int k = 1; k + 1 < n; ++k) z[k] = unif(rng);
                std::sort(z.begin(), z.end());
                EstimandParams params;
                switch (kind) {
                    case 0: {  // sate on binary doses
                        params.kind = EstimandKind::Sate;
                        for (int k = 0; k < n; ++k) z[k] = k < n / 2 ? 0.0 : 1.0;
                        break;
                    }
                    case 1: {  // effect ratio on pairs
                        params.kind = EstimandKind::EffectRatio;
                        params.lambda0 = norm(rng);
                        z.resize(2);
                        z = {0.2 + 0.3 * unif(rng), 0.6 + 0.3 * unif(rng)};
                        n = 2;
                        break;
                    }
                    case 2:
                        params.kind = EstimandKind::Tsate;
                        params.threshold = 0.5;
                        break;
                    case 3:
                        params.kind = EstimandKind::AvgSlope;
                        break;
                    case 4:
                        params.kind = EstimandKind::StochasticContrast;
                        params.threshold = 0.5;
                        break;
                }
                SetCoefficients coef = set_coefficients(params, z);
                std::vector<std::vector<double>> po(n, std::vector<double>(n));
                for (auto& row : po)
                    for (double& x : row) x = norm(rng);
                PermutationTable perms = enumerate_assignments(n);
                double mean = 0.0;
                for (const auto& pi : perms.perms)
                    mean += v_n_set_under_assignment(coef, po, pi);
                mean /= perms.perms.size();
                theta += n * theta_set(coef, po);
                mean_vn += n * mean;
                total_units += n;
            }
            theta /= total_units;
            mean_vn /= total_units;
            worst = std::max(worst, std::abs(theta - mean_vn));
        }
    }
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "enumeration |E[V_N] - theta| max %.2e over 50 datasets x 5 estimands "
                  "(tol 1e-10)",
                  worst);
    return {worst <= 1e-10, buf};
}

// ---- 5. Lemma 2 conservative variance oracle ---------------------------------

Verdict criterion5() {
    std::mt19937_64 rng(505);
    bool ok = true;
    double worst_margin = 1e300;
    const int I = 3;  // intercept + one covariate mean needs > 2 rows
    for (int d = 0; d < 20; ++d) {
        MatchedDataset ds = random_dataset(rng, I, 2, 3, 1);
        StatisticSpec spec;  // permutational t
        CompiledStatistic stat = build_statistic(spec, ds);

        std::vector<PermutationTable> tables;
        std::vector<SetTValues> tvs;
        std::vector<double> mu(I);
        for (int i = 0; i < I; ++i) {
            tables.push_back(enumerate_assignments(ds.sets[i].size()));
            tvs.push_back(t_values(ds, i, stat, tables[i]));
            mu[i] = std::accumulate(tvs[i].t.begin(), tvs[i].t.end(), 0.0) / tvs[i].t.size();
        }
        std::vector<double> w = default_weights(ds);
        for (QDesign design : {QDesign::InterceptOnly, QDesign::InterceptPlusCovariateMeans}) {
            Eigen::MatrixXd Q = build_design(ds, design);
            double mean_V = 0.0, mean_V2 = 0.0, mean_S2 = 0.0;
            int count = 0;
            for (std::size_t p0 = 0; p0 < tvs[0].t.size(); ++p0) {
                for (std::size_t p1 = 0; p1 < tvs[1].t.size(); ++p1) {
                    for (std::size_t p2 = 0; p2 < tvs[2].t.size(); ++p2) {
                        std::vector<double> v = {tvs[0].t[p0] - mu[0], tvs[1].t[p1] - mu[1],
                                                 tvs[2].t[p2] - mu[2]};
                        double V = (w[0] * v[0] + w[1] * v[1] + w[2] * v[2]) / I;
                        mean_V += V;
                        mean_V2 += V * V;
                        mean_S2 += variance_estimate(v, w, Q);
                        ++count;
                    }
                }
            }
            mean_V /= count;
            mean_V2 /= count;
            mean_S2 /= count;
            double margin = mean_S2 - (mean_V2 - mean_V * mean_V);
            worst_margin = std::min(worst_margin, margin);
            if (margin < -1e-10) ok = false;
        }
    }
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "E[S^2] - Var(V) >= %.2e across 20 datasets x 2 designs (tol -1e-10)",
                  worst_margin);
    return {ok, buf};
}

// ---- 6. LP correctness --------------------------------------------------------

Verdict criterion6() {
    // Hand-derived pair value.
    PermutationTable pair = enumerate_assignments(2);
    auto U2 = ratio_bounds({0.0, 1.0}, std::log(2.0), pair);
    double mu_pair = mu_star_from_t({10.0, 4.0}, U2);
    if (std::abs(mu_pair - 8.0) > 1e-9)
        return {false, "pair LP value " + std::to_string(mu_pair) + " != 8"};

    std::mt19937_64 rng(606);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double worst_violation = -1e300, worst_mean_gap = 0.0;
    for (int trial = 0; trial < 6; ++trial) {
        int n = 2 + trial % 3;
        std::vector<double> z(n);
        for (double& zz : z) zz = unif(rng);
        std::sort(z.begin(), z.end());
        PermutationTable perms = enumerate_assignments(n);
        std::vector<double> t(perms.perms.size());
        for (double& x : t) x = unif(rng) * 10.0 - 5.0;

        double gamma = 0.5 + unif(rng);
        auto U = ratio_bounds(z, gamma, perms);
        double mu = mu_star_from_t(t, U);

        // gamma = 0 reduces to the uniform mean.
        auto U0 = ratio_bounds(z, 0.0, perms);
        double mu0 = mu_star_from_t(t, U0);
        double mean = std::accumulate(t.begin(), t.end(), 0.0) / t.size();
        worst_mean_gap = std::max(worst_mean_gap, std::abs(mu0 - mean));

        // 1000 random feasible points (model probabilities are feasible).
        PermModel model(z, gamma, perms);
        std::vector<double> u(n);
        for (int s = 0; s < 1000; ++s) {
            for (double& uu : u) uu = unif(rng);
            std::vector<double> p = model.probabilities(u);
            double val = 0.0;
            for (std::size_t k = 0; k < p.size(); ++k) val += p[k] * t[k];
            worst_violation = std::max(worst_violation, val - mu);
        }
    }
    char buf[200];
    std::snprintf(buf, sizeof buf,
                  "pair LP = 8 (1e-9); feasible-point excess max %.2e (tol 1e-8); "
                  "|mu*(0) - mean| max %.2e (tol 1e-9)",
                  worst_violation, worst_mean_gap);
    return {worst_violation <= 1e-8 && worst_mean_gap <= 1e-9, buf};
}

// ---- 7. Gamma^p brute-force oracle ---------------------------------------------

Verdict criterion7() {
    std::mt19937_64 rng(707);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double worst_rel = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        int n = 2 + trial % 3;
        std::vector<double> z(n);
        for (double& zz : z) zz = unif(rng) * 2.0;
        std::sort(z.begin(), z.end());
        double gamma = 0.2 + unif(rng);

        PermutationTable perms = enumerate_assignments(n);
        PermModel model(z, gamma, perms);
        double brute = 0.0;
        std::vector<double> u(n);
        for (int mask = 0; mask < (1 << n); ++mask) {
            for (int j = 0; j < n; ++j) u[j] = (mask >> j) & 1 ? 1.0 : 0.0;
            std::vector<double> p = model.probabilities(u);
            for (double pa : p)
                for (double pb : p) brute = std::max(brute, pa / pb);
        }
        double closed = gamma_p(z, gamma);
        worst_rel = std::max(worst_rel, std::abs(closed - brute) / brute);
    }
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "closed form vs brute force max relative error %.2e over 100 sets (tol 1e-9)",
                  worst_rel);
    return {worst_rel <= 1e-9, buf};
}

// ---- 8. gradient checks ----------------------------------------------------------

Verdict criterion8() {
    std::mt19937_64 rng(808);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::uniform_real_distribution<double> interior(0.05, 0.95);
    const double h = 1e-6;
    double worst = 0.0;
    for (int n : {2, 3, 4}) {
        std::vector<double> z(n);
        for (double& zz : z) zz = unif(rng);
        std::sort(z.begin(), z.end());
        PermutationTable perms = enumerate_assignments(n);
        PermModel model(z, 0.9, perms);
        std::vector<double> v(perms.perms.size());
        for (double& x : v) x = unif(rng) * 2.0 - 1.0;

        for (int pt = 0; pt < 25; ++pt) {
            std::vector<double> u(n);
            for (double& uu : u) uu = interior(rng);
            std::vector<double> g;
            for (int which = 0; which < 2; ++which) {
                auto f = [&](const std::vector<double>& x) {
                    return which == 0 ? model.identity_prob(x) : model.expectation(x, v);
                };
                if (which == 0)
                    model.identity_prob_grad(u, g);
                else
                    model.expectation_grad(u, v, g);
                for (int j = 0; j < n; ++j) {
                    std::vector<double> up = u, dn = u;
                    up[j] += h;
                    dn[j] -= h;
                    double fd = (f(up) - f(dn)) / (2.0 * h);
                    double scale = std::max({1e-8, std::abs(fd), std::abs(g[j])});
                    worst = std::max(worst, std::abs(g[j] - fd) / scale);
                }
            }
        }
    }
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "analytic vs central-difference gradients: max relative error %.2e (tol 1e-5)",
                  worst);
    return {worst <= 1e-5, buf};
}

// ---- 9. Gamma = 1 CI coverage ------------------------------------------------------

Verdict criterion9() {
    const int datasets = 500, I = 250;
    int covered = 0;
    EstimandParams params;
    params.kind = EstimandKind::Tsate;
    params.threshold = 0.5;

    std::mt19937_64 rng(909);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> norm(0.0, 1.0);

    for (int d = 0; d < datasets; ++d) {
        MatchedDataset ds;
        double theta = 0.0, total_units = 0.0;
        for (int i = 0; i < I; ++i) {
            std::poisson_distribution<int> pois(1.0);
            int n = std::min(2 + pois(rng), 5);
            std::vector<double> z(n);
            do {
                for (double& zz : z) zz = unif(rng);
                std::sort(z.begin(), z.end());
            } while (!(z.front() <= 0.5 && z.back() > 0.5));

            double beta = norm(rng);
            std::vector<std::vector<double>> po(n, std::vector<double>(n));
            for (int unit = 0; unit < n; ++unit)
                for (int k = 0; k < n; ++k) po[unit][k] = norm(rng) + z[k] * beta;

            SetCoefficients coef = set_coefficients(params, z);
            theta += n * theta_set(coef, po);
            total_units += n;

            // Uniform assignment: permute order positions over units.
            PermutationTable perms = enumerate_assignments(n);
            std::uniform_int_distribution<std::size_t> pick(0, perms.perms.size() - 1);
            const auto& pi = perms.perms[pick(rng)];
            MatchedSet set;
            set.set_id = std::to_string(i);
            for (int unit = 0; unit < n; ++unit) {
                set.doses.push_back(z[pi[unit]]);
                set.outcomes.push_back(po[unit][pi[unit]]);
            }
            ds.sets.push_back(std::move(set));
        }
        theta /= total_units;

        EstimandSpec spec = build_estimand(params, ds);
        WeakOptions opts;
        opts.alpha = 0.05;
        ConfidenceInterval ci = ci_invert(ds, spec, opts);
        if (ci.lower <= theta && theta <= ci.upper) ++covered;
    }
    double rate = covered / static_cast<double>(datasets);
    char buf[160];
    std::snprintf(buf, sizeof buf, "95%% CI coverage %.3f over %d datasets (threshold 0.935)",
                  rate, datasets);
    return {rate >= 0.935, buf};
}

// ---- 10. Gamma-sweep structural properties -------------------------------------------

Verdict criterion10() {
    std::mt19937_64 rng(1010);
    MatchedDataset ds = random_dataset(rng, 40, 2, 4);
    EstimandParams params;
    params.kind = EstimandKind::Tsate;
    params.threshold = 0.5;
    params.on_degenerate = DegeneratePolicy::Drop;
    EstimandSpec spec = build_estimand(params, ds);

    bool p_monotone = true, width_monotone = true;
    double prev_p = -1.0, prev_width = -1.0;
    std::string detail;
    for (double Gamma = 1.00; Gamma <= 1.30 + 1e-9; Gamma += 0.05) {
        WeakOptions opts;
        opts.gamma = std::log(Gamma);
        opts.theta0 = 0.0;
        opts.method = WeakMethod::VC;
        opts.alpha = 0.1;
        WeakResult test = weak_test(ds, spec, opts);
        ConfidenceInterval ci = ci_invert(ds, spec, opts);
        double width = ci.upper - ci.lower;
        if (test.p_bound < prev_p - 1e-9) p_monotone = false;
        if (width < prev_width - 1e-7) width_monotone = false;
        prev_p = test.p_bound;
        prev_width = width;
        char buf[64];
        std::snprintf(buf, sizeof buf, " [G=%.2f p=%.4f w=%.4f]", Gamma, test.p_bound, width);
        detail += buf;
    }
    char head[96];
    std::snprintf(head, sizeof head, "sweep monotone: p=%d, ci-width=%d;", p_monotone,
                  width_monotone);
    return {p_monotone && width_monotone, head + detail};
}

}  // namespace

int main(int argc, char** argv) {
    using Criterion = Verdict (*)();
    Criterion criteria[] = {criterion1, criterion2, criterion3, criterion4, criterion5,
                            criterion6, criterion7, criterion8, criterion9, criterion10};

    int lo = 1, hi = 10;
    if (argc > 1 && std::strcmp(argv[1], "all") != 0) {
        lo = hi = std::atoi(argv[1]);
        if (lo < 1 || lo > 10) {
            std::fprintf(stderr, "usage: %s <1..10 | all>\n", argv[0]);
            return 2;
        }
    }
    bool all_pass = true;
    for (int c = lo; c <= hi; ++c) {
        Verdict v;
        try {
            v = criteria[c - 1]();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        std::printf("criterion %d: %s - %s\n", c, v.pass ? "PASS" : "FAIL", v.detail.c_str());
        std::fflush(stdout);
        all_pass = all_pass && v.pass;
    }
    return all_pass ? 0 : 1;
}
