#include "dosesens/weak.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/distributions/normal.hpp>

#include "dosesens/rng.hpp"

namespace dosesens {

double normal_quantile(double p) {
    boost::math::normal_distribution<> norm(0.0, 1.0);
    return boost::math::quantile(norm, p);
}

SetCoefficients set_coefficients(const EstimandParams& params, const std::vector<double>& z) {
    const int n = static_cast<int>(z.size());
    SetCoefficients coef;
    coef.a.assign(n, 0.0);
    coef.b.assign(n, 0.0);

    switch (params.kind) {
        case EstimandKind::Sate: {
            // Doses must be binary within the set; the m largest are treated.
            double lo = z.front(), hi = z.back();
            int m = 0;
            for (double zz : z) {
                if (zz == hi) ++m;
                else if (zz != lo)
                    throw Error(ErrorCode::BadConfig, "sate requires binary doses within each set");
            }
            if (lo == hi) {
                coef.degenerate = true;
                return coef;
            }
            for (int k = 0; k < n; ++k)
                coef.a[k] = k < n - m ? -1.0 / (n - m) : 1.0 / m;
            break;
        }
        case EstimandKind::EffectRatio: {
            if (n != 2)
                throw Error(ErrorCode::BadConfig, "effect-ratio requires pair matching (n_i = 2)");
            coef.a = {-1.0, 1.0};
            coef.b = {params.lambda0 * z[0], -params.lambda0 * z[1]};
            break;
        }
        case EstimandKind::Tsate: {
            int m = 0;
            for (double zz : z)
                if (zz > params.threshold) ++m;
            if (m == 0 || m == n) {
                coef.degenerate = true;
                return coef;
            }
            for (int k = 0; k < n; ++k)
                coef.a[k] = z[k] > params.threshold ? 1.0 / m : -1.0 / (n - m);
            break;
        }
        case EstimandKind::AvgSlope: {
            double zbar = 0.0;
            for (double zz : z) zbar += zz;
            zbar /= n;
            double s2 = 0.0;
            for (double zz : z) s2 += (zz - zbar) * (zz - zbar);
            s2 /= n;
            if (s2 <= 1e-12 * std::max(1.0, zbar * zbar)) {
                coef.degenerate = true;
                return coef;
            }
            for (int k = 0; k < n; ++k) coef.a[k] = (z[k] - zbar) / (n * s2);
            break;
        }
        case EstimandKind::StochasticContrast: {
            int m = 0;
            for (double zz : z)
                if (zz > params.threshold) ++m;
            std::vector<double> s1(n, 0.0);
            if (params.contrast == ContrastKind::AboveC) {
                if (m == 0) {
                    coef.degenerate = true;
                    return coef;
                }
                for (int k = 0; k < n; ++k)
                    if (z[k] > params.threshold) s1[k] = 1.0 / m;
            } else {
                if (m == n) {
                    coef.degenerate = true;
                    return coef;
                }
                for (int k = 0; k < n; ++k)
                    if (z[k] <= params.threshold) s1[k] = 1.0 / (n - m);
            }
            for (int k = 0; k < n; ++k) coef.a[k] = s1[k] - 1.0 / n;  // vs uniform baseline
            break;
        }
    }
    return coef;
}

namespace {

void validate_tie_consistency(const std::vector<double>& z, const std::vector<double>& a,
                              const std::vector<double>& b, const std::string& set_id) {
    for (std::size_t k = 0; k + 1 < z.size(); ++k) {
        if (z[k] == z[k + 1] && (a[k] != a[k + 1] || b[k] != b[k + 1]))
            throw Error(ErrorCode::BadWeights,
                        "tied doses carry different estimand coefficients in set '" + set_id + "'");
    }
}

std::vector<double> contrast_coefficients(const std::vector<double>& w1,
                                          const std::vector<double>& w2,
                                          const std::string& set_id) {
    auto check = [&](const std::vector<double>& w) {
        double sum = 0.0;
        for (double v : w) {
            if (v < 0.0) throw Error(ErrorCode::BadWeights, "negative intervention weight in set '" + set_id + "'");
            sum += v;
        }
        if (std::abs(sum - 1.0) > 1e-9)
            throw Error(ErrorCode::BadWeights, "intervention weights do not sum to 1 in set '" + set_id + "'");
    };
    check(w1);
    check(w2);
    std::vector<double> a(w1.size());
    for (std::size_t k = 0; k < w1.size(); ++k) a[k] = w1[k] - w2[k];
    return a;
}

}  // namespace

EstimandSpec build_estimand(const EstimandParams& params, const MatchedDataset& dataset) {
    EstimandSpec spec;
    spec.params = params;

    const bool explicit_weights = !params.weights1.empty();
    if (explicit_weights &&
        (params.weights1.size() != dataset.sets.size() ||
         params.weights2.size() != dataset.sets.size()))
        throw Error(ErrorCode::BadWeights, "per-set intervention weights must cover every set");

    for (int i = 0; i < dataset.num_sets(); ++i) {
        const MatchedSet& set = dataset.sets[i];
        std::vector<double> z = sorted_doses(set);
        SetCoefficients coef;
        if (explicit_weights) {
            if (static_cast<int>(params.weights1[i].size()) != set.size() ||
                static_cast<int>(params.weights2[i].size()) != set.size())
                throw Error(ErrorCode::BadWeights,
                            "intervention weight length mismatch in set '" + set.set_id + "'");
            coef.a = contrast_coefficients(params.weights1[i], params.weights2[i], set.set_id);
            coef.b.assign(set.size(), 0.0);
        } else {
            coef = set_coefficients(params, z);
        }
        if (coef.degenerate) {
            if (params.on_degenerate == DegeneratePolicy::Error)
                throw Error(ErrorCode::DegenerateThreshold,
                            "estimand undefined on set '" + set.set_id +
                                "' (no dose variation across the threshold)");
            spec.dropped_sets.push_back(i);
            continue;
        }
        validate_tie_consistency(z, coef.a, coef.b, set.set_id);
        spec.a.push_back(std::move(coef.a));
        spec.b.push_back(std::move(coef.b));
        spec.set_indices.push_back(i);
    }
    if (spec.set_indices.empty())
        throw Error(ErrorCode::DegenerateThreshold, "every matched set is degenerate for this estimand");
    return spec;
}

VnResult v_n(const MatchedDataset& dataset, const EstimandSpec& estimand) {
    VnResult res;
    res.per_set.resize(estimand.set_indices.size());
    double total_units = 0.0;
    for (std::size_t s = 0; s < estimand.set_indices.size(); ++s)
        total_units += dataset.sets[estimand.set_indices[s]].size();

    for (std::size_t s = 0; s < estimand.set_indices.size(); ++s) {
        const MatchedSet& set = dataset.sets[estimand.set_indices[s]];
        std::vector<int> k = order_index(set);
        double v = 0.0;
        for (int j = 0; j < set.size(); ++j) {
            int pos = k[j] - 1;
            v += estimand.a[s][pos] * set.outcomes[j] + estimand.b[s][pos];
        }
        res.per_set[s] = v;
        res.V_N += set.size() / total_units * v;
    }
    return res;
}

double theta_set(const SetCoefficients& coef, const std::vector<std::vector<double>>& po) {
    const int n = static_cast<int>(po.size());
    double theta = 0.0;
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) theta += coef.a[k] * po[j][k] + coef.b[k];
    return theta / n;
}

double v_n_set_under_assignment(const SetCoefficients& coef,
                                const std::vector<std::vector<double>>& po,
                                const std::vector<int>& pi) {
    double v = 0.0;
    for (std::size_t j = 0; j < pi.size(); ++j) {
        int k = pi[j];
        v += coef.a[k] * po[j][k] + coef.b[k];
    }
    return v;
}

SetSensitivity l_h(const std::vector<double>& z, double gamma, int cap, const BoxOptions& box) {
    const int n = static_cast<int>(z.size());
    PermutationTable perms = enumerate_assignments(n, cap);
    SetSensitivity sens;
    sens.gamma_p = gamma_p(z, gamma);
    if (gamma == 0.0) {
        sens.l = sens.h = 1.0 / static_cast<double>(factorial(n));
        sens.gamma_star = 1.0;
        return sens;
    }
    PermModel model(z, gamma, perms);
    sens.l = box_optimize(model.identity_prob_problem(OptSense::Minimize), box).value;
    sens.h = box_optimize(model.identity_prob_problem(OptSense::Maximize), box).value;
    sens.gamma_star = sens.h / sens.l;
    return sens;
}

double gamma_p(const std::vector<double>& z, double gamma) {
    const int n = static_cast<int>(z.size());
    double top = 0.0, bottom = 0.0;
    for (int k = n / 2; k < n; ++k) top += z[k];          // k = ceil(n/2)+1 .. n, 1-based
    for (int k = 0; k < n / 2; ++k) bottom += z[k];       // k = 1 .. floor(n/2)
    if (n % 2 == 1) top -= z[n / 2];                      // middle order statistic excluded
    return std::exp(gamma * (top - bottom));
}

double bounded_set_value(double v_n_i, double theta0, WeakMethod method, int n_i,
                         const SetSensitivity& sens) {
    double d = v_n_i - theta0;
    if (method == WeakMethod::VC) {
        double kappa = (sens.gamma_p - 1.0) / (sens.gamma_p + 1.0);
        return d - kappa * std::abs(d);
    }
    double gs = sens.gamma_star;
    double coef = (1.0 + gs) / (2.0 * static_cast<double>(factorial(n_i)) * sens.h);
    return coef * (d - (gs - 1.0) / (1.0 + gs) * std::abs(d));
}

namespace {

// Everything that does not depend on theta0, so CI inversion can re-test
// many candidate values cheaply.
struct WeakContext {
    std::vector<int> n;           // retained set sizes
    std::vector<double> v;        // V_{N,i}
    std::vector<SetSensitivity> sens;
    std::vector<double> agg_w;    // n_i / N over retained sets
    std::vector<double> var_w;    // W diagonal
    Eigen::MatrixXd Q;
    WeakMethod method = WeakMethod::VC;
    double V_N = 0.0;
    double S_N = 0.0;

    struct TestValue {
        double V_bounded;
        double S_bounded;
        double p;
        std::vector<double> per_set;
    };

    TestValue test(double theta0) const {
        TestValue out;
        out.per_set.resize(v.size());
        out.V_bounded = 0.0;
        for (std::size_t s = 0; s < v.size(); ++s) {
            out.per_set[s] = bounded_set_value(v[s], theta0, method, n[s], sens[s]);
            out.V_bounded += agg_w[s] * out.per_set[s];
        }
        out.S_bounded = std::sqrt(variance_estimate(out.per_set, var_w, Q));
        if (out.S_bounded > 0.0)
            out.p = 1.0 - normal_cdf(out.V_bounded / out.S_bounded);
        else
            out.p = out.V_bounded > 0.0 ? 0.0 : 1.0;
        return out;
    }
};

WeakContext make_context(const MatchedDataset& dataset, const EstimandSpec& estimand,
                         const WeakOptions& options, bool negate) {
    const std::size_t S = estimand.set_indices.size();
    if (S < 2) throw Error(ErrorCode::TooFewSets, "weak-null analysis needs at least 2 usable sets");

    WeakContext ctx;
    ctx.method = options.method;

    // Restrict the dataset to the retained sets for Q and the weights.
    MatchedDataset retained;
    retained.covariate_dim = dataset.covariate_dim;
    for (int idx : estimand.set_indices) retained.sets.push_back(dataset.sets[idx]);
    ctx.Q = build_design(retained, options.q_design);
    ctx.var_w = options.weights == VarianceWeights::SampleSize
                    ? default_weights(retained)
                    : std::vector<double>(S, 1.0);

    double total_units = retained.total_units();
    ctx.n.resize(S);
    ctx.v.resize(S);
    ctx.sens.resize(S);
    ctx.agg_w.resize(S);

    VnResult vn = v_n(dataset, estimand);
    for (std::size_t s = 0; s < S; ++s) {
        const MatchedSet& set = retained.sets[s];
        ctx.n[s] = set.size();
        ctx.v[s] = negate ? -vn.per_set[s] : vn.per_set[s];
        ctx.agg_w[s] = set.size() / total_units;

        std::vector<double> z = sorted_doses(set);
        if (options.method == WeakMethod::VN) {
            BoxOptions box = options.box;
            box.seed = mix_key(options.box.seed, 0x6c68, s);
            ctx.sens[s] = l_h(z, options.gamma, options.cap, box);
        } else {
            ctx.sens[s].gamma_p = gamma_p(z, options.gamma);
        }
    }
    ctx.V_N = negate ? -vn.V_N : vn.V_N;
    ctx.S_N = std::sqrt(variance_estimate(ctx.v, ctx.var_w, ctx.Q));
    return ctx;
}

// Smallest theta0 not rejected by the one-sided (greater) bounding test at
// level `level`. p(theta0) is nondecreasing when the bounded statistic is
// strictly decreasing in theta0; a dense grid scan covers the rest.
double invert_lower(const WeakContext& ctx, double level, bool* used_grid) {
    double scale = ctx.S_N > 0.0 ? ctx.S_N : std::max(1.0, std::abs(ctx.V_N));
    double lo = ctx.V_N - 20.0 * scale;
    double hi = ctx.V_N + 20.0 * scale;
    for (int i = 0; i < 60 && ctx.test(lo).p > level; ++i) lo = ctx.V_N - (ctx.V_N - lo) * 2.0 - scale;
    for (int i = 0; i < 60 && ctx.test(hi).p <= level; ++i) hi = ctx.V_N + (hi - ctx.V_N) * 2.0 + scale;

    if (ctx.test(lo).p > level) {
        // Never rejected below: the interval is unbounded on this side in
        // the search range; report the bracket edge.
        return lo;
    }
    bool monotone = true;
    {
        double prev = -1.0;
        for (int g = 0; g <= 8; ++g) {
            double th = lo + (hi - lo) * g / 8.0;
            double p = ctx.test(th).p;
            if (p < prev - 1e-12) monotone = false;
            prev = p;
        }
    }
    if (!monotone) {
        if (used_grid) *used_grid = true;
        double best = hi;
        for (int g = 0; g <= 400; ++g) {
            double th = lo + (hi - lo) * g / 400.0;
            if (ctx.test(th).p > level) {
                best = th;
                break;
            }
        }
        return best;
    }
    for (int iter = 0; iter < 200 && hi - lo > 1e-12 * scale; ++iter) {
        double mid = 0.5 * (lo + hi);
        if (ctx.test(mid).p <= level)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

WeakResult weak_test(const MatchedDataset& dataset, const EstimandSpec& estimand,
                     const WeakOptions& options) {
    const bool negate = options.side == TestSide::Less;
    WeakContext ctx = make_context(dataset, estimand, options, negate);
    double theta0 = negate ? -options.theta0 : options.theta0;
    auto tv = ctx.test(theta0);

    WeakResult res;
    res.V_N = negate ? -ctx.V_N : ctx.V_N;
    res.S_N = ctx.S_N;
    res.theta0 = options.theta0;
    res.method = options.method;
    res.V_bounded = tv.V_bounded;
    res.S_bounded = tv.S_bounded;
    res.p_bound = tv.p;
    res.condition1_assumed = options.method == WeakMethod::VC && options.gamma > 0.0;
    res.per_set_v = tv.per_set;  // bounded values as used by the test
    res.per_set_sens = ctx.sens;
    return res;
}

ConfidenceInterval ci_invert(const MatchedDataset& dataset, const EstimandSpec& estimand,
                             const WeakOptions& options) {
    ConfidenceInterval ci;
    if (options.gamma == 0.0) {
        WeakContext ctx = make_context(dataset, estimand, options, false);
        double z = normal_quantile(1.0 - options.alpha / 2.0);
        ci.lower = ctx.V_N - z * ctx.S_N;
        ci.upper = ctx.V_N + z * ctx.S_N;
        return ci;
    }
    const double level = options.alpha / 2.0;
    bool grid = false;
    WeakContext ctx_lo = make_context(dataset, estimand, options, false);
    ci.lower = invert_lower(ctx_lo, level, &grid);
    WeakContext ctx_hi = make_context(dataset, estimand, options, true);
    ci.upper = -invert_lower(ctx_hi, level, &grid);
    ci.grid_fallback = grid;
    if (ci.lower > ci.upper)
        throw Error(ErrorCode::EmptyInterval, "acceptance region is empty");
    return ci;
}

}  // namespace dosesens
