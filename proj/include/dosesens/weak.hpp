#pragma once

#include <optional>
#include <vector>

#include "dosesens/box.hpp"
#include "dosesens/perm_model.hpp"
#include "dosesens/sharp.hpp"
#include "dosesens/variance.hpp"

namespace dosesens {

enum class EstimandKind { Sate, EffectRatio, Tsate, AvgSlope, StochasticContrast };
enum class DegeneratePolicy { Error, Drop };
enum class ContrastKind { AboveC, BelowC };
enum class WeakMethod { VN, VC };
enum class TestSide { Greater, Less };

struct EstimandParams {
    EstimandKind kind = EstimandKind::Tsate;
    double lambda0 = 0.0;    // effect-ratio null slope
    double threshold = 0.0;  // dose threshold c for tsate / thresholded contrasts
    ContrastKind contrast = ContrastKind::AboveC;
    // Explicit per-set intervention weights (aligned with dose order
    // statistics); when set they override `contrast` and a baseline.
    std::vector<std::vector<double>> weights1;
    std::vector<std::vector<double>> weights2;
    DegeneratePolicy on_degenerate = DegeneratePolicy::Error;
};

/// Per-set coefficients of the estimand: the contribution of order position
/// k is f^{(k)}(z_(k), r) = a[k] * r + b[k]. Affine-in-outcome coefficients
/// cover the whole estimand family here.
struct SetCoefficients {
    std::vector<double> a;
    std::vector<double> b;
    bool degenerate = false;
};

/// Coefficients for one set from its sorted doses. `degenerate` is set when
/// the estimand is undefined on the set (no doses on one side of the
/// threshold, or constant doses for the slope estimand).
SetCoefficients set_coefficients(const EstimandParams& params, const std::vector<double>& z_sorted);

struct EstimandSpec {
    EstimandParams params;
    std::vector<std::vector<double>> a;  // per retained set
    std::vector<std::vector<double>> b;
    std::vector<int> set_indices;        // into dataset.sets
    std::vector<int> dropped_sets;
};

EstimandSpec build_estimand(const EstimandParams& params, const MatchedDataset& dataset);

/// V_{N,i} for each retained set and the aggregate V_N = sum (n_i/N) V_{N,i}.
struct VnResult {
    double V_N = 0.0;
    std::vector<double> per_set;
};

VnResult v_n(const MatchedDataset& dataset, const EstimandSpec& estimand);

/// theta_i for one set from a full potential-outcome table po[j][k] (unit j
/// under the k-th dose order statistic).
double theta_set(const SetCoefficients& coef, const std::vector<std::vector<double>>& po);

/// V_{N,i} that would be observed under permutation pi (unit j receives dose
/// order position pi[j]).
double v_n_set_under_assignment(const SetCoefficients& coef,
                                const std::vector<std::vector<double>>& po,
                                const std::vector<int>& pi);

/// Per-set sensitivity quantities at a given gamma.
struct SetSensitivity {
    double l = 0.0;           // min assignment probability
    double h = 0.0;           // max assignment probability
    double gamma_star = 1.0;  // h / l
    double gamma_p = 1.0;     // max probability ratio, closed form
};

SetSensitivity l_h(const std::vector<double>& sorted_doses, double gamma,
                   int cap = kDefaultEnumerationCap, const BoxOptions& box = BoxOptions{});

/// Closed form exp(gamma * (top-half dose sum - bottom-half dose sum)).
double gamma_p(const std::vector<double>& sorted_doses, double gamma);

/// Per-set bounded value for testing theta = theta0. For VN the coefficient
/// (1+Gamma*)/(2 n! h) multiplies the shrunk deviation; VC uses the closed
/// form correction kappa = (Gamma_p - 1)/(Gamma_p + 1).
double bounded_set_value(double v_n_i, double theta0, WeakMethod method, int n_i,
                         const SetSensitivity& sens);

struct WeakOptions {
    double gamma = 0.0;
    double theta0 = 0.0;
    WeakMethod method = WeakMethod::VC;
    TestSide side = TestSide::Greater;
    double alpha = 0.1;
    QDesign q_design = QDesign::InterceptOnly;
    VarianceWeights weights = VarianceWeights::SampleSize;
    int cap = kDefaultEnumerationCap;
    BoxOptions box;
};

struct WeakResult {
    double V_N = 0.0;
    double S_N = 0.0;  // SD estimate from the raw V_{N,i}
    double theta0 = 0.0;
    WeakMethod method = WeakMethod::VC;
    double V_bounded = 0.0;
    double S_bounded = 0.0;
    double p_bound = 1.0;
    bool condition1_assumed = false;  // VC validity relies on an unchecked condition
    std::vector<double> per_set_v;
    std::vector<SetSensitivity> per_set_sens;
};

WeakResult weak_test(const MatchedDataset& dataset, const EstimandSpec& estimand,
                     const WeakOptions& options);

struct ConfidenceInterval {
    double lower = 0.0;
    double upper = 0.0;
    bool grid_fallback = false;
};

/// Two-sided CI at level 1 - alpha. gamma = 0 uses the closed form
/// V_N +- z_{1-alpha/2} S_N(Q); gamma > 0 inverts two one-sided bounding
/// tests at alpha/2 by bisection (grid scan fallback).
ConfidenceInterval ci_invert(const MatchedDataset& dataset, const EstimandSpec& estimand,
                             const WeakOptions& options);

double normal_quantile(double p);

}  // namespace dosesens
