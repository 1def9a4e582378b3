// Python bindings for the main analysis entry points.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "dosesens/dataset.hpp"
#include "dosesens/sharp.hpp"
#include "dosesens/sim.hpp"
#include "dosesens/statistic.hpp"
#include "dosesens/weak.hpp"

namespace py = pybind11;
namespace ds = dosesens;

namespace {

ds::StatisticSpec make_stat_spec(const std::string& name, const std::string& scope) {
    ds::StatisticSpec spec;
    if (name == "perm-t") spec.kind = ds::StatisticKind::PermutationalT;
    else if (name == "wilcoxon") spec.kind = ds::StatisticKind::Wilcoxon;
    else if (name == "double-rank") spec.kind = ds::StatisticKind::DoubleRank;
    else throw ds::Error(ds::ErrorCode::UnknownKind, "unknown statistic '" + name + "'");
    spec.dose_rank_scope =
        scope == "within-set" ? ds::RankScope::WithinSet : ds::RankScope::Global;
    return spec;
}

ds::EstimandParams make_estimand(const std::string& kind, double lambda0, double threshold,
                                 const std::string& contrast, bool drop_degenerate) {
    ds::EstimandParams p;
    if (kind == "sate") p.kind = ds::EstimandKind::Sate;
    else if (kind == "effect-ratio") p.kind = ds::EstimandKind::EffectRatio;
    else if (kind == "tsate") p.kind = ds::EstimandKind::Tsate;
    else if (kind == "avg-slope") p.kind = ds::EstimandKind::AvgSlope;
    else if (kind == "stochastic") p.kind = ds::EstimandKind::StochasticContrast;
    else throw ds::Error(ds::ErrorCode::UnknownKind, "unknown estimand '" + kind + "'");
    p.lambda0 = lambda0;
    p.threshold = threshold;
    p.contrast = contrast == "below" ? ds::ContrastKind::BelowC : ds::ContrastKind::AboveC;
    p.on_degenerate =
        drop_degenerate ? ds::DegeneratePolicy::Drop : ds::DegeneratePolicy::Error;
    return p;
}

ds::WeakOptions make_weak_options(double gamma, double theta0, const std::string& method,
                                  const std::string& side, double alpha,
                                  const std::string& q_covariates) {
    if (!(gamma >= 1.0)) throw ds::Error(ds::ErrorCode::BadConfig, "gamma must be >= 1");
    ds::WeakOptions o;
    o.gamma = std::log(gamma);
    o.theta0 = theta0;
    o.method = method == "vn" ? ds::WeakMethod::VN : ds::WeakMethod::VC;
    o.side = side == "less" ? ds::TestSide::Less : ds::TestSide::Greater;
    o.alpha = alpha;
    o.q_design = q_covariates == "means" ? ds::QDesign::InterceptPlusCovariateMeans
                                         : ds::QDesign::InterceptOnly;
    return o;
}

}  // namespace

PYBIND11_MODULE(_dosesens, m) {
    m.doc() = "Randomization inference and dose sensitivity analysis for matched sets";

    py::register_exception<ds::Error>(m, "AnalysisError");

    py::class_<ds::MatchedSet>(m, "MatchedSet")
        .def_readonly("set_id", &ds::MatchedSet::set_id)
        .def_readonly("doses", &ds::MatchedSet::doses)
        .def_readonly("outcomes", &ds::MatchedSet::outcomes)
        .def_readonly("covariates", &ds::MatchedSet::covariates)
        .def("size", &ds::MatchedSet::size);

    py::class_<ds::MatchedDataset>(m, "MatchedDataset")
        .def_readonly("sets", &ds::MatchedDataset::sets)
        .def_readonly("covariate_dim", &ds::MatchedDataset::covariate_dim)
        .def("num_sets", &ds::MatchedDataset::num_sets)
        .def("total_units", &ds::MatchedDataset::total_units);

    m.def("load_dataset",
          [](const std::string& path) { return ds::load_dataset(path); }, py::arg("path"));
    m.def("parse_dataset_csv",
          [](const std::string& text) { return ds::parse_dataset_csv(text); }, py::arg("text"));

    m.def(
        "sharp_test",
        [](const ds::MatchedDataset& data, double gamma, const std::string& statistic,
           const std::string& rank_scope, const std::string& q_covariates) {
            if (!(gamma >= 1.0))
                throw ds::Error(ds::ErrorCode::BadConfig, "gamma must be >= 1");
            ds::CompiledStatistic stat =
                ds::build_statistic(make_stat_spec(statistic, rank_scope), data);
            ds::SharpOptions opts;
            opts.gamma = std::log(gamma);
            opts.q_design = q_covariates == "means"
                                ? ds::QDesign::InterceptPlusCovariateMeans
                                : ds::QDesign::InterceptOnly;
            ds::SharpResult r = ds::sharp_analysis(data, stat, opts);
            py::dict out;
            out["gamma"] = gamma;
            out["T"] = r.T;
            out["V_F"] = r.V_F;
            out["S"] = r.S;
            out["p_bound"] = r.p_bound;
            out["t_observed"] = r.t_observed;
            out["mu_star"] = r.mu_star;
            return out;
        },
        py::arg("dataset"), py::arg("gamma") = 1.0, py::arg("statistic") = "perm-t",
        py::arg("rank_scope") = "global", py::arg("q_covariates") = "none");

    m.def(
        "estimate",
        [](const ds::MatchedDataset& data, const std::string& estimand, double lambda0,
           double threshold, const std::string& contrast, bool drop_degenerate) {
            ds::EstimandSpec spec = ds::build_estimand(
                make_estimand(estimand, lambda0, threshold, contrast, drop_degenerate), data);
            ds::VnResult vn = ds::v_n(data, spec);
            py::dict out;
            out["V_N"] = vn.V_N;
            out["per_set"] = vn.per_set;
            return out;
        },
        py::arg("dataset"), py::arg("estimand") = "tsate", py::arg("lambda0") = 0.0,
        py::arg("threshold") = 0.5, py::arg("contrast") = "above",
        py::arg("drop_degenerate") = false);

    m.def(
        "weak_test",
        [](const ds::MatchedDataset& data, const std::string& estimand, double lambda0,
           double threshold, const std::string& contrast, bool drop_degenerate, double gamma,
           double theta0, const std::string& method, const std::string& side, double alpha,
           const std::string& q_covariates) {
            ds::EstimandSpec spec = ds::build_estimand(
                make_estimand(estimand, lambda0, threshold, contrast, drop_degenerate), data);
            ds::WeakResult r = ds::weak_test(
                data, spec, make_weak_options(gamma, theta0, method, side, alpha, q_covariates));
            py::dict out;
            out["V_N"] = r.V_N;
            out["S_N"] = r.S_N;
            out["V_bounded"] = r.V_bounded;
            out["S_bounded"] = r.S_bounded;
            out["p_bound"] = r.p_bound;
            out["reject"] = r.p_bound <= alpha;
            out["condition1_assumed"] = r.condition1_assumed;
            return out;
        },
        py::arg("dataset"), py::arg("estimand") = "tsate", py::arg("lambda0") = 0.0,
        py::arg("threshold") = 0.5, py::arg("contrast") = "above",
        py::arg("drop_degenerate") = false, py::arg("gamma") = 1.0, py::arg("theta0") = 0.0,
        py::arg("method") = "vc", py::arg("side") = "greater", py::arg("alpha") = 0.1,
        py::arg("q_covariates") = "none");

    m.def(
        "confidence_interval",
        [](const ds::MatchedDataset& data, const std::string& estimand, double lambda0,
           double threshold, const std::string& contrast, bool drop_degenerate, double gamma,
           const std::string& method, double alpha, const std::string& q_covariates) {
            ds::EstimandSpec spec = ds::build_estimand(
                make_estimand(estimand, lambda0, threshold, contrast, drop_degenerate), data);
            ds::ConfidenceInterval ci = ds::ci_invert(
                data, spec, make_weak_options(gamma, 0.0, method, "greater", alpha, q_covariates));
            return py::make_tuple(ci.lower, ci.upper);
        },
        py::arg("dataset"), py::arg("estimand") = "tsate", py::arg("lambda0") = 0.0,
        py::arg("threshold") = 0.5, py::arg("contrast") = "above",
        py::arg("drop_degenerate") = false, py::arg("gamma") = 1.0, py::arg("method") = "vc",
        py::arg("alpha") = 0.1, py::arg("q_covariates") = "none");

    m.def(
        "simulate",
        [](const std::string& protocol, int num_sets, int reps, std::uint64_t seed, double gamma,
           double alpha, const std::string& dose_law, const std::string& outcome_law,
           const std::string& statistic, const std::string& effect_law,
           const std::string& noise_min_dose_law, const std::string& noise_law, double b_sign,
           double threshold) {
            if (!(gamma >= 1.0))
                throw ds::Error(ds::ErrorCode::BadConfig, "gamma must be >= 1");
            ds::SimConfig cfg;
            cfg.protocol =
                protocol == "weak" ? ds::SimProtocol::Weak : ds::SimProtocol::Sharp;
            cfg.num_sets = num_sets;
            cfg.reps = reps;
            cfg.seed = seed;
            cfg.gamma = std::log(gamma);
            cfg.alpha = alpha;
            cfg.dose_law = ds::parse_dist(dose_law);
            cfg.outcome_law = ds::parse_dist(outcome_law);
            cfg.statistic = make_stat_spec(statistic, "global");
            cfg.effect_law = ds::parse_dist(effect_law);
            cfg.noise_min_dose_law = ds::parse_dist(noise_min_dose_law);
            cfg.noise_law = ds::parse_dist(noise_law);
            cfg.b_sign = b_sign;
            cfg.threshold = threshold;
            if (cfg.protocol == ds::SimProtocol::Sharp) cfg.size_poisson_rate = 0.6;
            else {
                cfg.size_poisson_rate = 1.0;
                cfg.max_set_size = 5;
            }
            ds::SimReport rep = ds::run_sim(cfg);
            py::list methods;
            for (const auto& ms : rep.methods) {
                py::dict d;
                d["name"] = ms.name;
                d["rejection_rate"] = ms.rejection_rate;
                d["rejection_se"] = ms.rejection_se;
                methods.append(d);
            }
            return methods;
        },
        py::arg("protocol") = "sharp", py::arg("num_sets") = 100, py::arg("reps") = 20,
        py::arg("seed") = 1, py::arg("gamma") = 1.0, py::arg("alpha") = 0.1,
        py::arg("dose_law") = "unif", py::arg("outcome_law") = "normal(0,1)",
        py::arg("statistic") = "double-rank", py::arg("effect_law") = "normal(0,5)",
        py::arg("noise_min_dose_law") = "normal(0,1)", py::arg("noise_law") = "normal(0,1)",
        py::arg("b_sign") = 1.0, py::arg("threshold") = 0.5);
}
