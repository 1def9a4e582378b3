// Command-line front end: dataset ingestion, subcommand dispatch, gamma-grid
// sweeps, and JSON/CSV report emission.
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dosesens/dataset.hpp"
#include "dosesens/report.hpp"
#include "dosesens/sharp.hpp"
#include "dosesens/sim.hpp"
#include "dosesens/statistic.hpp"
#include "dosesens/weak.hpp"

namespace ds = dosesens;
using nlohmann::json;

namespace {

std::string sig6(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

// Simple key-value config: one `key = value` per line, '#' comments.
std::map<std::string, std::string> read_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ds::Error(ds::ErrorCode::IoError, "cannot open config '" + path + "'");
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            auto b = s.find_first_not_of(" \t\r");
            auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        std::string key = trim(line.substr(0, eq)), val = trim(line.substr(eq + 1));
        if (!key.empty()) kv[key] = val;
    }
    return kv;
}

double to_double(const std::string& key, const std::string& val) {
    try {
        std::size_t pos = 0;
        double x = std::stod(val, &pos);
        if (pos != val.size()) throw std::invalid_argument(val);
        return x;
    } catch (const std::exception&) {
        throw ds::Error(ds::ErrorCode::BadConfig, "bad numeric value for " + key + ": '" + val + "'");
    }
}

long to_long(const std::string& key, const std::string& val) {
    try {
        std::size_t pos = 0;
        long x = std::stol(val, &pos);
        if (pos != val.size()) throw std::invalid_argument(val);
        return x;
    } catch (const std::exception&) {
        throw ds::Error(ds::ErrorCode::BadConfig, "bad integer value for " + key + ": '" + val + "'");
    }
}

ds::StatisticKind parse_statistic_kind(const std::string& name) {
    if (name == "perm-t") return ds::StatisticKind::PermutationalT;
    if (name == "wilcoxon") return ds::StatisticKind::Wilcoxon;
    if (name == "double-rank") return ds::StatisticKind::DoubleRank;
    if (name == "custom") return ds::StatisticKind::Custom;
    throw ds::Error(ds::ErrorCode::UnknownKind, "unknown statistic '" + name + "'");
}

std::map<double, double> read_score_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ds::Error(ds::ErrorCode::IoError, "cannot open scores '" + path + "'");
    std::map<double, double> scores;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        if (first && line.rfind("value", 0) == 0) {
            first = false;
            continue;
        }
        first = false;
        auto comma = line.find(',');
        if (comma == std::string::npos)
            throw ds::Error(ds::ErrorCode::BadConfig, "expected 'value,score' rows in " + path);
        scores[to_double("value", line.substr(0, comma))] =
            to_double("score", line.substr(comma + 1));
    }
    if (scores.empty()) throw ds::Error(ds::ErrorCode::BadConfig, "empty score table " + path);
    return scores;
}

double gamma_to_log(double Gamma) {
    if (!(Gamma >= 1.0))
        throw ds::Error(ds::ErrorCode::BadConfig, "gamma must be >= 1 (got " + sig6(Gamma) + ")");
    return std::log(Gamma);
}

void check_gammas(const std::vector<double>& gammas) {
    if (gammas.empty()) throw ds::Error(ds::ErrorCode::BadConfig, "empty gamma list");
    for (std::size_t i = 0; i < gammas.size(); ++i) {
        if (!(gammas[i] >= 1.0))
            throw ds::Error(ds::ErrorCode::BadConfig, "gamma values must be >= 1");
        if (i > 0 && gammas[i] < gammas[i - 1])
            throw ds::Error(ds::ErrorCode::BadConfig, "gamma list must be sorted ascending");
    }
}

struct CommonOpts {
    std::string data_path;
    std::string out_path;
    std::string format = "json";
    std::string config_path;
    double alpha = 0.1;
    std::string q_covariates = "none";
    std::string weights = "size";
    double lp_tol = 1e-9;
    ds::BoxOptions box;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool wants_data = true) {
    if (wants_data) cmd->add_option("data", o.data_path, "input CSV")->required();
    cmd->add_option("--out", o.out_path, "output path (default: stdout)");
    cmd->add_option("--format", o.format, "json|csv")->check(CLI::IsMember({"json", "csv"}));
    cmd->add_option("--config", o.config_path, "key=value config file");
    cmd->add_option("--alpha", o.alpha, "significance level");
    cmd->add_option("--q-covariates", o.q_covariates, "variance design: none|means")
        ->check(CLI::IsMember({"none", "means"}));
    cmd->add_option("--weights", o.weights, "set weights: size|unit")
        ->check(CLI::IsMember({"size", "unit"}));
}

void apply_common_config(const CommonOpts& o, double* lp_tol, ds::BoxOptions* box) {
    if (o.config_path.empty()) return;
    for (const auto& [key, val] : read_config(o.config_path)) {
        if (key == "lp.tol" && lp_tol) *lp_tol = to_double(key, val);
        else if (key == "box.tol" && box) box->tol = to_double(key, val);
        else if (key == "box.random_starts" && box)
            box->random_starts = static_cast<int>(to_long(key, val));
        else if (key == "box.max_iterations" && box)
            box->max_iterations = static_cast<int>(to_long(key, val));
        else
            throw ds::Error(ds::ErrorCode::BadConfig, "unknown config key '" + key + "'");
    }
}

ds::QDesign q_design_of(const CommonOpts& o) {
    return o.q_covariates == "means" ? ds::QDesign::InterceptPlusCovariateMeans
                                     : ds::QDesign::InterceptOnly;
}

ds::VarianceWeights weights_of(const CommonOpts& o) {
    return o.weights == "unit" ? ds::VarianceWeights::Unit : ds::VarianceWeights::SampleSize;
}

struct StatOpts {
    std::string name = "perm-t";
    std::string rank_scope = "global";
    std::string q1_scores, q2_scores;
};

void add_stat(CLI::App* cmd, StatOpts& s) {
    cmd->add_option("--statistic", s.name, "perm-t|wilcoxon|double-rank|custom")
        ->check(CLI::IsMember({"perm-t", "wilcoxon", "double-rank", "custom"}));
    cmd->add_option("--rank-scope", s.rank_scope, "dose-rank scope: global|within-set")
        ->check(CLI::IsMember({"global", "within-set"}));
    cmd->add_option("--q1-scores", s.q1_scores, "custom dose score CSV (value,score)");
    cmd->add_option("--q2-scores", s.q2_scores, "custom outcome score CSV (value,score)");
}

ds::StatisticSpec stat_spec_of(const StatOpts& s) {
    ds::StatisticSpec spec;
    spec.kind = parse_statistic_kind(s.name);
    spec.dose_rank_scope =
        s.rank_scope == "within-set" ? ds::RankScope::WithinSet : ds::RankScope::Global;
    if (spec.kind == ds::StatisticKind::Custom) {
        if (s.q1_scores.empty() || s.q2_scores.empty())
            throw ds::Error(ds::ErrorCode::BadConfig,
                            "--statistic custom needs --q1-scores and --q2-scores");
        spec.custom_q1 = read_score_csv(s.q1_scores);
        spec.custom_q2 = read_score_csv(s.q2_scores);
    }
    return spec;
}

struct EstimandOpts {
    std::string kind = "tsate";
    double lambda0 = 0.0;
    double threshold = 0.5;
    std::string contrast = "above";
    std::string on_degenerate = "error";
};

void add_estimand(CLI::App* cmd, EstimandOpts& e) {
    cmd->add_option("--estimand", e.kind, "sate|effect-ratio|tsate|avg-slope|stochastic")
        ->check(CLI::IsMember({"sate", "effect-ratio", "tsate", "avg-slope", "stochastic"}));
    cmd->add_option("--lambda0", e.lambda0, "effect-ratio null slope");
    cmd->add_option("--threshold", e.threshold, "dose threshold c");
    cmd->add_option("--contrast", e.contrast, "stochastic contrast side: above|below")
        ->check(CLI::IsMember({"above", "below"}));
    cmd->add_option("--on-degenerate", e.on_degenerate, "degenerate sets: error|drop")
        ->check(CLI::IsMember({"error", "drop"}));
}

ds::EstimandParams estimand_of(const EstimandOpts& e) {
    ds::EstimandParams p;
    if (e.kind == "sate") p.kind = ds::EstimandKind::Sate;
    else if (e.kind == "effect-ratio") p.kind = ds::EstimandKind::EffectRatio;
    else if (e.kind == "tsate") p.kind = ds::EstimandKind::Tsate;
    else if (e.kind == "avg-slope") p.kind = ds::EstimandKind::AvgSlope;
    else p.kind = ds::EstimandKind::StochasticContrast;
    p.lambda0 = e.lambda0;
    p.threshold = e.threshold;
    p.contrast = e.contrast == "below" ? ds::ContrastKind::BelowC : ds::ContrastKind::AboveC;
    p.on_degenerate =
        e.on_degenerate == "drop" ? ds::DegeneratePolicy::Drop : ds::DegeneratePolicy::Error;
    return p;
}

json estimand_json(const EstimandOpts& e) {
    return json{{"kind", e.kind},
                {"lambda0", e.lambda0},
                {"threshold", e.threshold},
                {"contrast", e.contrast},
                {"on_degenerate", e.on_degenerate}};
}

// --- sharp-test ------------------------------------------------------------

int run_sharp(const CommonOpts& common, const StatOpts& statopts, std::vector<double> gammas) {
    if (gammas.empty()) gammas.push_back(1.0);
    check_gammas(gammas);
    CommonOpts o = common;
    apply_common_config(o, &o.lp_tol, nullptr);

    ds::MatchedDataset data = ds::load_dataset(o.data_path);
    ds::CompiledStatistic stat = ds::build_statistic(stat_spec_of(statopts), data);

    json cfg{{"gammas", gammas},        {"statistic", statopts.name},
             {"rank_scope", statopts.rank_scope}, {"alpha", o.alpha},
             {"q_covariates", o.q_covariates},    {"weights", o.weights},
             {"lp_tol", o.lp_tol}};
    json report;
    report["manifest"] = ds::make_manifest("sharp-test", cfg, o.data_path, 0);

    json rows = json::array();
    std::optional<double> crossing;
    std::vector<ds::SharpResult> results;
    for (double G : gammas) {
        ds::SharpOptions opts;
        opts.gamma = gamma_to_log(G);
        opts.q_design = q_design_of(o);
        opts.weights = weights_of(o);
        opts.lp_tol = o.lp_tol;
        ds::SharpResult r = ds::sharp_analysis(data, stat, opts);
        results.push_back(r);
        if (!crossing && r.p_bound > o.alpha) crossing = G;
        json row{{"gamma", G},       {"T", r.T},   {"V_F", r.V_F},
                 {"S", r.S},         {"S2", r.S2}, {"p_bound", r.p_bound},
                 {"reject", r.p_bound <= o.alpha}};
        rows.push_back(row);
    }
    if (gammas.size() == 1) {
        const ds::SharpResult& r = results.front();
        report["gamma"] = gammas[0];
        report["T"] = r.T;
        report["V_F"] = r.V_F;
        report["S"] = r.S;
        report["S2"] = r.S2;
        report["p_bound"] = r.p_bound;
        json per_set = json::array();
        for (int i = 0; i < data.num_sets(); ++i)
            per_set.push_back(json{{"set_id", data.sets[i].set_id},
                                   {"t_obs", r.t_observed[i]},
                                   {"mu_star", r.mu_star[i]}});
        report["per_set"] = per_set;
    } else {
        report["rows"] = rows;
        report["crossing_gamma"] = crossing ? json(*crossing) : json(nullptr);
    }

    if (o.format == "csv") {
        std::ostringstream csv;
        csv << "gamma,p_value\n";
        for (std::size_t i = 0; i < gammas.size(); ++i)
            csv << sig6(gammas[i]) << "," << sig6(results[i].p_bound) << "\n";
        ds::emit_text(csv.str(), o.out_path);
    } else {
        ds::emit_report(report, o.out_path);
    }
    return 0;
}

// --- estimate ---------------------------------------------------------------

int run_estimate(const CommonOpts& common, const EstimandOpts& eopts) {
    CommonOpts o = common;
    apply_common_config(o, nullptr, nullptr);
    ds::MatchedDataset data = ds::load_dataset(o.data_path);
    ds::EstimandSpec spec = ds::build_estimand(estimand_of(eopts), data);
    ds::VnResult vn = ds::v_n(data, spec);

    ds::WeakOptions wopts;
    wopts.gamma = 0.0;
    wopts.theta0 = vn.V_N;
    wopts.alpha = o.alpha;
    wopts.q_design = q_design_of(o);
    wopts.weights = weights_of(o);
    ds::WeakResult r = ds::weak_test(data, spec, wopts);
    ds::ConfidenceInterval ci = ds::ci_invert(data, spec, wopts);

    json cfg{{"estimand", estimand_json(eopts)},
             {"alpha", o.alpha},
             {"q_covariates", o.q_covariates},
             {"weights", o.weights}};
    json report;
    report["manifest"] = ds::make_manifest("estimate", cfg, o.data_path, 0);
    report["V_N"] = vn.V_N;
    report["S_N"] = r.S_N;
    report["ci_lower"] = ci.lower;
    report["ci_upper"] = ci.upper;
    json per_set = json::array();
    for (std::size_t k = 0; k < spec.set_indices.size(); ++k)
        per_set.push_back(json{{"set_id", data.sets[spec.set_indices[k]].set_id},
                               {"V_N_i", vn.per_set[k]}});
    report["per_set"] = per_set;
    json dropped = json::array();
    for (int i : spec.dropped_sets) dropped.push_back(data.sets[i].set_id);
    report["dropped_sets"] = dropped;
    ds::emit_report(report, o.out_path);
    return 0;
}

// --- weak-test ---------------------------------------------------------------

json sens_json(const ds::SetSensitivity& s) {
    return json{{"l", s.l}, {"h", s.h}, {"gamma_star", s.gamma_star}, {"gamma_p", s.gamma_p}};
}

int run_weak(const CommonOpts& common, const EstimandOpts& eopts, double Gamma, double theta0,
             const std::string& method, const std::string& side) {
    CommonOpts o = common;
    apply_common_config(o, nullptr, &o.box);

    ds::MatchedDataset data = ds::load_dataset(o.data_path);
    ds::EstimandSpec spec = ds::build_estimand(estimand_of(eopts), data);

    ds::WeakOptions wopts;
    wopts.gamma = gamma_to_log(Gamma);
    wopts.theta0 = theta0;
    wopts.method = method == "vn" ? ds::WeakMethod::VN : ds::WeakMethod::VC;
    wopts.side = side == "less" ? ds::TestSide::Less : ds::TestSide::Greater;
    wopts.alpha = o.alpha;
    wopts.q_design = q_design_of(o);
    wopts.weights = weights_of(o);
    wopts.box = o.box;
    ds::WeakResult r = ds::weak_test(data, spec, wopts);

    json cfg{{"estimand", estimand_json(eopts)}, {"gamma", Gamma},   {"theta0", theta0},
             {"method", method},                 {"side", side},     {"alpha", o.alpha},
             {"q_covariates", o.q_covariates},   {"weights", o.weights}};
    json report;
    report["manifest"] = ds::make_manifest("weak-test", cfg, o.data_path, 0);
    report["gamma"] = Gamma;
    report["theta0"] = theta0;
    report["method"] = method;
    report["V_N"] = r.V_N;
    report["S_N"] = r.S_N;
    report["V_bounded"] = r.V_bounded;
    report["S_bounded"] = r.S_bounded;
    report["p_bound"] = r.p_bound;
    report["reject"] = r.p_bound <= o.alpha;
    report["condition1_assumed"] = r.condition1_assumed;
    json per_set = json::array();
    for (std::size_t k = 0; k < spec.set_indices.size(); ++k) {
        json row{{"set_id", data.sets[spec.set_indices[k]].set_id},
                 {"v_bounded", r.per_set_v[k]}};
        row.update(sens_json(r.per_set_sens[k]));
        per_set.push_back(row);
    }
    report["per_set"] = per_set;
    ds::emit_report(report, o.out_path);
    return 0;
}

// --- ci -----------------------------------------------------------------------

int run_ci(const CommonOpts& common, const EstimandOpts& eopts, std::vector<double> gammas,
           double theta0, const std::string& method) {
    if (gammas.empty()) gammas.push_back(1.0);
    check_gammas(gammas);
    CommonOpts o = common;
    apply_common_config(o, nullptr, &o.box);

    ds::MatchedDataset data = ds::load_dataset(o.data_path);
    ds::EstimandSpec spec = ds::build_estimand(estimand_of(eopts), data);

    json cfg{{"estimand", estimand_json(eopts)},
             {"gammas", gammas},
             {"theta0", theta0},
             {"method", method},
             {"alpha", o.alpha},
             {"q_covariates", o.q_covariates},
             {"weights", o.weights}};
    json report;
    report["manifest"] = ds::make_manifest("ci", cfg, o.data_path, 0);

    json rows = json::array();
    std::ostringstream csv;
    csv << "gamma,lower,upper,p_value\n";
    std::optional<double> crossing;
    for (double G : gammas) {
        ds::WeakOptions wopts;
        wopts.gamma = gamma_to_log(G);
        wopts.theta0 = theta0;
        wopts.method = method == "vn" ? ds::WeakMethod::VN : ds::WeakMethod::VC;
        wopts.alpha = o.alpha;
        wopts.q_design = q_design_of(o);
        wopts.weights = weights_of(o);
        wopts.box = o.box;
        ds::ConfidenceInterval ci = ds::ci_invert(data, spec, wopts);
        ds::WeakResult test = ds::weak_test(data, spec, wopts);
        if (!crossing && test.p_bound > o.alpha) crossing = G;
        rows.push_back(json{{"gamma", G},
                            {"lower", ci.lower},
                            {"upper", ci.upper},
                            {"p_value", test.p_bound},
                            {"grid_fallback", ci.grid_fallback}});
        csv << sig6(G) << "," << sig6(ci.lower) << "," << sig6(ci.upper) << ","
            << sig6(test.p_bound) << "\n";
    }
    report["rows"] = rows;
    report["crossing_gamma"] = crossing ? json(*crossing) : json(nullptr);

    if (o.format == "csv") ds::emit_text(csv.str(), o.out_path);
    else ds::emit_report(report, o.out_path);
    return 0;
}

// --- simulate -------------------------------------------------------------------

ds::SimConfig sim_config_from(const std::map<std::string, std::string>& kv) {
    ds::SimConfig cfg;
    for (const auto& [key, val] : kv) {
        if (key == "protocol") {
            if (val == "sharp") cfg.protocol = ds::SimProtocol::Sharp;
            else if (val == "weak") cfg.protocol = ds::SimProtocol::Weak;
            else throw ds::Error(ds::ErrorCode::BadConfig, "protocol must be sharp|weak");
        } else if (key == "num_sets") cfg.num_sets = static_cast<int>(to_long(key, val));
        else if (key == "reps") cfg.reps = static_cast<int>(to_long(key, val));
        else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(to_long(key, val));
        else if (key == "gamma") cfg.gamma = gamma_to_log(to_double(key, val));
        else if (key == "alpha") cfg.alpha = to_double(key, val);
        else if (key == "size_poisson_rate") cfg.size_poisson_rate = to_double(key, val);
        else if (key == "max_set_size") cfg.max_set_size = static_cast<int>(to_long(key, val));
        else if (key == "dose_law") cfg.dose_law = ds::parse_dist(val);
        else if (key == "outcome_law") cfg.outcome_law = ds::parse_dist(val);
        else if (key == "statistic") cfg.statistic.kind = parse_statistic_kind(val);
        else if (key == "effect_law") cfg.effect_law = ds::parse_dist(val);
        else if (key == "noise_min_dose_law") cfg.noise_min_dose_law = ds::parse_dist(val);
        else if (key == "noise_law") cfg.noise_law = ds::parse_dist(val);
        else if (key == "b_sign") cfg.b_sign = to_double(key, val);
        else if (key == "threshold") cfg.threshold = to_double(key, val);
        else if (key == "max_redraws") cfg.max_redraws = to_long(key, val);
        else if (key == "box.tol") cfg.box.tol = to_double(key, val);
        else if (key == "box.max_iterations")
            cfg.box.max_iterations = static_cast<int>(to_long(key, val));
        else if (key == "box.random_starts")
            cfg.box.random_starts = static_cast<int>(to_long(key, val));
        else if (key == "keep_reps") cfg.keep_reps = (val == "true" || val == "1");
        else throw ds::Error(ds::ErrorCode::BadConfig, "unknown sim config key '" + key + "'");
    }
    return cfg;
}

json sim_config_json(const ds::SimConfig& c) {
    return json{{"protocol", c.protocol == ds::SimProtocol::Sharp ? "sharp" : "weak"},
                {"num_sets", c.num_sets},
                {"reps", c.reps},
                {"seed", c.seed},
                {"gamma", std::exp(c.gamma)},
                {"alpha", c.alpha},
                {"size_poisson_rate", c.size_poisson_rate},
                {"max_set_size", c.max_set_size},
                {"dose_law", ds::dist_to_string(c.dose_law)},
                {"outcome_law", ds::dist_to_string(c.outcome_law)},
                {"effect_law", ds::dist_to_string(c.effect_law)},
                {"noise_min_dose_law", ds::dist_to_string(c.noise_min_dose_law)},
                {"noise_law", ds::dist_to_string(c.noise_law)},
                {"b_sign", c.b_sign},
                {"threshold", c.threshold},
                {"box_tol", c.box.tol},
                {"box_max_iterations", c.box.max_iterations},
                {"box_random_starts", c.box.random_starts},
                {"keep_reps", c.keep_reps}};
}

int run_simulate(const std::string& config_path, std::optional<long> reps,
                 std::optional<long> seed, bool keep_reps, const std::string& out_path) {
    ds::SimConfig cfg = sim_config_from(read_config(config_path));
    if (reps) cfg.reps = static_cast<int>(*reps);
    if (seed) cfg.seed = static_cast<std::uint64_t>(*seed);
    if (keep_reps) cfg.keep_reps = true;

    ds::SimReport rep = ds::run_sim(cfg);

    json report;
    report["manifest"] =
        ds::make_manifest("simulate", sim_config_json(cfg), config_path, cfg.seed);
    json methods = json::array();
    for (const auto& m : rep.methods)
        methods.push_back(json{{"name", m.name},
                               {"rejection_rate", m.rejection_rate},
                               {"rejection_se", m.rejection_se},
                               {"mean_bias", m.mean_bias},
                               {"sd", m.sd},
                               {"mean_est_sd", m.mean_est_sd}});
    report["methods"] = methods;
    if (cfg.keep_reps) {
        json recs = json::array();
        for (const auto& per_method : rep.records) {
            json rows = json::array();
            for (const auto& r : per_method)
                rows.push_back(json{{"value", r.value},
                                    {"est_sd", r.est_sd},
                                    {"p", r.p},
                                    {"reject", r.reject}});
            recs.push_back(rows);
        }
        report["records"] = recs;
    }
    ds::emit_report(report, out_path);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Randomization inference and dose sensitivity analysis for matched sets"};
    app.require_subcommand(1);

    CommonOpts sharp_common;
    StatOpts sharp_stat;
    std::vector<double> sharp_gammas;
    double sharp_gamma = 1.0;
    auto* sharp = app.add_subcommand("sharp-test", "sharp-null bounding p-value");
    add_common(sharp, sharp_common);
    add_stat(sharp, sharp_stat);
    auto* sg = sharp->add_option("--gamma", sharp_gamma, "sensitivity parameter (>= 1)");
    auto* sgs =
        sharp->add_option("--gammas", sharp_gammas, "ascending gamma grid")->delimiter(',');

    CommonOpts est_common;
    EstimandOpts est_estimand;
    auto* est = app.add_subcommand("estimate", "point estimate and closed-form CI");
    add_common(est, est_common);
    add_estimand(est, est_estimand);

    CommonOpts weak_common;
    EstimandOpts weak_estimand;
    double weak_gamma = 1.0, weak_theta0 = 0.0;
    std::string weak_method = "vc", weak_side = "greater";
    auto* weak = app.add_subcommand("weak-test", "bounding test for a weak null");
    add_common(weak, weak_common);
    add_estimand(weak, weak_estimand);
    weak->add_option("--gamma", weak_gamma, "sensitivity parameter (>= 1)");
    weak->add_option("--theta0", weak_theta0, "null value");
    weak->add_option("--method", weak_method, "vc|vn")->check(CLI::IsMember({"vc", "vn"}));
    weak->add_option("--side", weak_side, "greater|less")
        ->check(CLI::IsMember({"greater", "less"}));

    CommonOpts ci_common;
    EstimandOpts ci_estimand;
    std::vector<double> ci_gammas;
    double ci_gamma = 1.0, ci_theta0 = 0.0;
    std::string ci_method = "vc";
    auto* ci = app.add_subcommand("ci", "confidence interval by test inversion");
    add_common(ci, ci_common);
    add_estimand(ci, ci_estimand);
    auto* cg = ci->add_option("--gamma", ci_gamma, "sensitivity parameter (>= 1)");
    auto* cgs = ci->add_option("--gammas", ci_gammas, "ascending gamma grid")->delimiter(',');
    ci->add_option("--theta0", ci_theta0, "null value for the reported p-value");
    ci->add_option("--method", ci_method, "vc|vn")->check(CLI::IsMember({"vc", "vn"}));

    std::string sim_config, sim_out;
    std::optional<long> sim_reps, sim_seed;
    long sim_reps_raw = -1, sim_seed_raw = -1;
    bool sim_keep = false;
    auto* sim = app.add_subcommand("simulate", "Monte Carlo size study");
    sim->add_option("--config", sim_config, "sim config file")->required();
    auto* sr = sim->add_option("--reps", sim_reps_raw, "replicates (overrides config)");
    auto* ss = sim->add_option("--seed", sim_seed_raw, "seed (overrides config)");
    sim->add_flag("--keep-reps", sim_keep, "include per-rep records");
    sim->add_option("--out", sim_out, "output path (default: stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sharp->parsed()) {
            std::vector<double> gammas = sharp_gammas;
            if (gammas.empty() && sg->count() > 0) gammas.push_back(sharp_gamma);
            (void)sgs;
            return run_sharp(sharp_common, sharp_stat, gammas);
        }
        if (est->parsed()) return run_estimate(est_common, est_estimand);
        if (weak->parsed())
            return run_weak(weak_common, weak_estimand, weak_gamma, weak_theta0, weak_method,
                            weak_side);
        if (ci->parsed()) {
            std::vector<double> gammas = ci_gammas;
            if (gammas.empty() && cg->count() > 0) gammas.push_back(ci_gamma);
            (void)cgs;
            return run_ci(ci_common, ci_estimand, gammas, ci_theta0, ci_method);
        }
        if (sim->parsed()) {
            if (sr->count() > 0) sim_reps = sim_reps_raw;
            if (ss->count() > 0) sim_seed = sim_seed_raw;
            return run_simulate(sim_config, sim_reps, sim_seed, sim_keep, sim_out);
        }
    } catch (const ds::Error& e) {
        json err{{"error", ds::error_code_name(e.code())}, {"message", e.what()}};
        std::cerr << err.dump() << "\n";
        return e.code() == ds::ErrorCode::IoError ? 2 : 1;
    } catch (const std::exception& e) {
        json err{{"error", "Internal"}, {"message", e.what()}};
        std::cerr << err.dump() << "\n";
        return 1;
    }
    return 0;
}
