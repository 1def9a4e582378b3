#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dosesens/statistic.hpp"
#include "dosesens/weak.hpp"

namespace dosesens {

/// A scalar sampling law: optional sign flip and shift around a base
/// distribution, e.g. "exp(1)-1" or "-exp(0.2)+5".
struct DistSpec {
    enum class Kind { Uniform01, Beta, Normal, Exponential, Constant };
    Kind kind = Kind::Uniform01;
    double p1 = 0.0, p2 = 1.0;  // beta(a,b), normal(mu,sd), exp(rate), constant(v)
    double sign = 1.0;
    double shift = 0.0;

    template <typename Rng>
    double sample(Rng& rng) const {
        double x = 0.0;
        switch (kind) {
            case Kind::Uniform01: {
                std::uniform_real_distribution<double> d(0.0, 1.0);
                x = d(rng);
                break;
            }
            case Kind::Beta: {
                std::gamma_distribution<double> ga(p1, 1.0), gb(p2, 1.0);
                double a = ga(rng), b = gb(rng);
                x = a / (a + b);
                break;
            }
            case Kind::Normal: {
                std::normal_distribution<double> d(p1, p2);
                x = d(rng);
                break;
            }
            case Kind::Exponential: {
                std::exponential_distribution<double> d(p1);
                x = d(rng);
                break;
            }
            case Kind::Constant:
                x = p1;
                break;
        }
        return sign * x + shift;
    }
};

DistSpec parse_dist(const std::string& text);
std::string dist_to_string(const DistSpec& dist);

enum class SimProtocol { Sharp, Weak };

struct SimConfig {
    SimProtocol protocol = SimProtocol::Sharp;
    int num_sets = 400;
    int reps = 100;
    std::uint64_t seed = 1;
    double gamma = 0.0;  // log scale
    double alpha = 0.1;

    // Set sizes: min(2 + Poisson(size_poisson_rate), max_set_size).
    double size_poisson_rate = 0.6;
    int max_set_size = 4;

    DistSpec dose_law;              // F_z
    DistSpec outcome_law;           // F_eps (sharp protocol outcome)
    StatisticSpec statistic;        // sharp protocol

    // Weak protocol.
    DistSpec effect_law;            // F_beta
    DistSpec noise_min_dose_law;    // F_eps0 (order position 1)
    DistSpec noise_law;             // F_eps (other positions)
    double b_sign = 1.0;            // +1 or -1 multiplier on B_i
    double threshold = 0.5;
    long max_redraws = 100000;

    BoxOptions box{1e-8, 300, 2, true, 0};
    bool keep_reps = false;
};

struct MethodStats {
    std::string name;
    double rejection_rate = 0.0;
    double rejection_se = 0.0;
    double mean_bias = 0.0;
    double sd = 0.0;
    double mean_est_sd = 0.0;
};

struct RepRecord {
    double value = 0.0;   // V_F or the bounded weak statistic
    double est_sd = 0.0;
    double p = 1.0;
    bool reject = false;
};

struct SimReport {
    SimConfig config;
    std::vector<MethodStats> methods;
    std::vector<std::vector<RepRecord>> records;  // [method][rep], kept when keep_reps
};

/// Worst-case confounder for one set: maximizes sum_pi p_pi(u) v_pi over the
/// box; returns the maximizer and the induced assignment distribution.
struct WorstCaseU {
    std::vector<double> u;
    std::vector<double> probabilities;
    double expectation = 0.0;
};

WorstCaseU worst_case_u(const std::vector<double>& sorted_doses, const std::vector<double>& values,
                        double gamma, const BoxOptions& box, int cap = kMaxEnumerationCap);

SimReport run_sharp_sim(const SimConfig& config);
SimReport run_weak_sim(const SimConfig& config);
SimReport run_sim(const SimConfig& config);

}  // namespace dosesens
