#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "dosesens/error.hpp"

namespace dosesens {

enum class OptSense { Minimize, Maximize };

/// Smooth objective on the unit box [0,1]^n.
struct BoxProblem {
    int n = 0;
    std::function<double(const std::vector<double>&)> f;
    std::function<void(const std::vector<double>&, std::vector<double>&)> grad;
    OptSense sense = OptSense::Maximize;
};

struct BoxOptions {
    double tol = 1e-10;            // projected-gradient norm threshold
    int max_iterations = 10000;    // per start
    int random_starts = 20;
    bool vertex_starts = true;     // include all 2^n box vertices
    std::uint64_t seed = 0;
};

struct BoxResult {
    double value = 0.0;
    std::vector<double> u;
};

/// Multi-start projected gradient with Armijo backtracking. Starts from all
/// box vertices plus seeded random interior points and keeps the best local
/// optimum. The returned point lies in [0,1]^n exactly.
BoxResult box_optimize(const BoxProblem& problem, const BoxOptions& options = BoxOptions{});

}  // namespace dosesens
