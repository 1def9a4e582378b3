#include "dosesens/box.hpp"

#include <algorithm>
#include <cmath>

#include "dosesens/rng.hpp"

namespace dosesens {

namespace {

double clamp01(double v) { return std::min(1.0, std::max(0.0, v)); }

// Gradient components pointing out of the box at an active bound are zeroed.
double projected_grad_norm(const std::vector<double>& u, const std::vector<double>& g) {
    double norm = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        double gi = g[i];
        if (u[i] <= 0.0 && gi < 0.0) gi = 0.0;
        if (u[i] >= 1.0 && gi > 0.0) gi = 0.0;
        norm = std::max(norm, std::abs(gi));
    }
    return norm;
}

}  // namespace

BoxResult box_optimize(const BoxProblem& problem, const BoxOptions& options) {
    const int n = problem.n;
    const double sense = problem.sense == OptSense::Maximize ? 1.0 : -1.0;

    auto value = [&](const std::vector<double>& u) {
        double v = problem.f(u);
        if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteObjective, "objective not finite");
        return sense * v;
    };

    std::vector<std::vector<double>> starts;
    if (options.vertex_starts) {
        for (std::uint64_t mask = 0; mask < (1ULL << n); ++mask) {
            std::vector<double> u(n);
            for (int i = 0; i < n; ++i) u[i] = (mask >> i) & 1 ? 1.0 : 0.0;
            starts.push_back(std::move(u));
        }
    }
    auto rng = make_engine(options.seed, 0x626f78);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int s = 0; s < options.random_starts; ++s) {
        std::vector<double> u(n);
        for (int i = 0; i < n; ++i) u[i] = unif(rng);
        starts.push_back(std::move(u));
    }
    if (starts.empty()) starts.push_back(std::vector<double>(n, 0.5));

    BoxResult best;
    bool have_best = false;
    std::vector<double> g(n), raw_g(n), trial(n);

    for (auto& u : starts) {
        double fu = value(u);
        double step = 1.0;
        for (int iter = 0; iter < options.max_iterations; ++iter) {
            problem.grad(u, raw_g);
            for (int i = 0; i < n; ++i) g[i] = sense * raw_g[i];
            if (projected_grad_norm(u, g) <= options.tol) break;

            // Armijo backtracking along the projected ascent direction.
            bool moved = false;
            double alpha = std::min(step * 2.0, 1e6);
            for (int bt = 0; bt < 60; ++bt) {
                double dir_dot = 0.0;
                for (int i = 0; i < n; ++i) {
                    trial[i] = clamp01(u[i] + alpha * g[i]);
                    dir_dot += g[i] * (trial[i] - u[i]);
                }
                double ft = value(trial);
                if (ft >= fu + 1e-4 * dir_dot && ft > fu) {
                    u = trial;
                    fu = ft;
                    step = alpha;
                    moved = true;
                    break;
                }
                alpha *= 0.5;
            }
            if (!moved) break;
        }
        if (!have_best || fu > sense * best.value) {
            best.value = sense * fu;
            best.u = u;
            have_best = true;
        }
    }
    return best;
}

}  // namespace dosesens
