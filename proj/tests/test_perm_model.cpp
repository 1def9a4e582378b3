#include <doctest.h>

#include <cmath>
#include <random>

#include "dosesens/perm_model.hpp"

using namespace dosesens;

namespace {

// Central finite-difference check of grad against f, relative 1e-5 at h=1e-6.
void check_gradient(const std::function<double(const std::vector<double>&)>& f,
                    const std::function<void(const std::vector<double>&, std::vector<double>&)>& grad,
                    const std::vector<double>& u) {
    const double h = 1e-6;
    std::vector<double> g;
    grad(u, g);
    for (std::size_t j = 0; j < u.size(); ++j) {
        std::vector<double> up = u, dn = u;
        up[j] += h;
        dn[j] -= h;
        double fd = (f(up) - f(dn)) / (2.0 * h);
        double scale = std::max({1e-8, std::abs(fd), std::abs(g[j])});
        CHECK(std::abs(g[j] - fd) / scale <= 1e-5);
    }
}

}  // namespace

TEST_CASE("probabilities form a distribution; gamma = 0 is uniform") {
    PermutationTable perms = enumerate_assignments(3);
    PermModel model({0.1, 0.4, 0.9}, 0.0, perms);
    std::vector<double> u = {0.3, 0.8, 0.1};
    std::vector<double> p = model.probabilities(u);
    double sum = 0.0;
    for (double x : p) {
        CHECK(x == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
        sum += x;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("pair identity probability closed form") {
    PermutationTable perms = enumerate_assignments(2);
    double gamma = std::log(2.0);
    PermModel model({0.0, 1.0}, gamma, perms);
    // u = (0, 1): identity gets exp(gamma), swap exp(0).
    CHECK(model.identity_prob({0.0, 1.0}) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(model.identity_prob({1.0, 0.0}) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(model.identity_prob({0.5, 0.5}) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("expectation matches direct summation") {
    PermutationTable perms = enumerate_assignments(3);
    PermModel model({0.2, 0.5, 0.8}, 0.9, perms);
    std::vector<double> v = {1.0, 2.0, -1.0, 0.5, 3.0, -2.0};
    std::vector<double> u = {0.2, 0.9, 0.4};
    std::vector<double> p = model.probabilities(u);
    double direct = 0.0;
    for (std::size_t k = 0; k < v.size(); ++k) direct += p[k] * v[k];
    CHECK(model.expectation(u, v) == doctest::Approx(direct).epsilon(1e-12));
}

TEST_CASE("analytic gradients match central finite differences") {
    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> interior(0.05, 0.95);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int n : {2, 3, 4}) {
        std::vector<double> z(n);
        for (double& zz : z) zz = unif(rng);
        std::sort(z.begin(), z.end());
        PermutationTable perms = enumerate_assignments(n);
        PermModel model(z, 0.8, perms);
        std::vector<double> v(perms.perms.size());
        for (double& x : v) x = unif(rng) * 2.0 - 1.0;

        auto fe = [&](const std::vector<double>& u) { return model.expectation(u, v); };
        auto ge = [&](const std::vector<double>& u, std::vector<double>& g) {
            model.expectation_grad(u, v, g);
        };
        auto fi = [&](const std::vector<double>& u) { return model.identity_prob(u); };
        auto gi = [&](const std::vector<double>& u, std::vector<double>& g) {
            model.identity_prob_grad(u, g);
        };
        for (int pt = 0; pt < 25; ++pt) {
            std::vector<double> u(n);
            for (double& uu : u) uu = interior(rng);
            check_gradient(fe, ge, u);
            check_gradient(fi, gi, u);
        }
    }
}

TEST_CASE("large gamma does not overflow the softmax") {
    PermutationTable perms = enumerate_assignments(3);
    PermModel model({0.0, 500.0, 1000.0}, 2.0, perms);
    std::vector<double> p = model.probabilities({1.0, 1.0, 1.0});
    double sum = 0.0;
    for (double x : p) {
        CHECK(std::isfinite(x));
        sum += x;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
}
