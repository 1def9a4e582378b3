#include "dosesens/perm_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dosesens {

PermModel::PermModel(std::vector<double> sorted_doses, double gamma, const PermutationTable& perms)
    : n_(perms.n), gamma_(gamma) {
    dose_rows_.reserve(perms.perms.size());
    for (const auto& pi : perms.perms) {
        std::vector<double> row(n_);
        for (int j = 0; j < n_; ++j) row[j] = sorted_doses[pi[j]];
        dose_rows_.push_back(std::move(row));
    }
}

std::vector<double> PermModel::probabilities(const std::vector<double>& u) const {
    const std::size_t P = dose_rows_.size();
    std::vector<double> w(P);
    double max_e = -std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < P; ++p) {
        double e = 0.0;
        for (int j = 0; j < n_; ++j) e += dose_rows_[p][j] * u[j];
        w[p] = gamma_ * e;
        max_e = std::max(max_e, w[p]);
    }
    double denom = 0.0;
    for (std::size_t p = 0; p < P; ++p) {
        w[p] = std::exp(w[p] - max_e);
        denom += w[p];
    }
    for (std::size_t p = 0; p < P; ++p) w[p] /= denom;
    return w;
}

double PermModel::expectation(const std::vector<double>& u, const std::vector<double>& v) const {
    std::vector<double> w = probabilities(u);
    double e = 0.0;
    for (std::size_t p = 0; p < w.size(); ++p) e += w[p] * v[p];
    return e;
}

void PermModel::expectation_grad(const std::vector<double>& u, const std::vector<double>& v,
                                 std::vector<double>& grad) const {
    std::vector<double> w = probabilities(u);
    const std::size_t P = w.size();
    double ev = 0.0;
    for (std::size_t p = 0; p < P; ++p) ev += w[p] * v[p];
    grad.assign(n_, 0.0);
    std::vector<double> ez(n_, 0.0);
    for (std::size_t p = 0; p < P; ++p) {
        for (int j = 0; j < n_; ++j) {
            grad[j] += w[p] * v[p] * dose_rows_[p][j];
            ez[j] += w[p] * dose_rows_[p][j];
        }
    }
    for (int j = 0; j < n_; ++j) grad[j] = gamma_ * (grad[j] - ev * ez[j]);
}

double PermModel::identity_prob(const std::vector<double>& u) const {
    return probabilities(u)[0];
}

void PermModel::identity_prob_grad(const std::vector<double>& u, std::vector<double>& grad) const {
    std::vector<double> w = probabilities(u);
    grad.assign(n_, 0.0);
    std::vector<double> ez(n_, 0.0);
    for (std::size_t p = 0; p < w.size(); ++p)
        for (int j = 0; j < n_; ++j) ez[j] += w[p] * dose_rows_[p][j];
    for (int j = 0; j < n_; ++j) grad[j] = gamma_ * w[0] * (dose_rows_[0][j] - ez[j]);
}

BoxProblem PermModel::expectation_problem(const std::vector<double>& v, OptSense sense) const {
    BoxProblem prob;
    prob.n = n_;
    prob.sense = sense;
    prob.f = [this, v](const std::vector<double>& u) { return expectation(u, v); };
    prob.grad = [this, v](const std::vector<double>& u, std::vector<double>& g) {
        expectation_grad(u, v, g);
    };
    return prob;
}

BoxProblem PermModel::identity_prob_problem(OptSense sense) const {
    BoxProblem prob;
    prob.n = n_;
    prob.sense = sense;
    prob.f = [this](const std::vector<double>& u) { return identity_prob(u); };
    prob.grad = [this](const std::vector<double>& u, std::vector<double>& g) {
        identity_prob_grad(u, g);
    };
    return prob;
}

}  // namespace dosesens
