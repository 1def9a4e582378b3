#pragma once

#include <vector>

#include "dosesens/box.hpp"
#include "dosesens/dataset.hpp"

namespace dosesens {

/// Dose-assignment probabilities within one matched set under the biased
/// model p_pi(u) proportional to exp(gamma * z_pi . u), where z_pi permutes
/// the dose order statistics and u lies in [0,1]^n.
class PermModel {
  public:
    PermModel(std::vector<double> sorted_doses, double gamma, const PermutationTable& perms);

    int n() const { return n_; }
    int num_perms() const { return static_cast<int>(dose_rows_.size()); }
    double gamma() const { return gamma_; }

    /// Categorical distribution over permutations at confounder vector u.
    std::vector<double> probabilities(const std::vector<double>& u) const;

    /// E_u[v] = sum_pi p_pi(u) v_pi and its gradient in u.
    double expectation(const std::vector<double>& u, const std::vector<double>& v) const;
    void expectation_grad(const std::vector<double>& u, const std::vector<double>& v,
                          std::vector<double>& grad) const;

    /// p_identity(u) = probability of the identity permutation; the min/max
    /// of this over the box give l_{Gamma,i} and h_{Gamma,i}.
    double identity_prob(const std::vector<double>& u) const;
    void identity_prob_grad(const std::vector<double>& u, std::vector<double>& grad) const;

    BoxProblem expectation_problem(const std::vector<double>& v, OptSense sense) const;
    BoxProblem identity_prob_problem(OptSense sense) const;

  private:
    int n_;
    double gamma_;
    std::vector<std::vector<double>> dose_rows_;  // dose_rows_[p][j] = z_(pi_p(j))
};

}  // namespace dosesens
