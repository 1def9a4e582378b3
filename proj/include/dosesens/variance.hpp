#pragma once

#include <Eigen/Dense>
#include <vector>

#include "dosesens/dataset.hpp"

namespace dosesens {

enum class QDesign { InterceptOnly, InterceptPlusCovariateMeans };

/// I x L design used to covariate-adjust the conservative variance estimator.
/// First column is all ones; optional columns are per-set covariate means.
Eigen::MatrixXd build_design(const MatchedDataset& dataset, QDesign design);

/// H = Q (Q'Q)^{-1} Q'. Throws RankDeficientQ if Q is not full column rank
/// (pivot tolerance 1e-10) or L >= I.
Eigen::MatrixXd hat_matrix(const Eigen::MatrixXd& Q);

/// Default sampling weights w_i = I * n_i / N.
std::vector<double> default_weights(const MatchedDataset& dataset);

/// S^2 = I^{-2} y W (Id - H_Q) W y'  with  y_i = v_i / sqrt(1 - h_ii).
/// Negative values from roundoff are clamped to 0.
double variance_estimate(const std::vector<double>& values, const std::vector<double>& weights,
                         const Eigen::MatrixXd& Q);

}  // namespace dosesens
