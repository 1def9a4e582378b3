#include "dosesens/variance.hpp"

#include <cmath>

namespace dosesens {

Eigen::MatrixXd build_design(const MatchedDataset& dataset, QDesign design) {
    const int I = dataset.num_sets();
    int L = 1;
    if (design == QDesign::InterceptPlusCovariateMeans) L += dataset.covariate_dim;
    Eigen::MatrixXd Q(I, L);
    Q.col(0).setOnes();
    if (design == QDesign::InterceptPlusCovariateMeans) {
        for (int i = 0; i < I; ++i) {
            const MatchedSet& s = dataset.sets[i];
            for (int k = 0; k < dataset.covariate_dim; ++k) {
                double mean = 0.0;
                for (const auto& x : s.covariates) mean += x[k];
                Q(i, 1 + k) = mean / s.size();
            }
        }
    }
    return Q;
}

Eigen::MatrixXd hat_matrix(const Eigen::MatrixXd& Q) {
    const Eigen::Index I = Q.rows(), L = Q.cols();
    if (L >= I) throw Error(ErrorCode::RankDeficientQ, "Q must have fewer columns than rows");
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Q);
    qr.setThreshold(1e-10);
    if (qr.rank() < L) throw Error(ErrorCode::RankDeficientQ, "Q is rank deficient");
    // H = Q (Q'Q)^{-1} Q' via the thin-Q factor.
    Eigen::MatrixXd thinQ = qr.householderQ() * Eigen::MatrixXd::Identity(I, L);
    return thinQ * thinQ.transpose();
}

std::vector<double> default_weights(const MatchedDataset& dataset) {
    const double I = dataset.num_sets();
    const double N = dataset.total_units();
    std::vector<double> w;
    w.reserve(dataset.sets.size());
    for (const auto& s : dataset.sets) w.push_back(I * s.size() / N);
    return w;
}

double variance_estimate(const std::vector<double>& values, const std::vector<double>& weights,
                         const Eigen::MatrixXd& Q) {
    const Eigen::Index I = Q.rows();
    if (static_cast<Eigen::Index>(values.size()) != I ||
        static_cast<Eigen::Index>(weights.size()) != I)
        throw Error(ErrorCode::BadConfig, "values/weights length must equal the number of sets");
    if (I < 2) throw Error(ErrorCode::TooFewSets, "variance estimation needs at least 2 sets");

    Eigen::MatrixXd H = hat_matrix(Q);
    Eigen::VectorXd y(I);
    for (Eigen::Index i = 0; i < I; ++i) {
        double h = H(i, i);
        if (h >= 1.0 - 1e-12)
            throw Error(ErrorCode::LeverageOne, "leverage h_ii = 1 for set " + std::to_string(i));
        y(i) = values[i] / std::sqrt(1.0 - h);
    }
    Eigen::VectorXd wy(I);
    for (Eigen::Index i = 0; i < I; ++i) wy(i) = weights[i] * y(i);
    double s2 = (wy.dot(wy) - wy.dot(H * wy)) / static_cast<double>(I * I);
    return s2 > 0.0 ? s2 : 0.0;
}

}  // namespace dosesens
