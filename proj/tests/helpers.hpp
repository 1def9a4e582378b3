#pragma once

#include <random>
#include <string>
#include <vector>

#include "dosesens/dataset.hpp"

namespace testutil {

/// Dataset from explicit per-set (doses, outcomes) in file order.
inline dosesens::MatchedDataset make_dataset(
    const std::vector<std::pair<std::vector<double>, std::vector<double>>>& sets) {
    dosesens::MatchedDataset ds;
    int id = 0;
    for (const auto& [doses, outcomes] : sets) {
        dosesens::MatchedSet set;
        set.set_id = "s" + std::to_string(id++);
        set.doses = doses;
        set.outcomes = outcomes;
        ds.sets.push_back(std::move(set));
    }
    ds.validate();
    return ds;
}

/// Random dataset with distinct doses, sizes in [min_n, max_n].
inline dosesens::MatchedDataset random_dataset(std::mt19937_64& rng, int num_sets, int min_n,
                                               int max_n, int covariate_dim = 0) {
    std::uniform_int_distribution<int> size_dist(min_n, max_n);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> norm(0.0, 1.0);
    dosesens::MatchedDataset ds;
    ds.covariate_dim = covariate_dim;
    for (int i = 0; i < num_sets; ++i) {
        dosesens::MatchedSet set;
        set.set_id = "r" + std::to_string(i);
        int n = size_dist(rng);
        for (int j = 0; j < n; ++j) {
            set.doses.push_back(unif(rng));
            set.outcomes.push_back(norm(rng));
            if (covariate_dim > 0) {
                std::vector<double> x(covariate_dim);
                for (double& v : x) v = norm(rng);
                set.covariates.push_back(std::move(x));
            }
        }
        ds.sets.push_back(std::move(set));
    }
    ds.validate();
    return ds;
}

}  // namespace testutil
