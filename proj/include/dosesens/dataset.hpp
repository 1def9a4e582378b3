#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "dosesens/error.hpp"

namespace dosesens {

/// One matched set: doses and outcomes in file order, optional covariates.
struct MatchedSet {
    std::string set_id;
    std::vector<double> doses;
    std::vector<double> outcomes;
    std::vector<std::vector<double>> covariates;  // empty if K == 0

    int size() const { return static_cast<int>(doses.size()); }
};

struct MatchedDataset {
    std::vector<MatchedSet> sets;
    int covariate_dim = 0;

    int num_sets() const { return static_cast<int>(sets.size()); }
    int total_units() const;

    void validate() const;
};

/// Column mapping for CSV ingestion; covariate_columns may be empty.
struct CsvSchema {
    std::string set_id = "set_id";
    std::string unit_id = "unit_id";
    std::string dose = "dose";
    std::string outcome = "outcome";
    std::vector<std::string> covariates;  // empty: auto-detect x1..xK
};

MatchedDataset load_dataset(const std::string& path, const CsvSchema& schema = CsvSchema{});
MatchedDataset parse_dataset_csv(const std::string& csv_text, const CsvSchema& schema = CsvSchema{});

/// Order positions k(j), 1-based: doses[j] is the k(j)-th smallest dose in the
/// set, ties broken by unit index (stable sort).
std::vector<int> order_index(const MatchedSet& set);

/// Doses sorted ascending (the order statistics z_(1..n)).
std::vector<double> sorted_doses(const MatchedSet& set);

constexpr int kDefaultEnumerationCap = 5;
constexpr int kMaxEnumerationCap = 6;

std::int64_t factorial(int n);

/// All n! permutations of {0..n-1} in lexicographic order. Each permutation
/// pi assigns dose order position pi[j] to unit slot j.
struct PermutationTable {
    int n = 0;
    std::vector<std::vector<int>> perms;
};

PermutationTable enumerate_assignments(int n, int cap = kDefaultEnumerationCap);

/// Draws one index from a categorical distribution over permutations.
/// Weights must be nonnegative and sum to 1 within 1e-9.
int sample_assignment(const std::vector<double>& weights, std::uint64_t rng_seed);

template <typename Rng>
int sample_categorical(const std::vector<double>& weights, Rng& rng) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double u = unif(rng);
    double acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        acc += weights[i];
        if (u <= acc) return static_cast<int>(i);
    }
    return static_cast<int>(weights.size()) - 1;
}

}  // namespace dosesens
