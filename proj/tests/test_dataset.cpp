#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "dosesens/dataset.hpp"
#include "helpers.hpp"

using namespace dosesens;

namespace {
const char* kTwoSetCsv =
    "set_id,unit_id,dose,outcome\n"
    "a,1,0.2,1.0\n"
    "a,2,0.7,3.0\n"
    "b,1,0.1,0.0\n"
    "b,2,0.5,2.0\n"
    "b,3,0.9,4.0\n";
}

TEST_CASE("csv with two sets of sizes 2 and 3") {
    MatchedDataset ds = parse_dataset_csv(kTwoSetCsv);
    CHECK(ds.num_sets() == 2);
    CHECK(ds.total_units() == 5);
    CHECK(ds.sets[0].set_id == "a");
    CHECK(ds.sets[1].doses == std::vector<double>{0.1, 0.5, 0.9});
    CHECK(ds.covariate_dim == 0);
}

TEST_CASE("rows grouped by set_id regardless of file interleaving") {
    MatchedDataset ds = parse_dataset_csv(
        "set_id,unit_id,dose,outcome\n"
        "a,1,0.2,1.0\n"
        "b,1,0.1,0.0\n"
        "a,2,0.7,3.0\n"
        "b,2,0.5,2.0\n");
    REQUIRE(ds.num_sets() == 2);
    CHECK(ds.sets[0].doses == std::vector<double>{0.2, 0.7});
    CHECK(ds.sets[1].doses == std::vector<double>{0.1, 0.5});
}

TEST_CASE("covariate columns auto-detected") {
    MatchedDataset ds = parse_dataset_csv(
        "set_id,unit_id,dose,outcome,x1,x2\n"
        "a,1,0.2,1.0,0.5,1.5\n"
        "a,2,0.7,3.0,0.6,1.6\n");
    CHECK(ds.covariate_dim == 2);
    CHECK(ds.sets[0].covariates[1] == std::vector<double>{0.6, 1.6});
}

TEST_CASE("singleton set rejected") {
    CHECK_THROWS_WITH_AS(parse_dataset_csv("set_id,unit_id,dose,outcome\na,1,0.2,1.0\n"),
                         doctest::Contains("SingletonSet"), Error);
}

TEST_CASE("non-finite dose rejected") {
    CHECK_THROWS_WITH_AS(parse_dataset_csv("set_id,unit_id,dose,outcome\n"
                                           "a,1,NaN,1.0\n"
                                           "a,2,0.7,3.0\n"),
                         doctest::Contains("NonFiniteValue"), Error);
}

TEST_CASE("missing column rejected") {
    CHECK_THROWS_WITH_AS(parse_dataset_csv("set_id,unit_id,outcome\na,1,1.0\na,2,3.0\n"),
                         doctest::Contains("MissingColumn"), Error);
}

TEST_CASE("inconsistent covariate dimension rejected by validate") {
    MatchedDataset ds;
    ds.covariate_dim = 2;
    MatchedSet set;
    set.set_id = "a";
    set.doses = {0.1, 0.2};
    set.outcomes = {1.0, 2.0};
    set.covariates = {{1.0, 2.0}, {1.0}};
    ds.sets.push_back(set);
    CHECK_THROWS_WITH_AS(ds.validate(), doctest::Contains("InconsistentCovariateDim"), Error);
}

TEST_CASE("order_index sorts with stable tie-break") {
    MatchedSet set;
    set.doses = {0.7, 0.2, 0.5};
    set.outcomes = {0, 0, 0};
    CHECK(order_index(set) == std::vector<int>{3, 1, 2});

    MatchedSet tied;
    tied.doses = {0.5, 0.5};
    tied.outcomes = {0, 0};
    CHECK(order_index(tied) == std::vector<int>{1, 2});
}

TEST_CASE("sorted order statistics invariant to unit order") {
    std::vector<double> doses = {0.9, 0.1, 0.4, 0.4};
    MatchedSet a, b;
    a.doses = doses;
    b.doses = {0.4, 0.9, 0.4, 0.1};
    a.outcomes.assign(4, 0.0);
    b.outcomes.assign(4, 0.0);
    CHECK(sorted_doses(a) == sorted_doses(b));
}

TEST_CASE("enumerate_assignments is lexicographic with identity first") {
    PermutationTable t3 = enumerate_assignments(3);
    CHECK(t3.perms.size() == 6);
    CHECK(t3.perms[0] == std::vector<int>{0, 1, 2});
    CHECK(t3.perms[5] == std::vector<int>{2, 1, 0});

    PermutationTable t2 = enumerate_assignments(2);
    REQUIRE(t2.perms.size() == 2);
    CHECK(t2.perms[0] == std::vector<int>{0, 1});
    CHECK(t2.perms[1] == std::vector<int>{1, 0});

    // Multiset of permutations covers every arrangement exactly once.
    PermutationTable t4 = enumerate_assignments(4);
    CHECK(t4.perms.size() == 24);
    auto sorted = t4.perms;
    std::sort(sorted.begin(), sorted.end());
    CHECK(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end());
}

TEST_CASE("enumeration cap enforced") {
    CHECK_THROWS_WITH_AS(enumerate_assignments(7, 5), doctest::Contains("SetTooLarge"), Error);
    CHECK_THROWS_WITH_AS(enumerate_assignments(6, 5), doctest::Contains("SetTooLarge"), Error);
    CHECK(enumerate_assignments(6, 6).perms.size() == 720);
    CHECK_THROWS_AS(enumerate_assignments(7, 7), Error);  // hard max is 6
}

TEST_CASE("sample_assignment degenerate and invalid weights") {
    CHECK(sample_assignment({1.0, 0.0}, 42) == 0);
    CHECK(sample_assignment({1.0, 0.0}, 7) == 0);
    CHECK_THROWS_WITH_AS(sample_assignment({0.5, 0.4}, 1), doctest::Contains("InvalidWeights"),
                         Error);
    CHECK_THROWS_AS(sample_assignment({-0.5, 1.5}, 1), Error);
}

TEST_CASE("sample_assignment uniform frequencies over 60000 draws") {
    std::vector<double> w(6, 1.0 / 6.0);
    std::vector<int> counts(6, 0);
    const int draws = 60000;
    for (int d = 0; d < draws; ++d) ++counts[sample_assignment(w, 1000 + d)];
    for (int k = 0; k < 6; ++k) {
        double freq = counts[k] / static_cast<double>(draws);
        CHECK(std::abs(freq - 1.0 / 6.0) < 0.01);
    }
}

TEST_CASE("sample_assignment bit-reproducible for a fixed seed") {
    std::vector<double> w = {0.2, 0.3, 0.5};
    for (std::uint64_t seed : {1ULL, 99ULL, 123456789ULL})
        CHECK(sample_assignment(w, seed) == sample_assignment(w, seed));
}

TEST_CASE("factorial values") {
    CHECK(factorial(2) == 2);
    CHECK(factorial(5) == 120);
    CHECK(factorial(6) == 720);
}
