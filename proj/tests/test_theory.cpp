#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "strurw/csbm.hpp"
#include "strurw/rng.hpp"
#include "strurw/theory.hpp"

using namespace strurw;

namespace {

// 4-node graph over the one-hot {0, 1, M.V.} alphabet:
// node 0 carries symbol 0, node 1 symbol 1, nodes 2 and 3 carry M.V.
// Edges: 0-2, 1-2, 3-2, 0-3.
LabeledGraph hand_mv_graph() {
    std::vector<double> attrs = {
        1.0, 0.0, 0.0,  // node 0: symbol 0
        0.0, 1.0, 0.0,  // node 1: symbol 1
        0.0, 0.0, 1.0,  // node 2: M.V.
        0.0, 0.0, 1.0,  // node 3: M.V.
    };
    return LabeledGraph::build(4, {{0, 2}, {1, 2}, {3, 2}, {0, 3}}, attrs, 3, {0, 1, 0, 1}, 2);
}

std::vector<std::vector<double>> gaussian_cloud(int n, double mean, std::uint64_t seed) {
    auto rng = substream(seed, 99);
    std::vector<std::vector<double>> out;
    for (int i = 0; i < n; ++i) {
        const double u1 = std::max(rng.uniform(), 1e-300);
        const double u2 = rng.uniform();
        const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
        out.push_back({mean + z});
    }
    return out;
}

}  // namespace

TEST_CASE("multiset collection covers exactly the M.V. nodes with correct counts") {
    auto ms = collect_multisets(hand_mv_graph());
    REQUIRE(ms.size() == 2);
    CHECK(ms[0].node == 2);
    CHECK(ms[0].label == 0);
    CHECK(ms[0].feature == MultisetFeature{1, 1, 1});  // neighbors 0, 1, 3
    CHECK(ms[1].node == 3);
    CHECK(ms[1].label == 1);
    CHECK(ms[1].feature == MultisetFeature{1, 0, 1});  // neighbors 0, 2

    // Non-one-hot attributes are rejected.
    std::vector<double> bad = {0.5, 0.5, 0.0, 0.0, 1.0, 0.0};
    LabeledGraph g = LabeledGraph::build(2, {{0, 1}}, bad, 3, {0, 1}, 2);
    CHECK_THROWS_AS(collect_multisets(g), ValidationError);
}

TEST_CASE("thresholding classifier decisions around the boundary") {
    // n = 100, delta = 0.2, r = 0.5 => threshold (c0-c1)/n vs 0.025.
    const int n = 100;
    CHECK(hoeffding_classifier({3, 0, 10}, n, 0.2, 0.2, 0.5) == 0);   // 0.03 > 0.025
    CHECK(hoeffding_classifier({2, 0, 10}, n, 0.2, 0.2, 0.5) == 1);   // 0.02 < 0.025
    CHECK(hoeffding_classifier({10, 10, 0}, n, 0.2, 0.2, 0.5) == 1);  // balanced counts
    // Scale n by 4 so (c0-c1)/n hits the threshold exactly: ties go to class 1.
    CHECK(hoeffding_classifier({10, 0, 0}, 400, 0.2, 0.2, 0.5) == 1);
}

TEST_CASE("classifier error on sampled graphs is far below chance") {
    HoeffdingReport r = hoeffding_target_error(2000, 0.2, 0.2, 0.5, 1);
    CHECK(r.evaluated > 800);  // about half the nodes carry M.V.
    CHECK(r.error < 0.3);
    CHECK(r.error >= 0.0);
}

TEST_CASE("identity check: matched laws close, contrasting laws far") {
    TvReport matched = distribution_identity_check(1000, 0.2, 0.1, 0.5, 2000, IdentityMode::matched, 0);
    TvReport contrast = distribution_identity_check(1000, 0.2, 0.1, 0.5, 2000, IdentityMode::contrast, 0);
    CHECK(matched.samples_per_side == 2000);
    CHECK(matched.bins == 27);
    CHECK(matched.tv < 0.15);
    CHECK(contrast.tv > 0.5);
    CHECK(matched.tv < contrast.tv);

    CHECK_THROWS_AS(distribution_identity_check(1000, 0.2, 0.1, 0.5, 500, IdentityMode::matched, 0),
                    ValidationError);
}

TEST_CASE("permutation test calibrates on same-distribution samples and rejects shifted ones") {
    auto a = gaussian_cloud(120, 0.0, 1);
    auto same = gaussian_cloud(120, 0.0, 2);
    auto shifted = gaussian_cloud(120, 1.5, 3);

    AlignmentReport null_case = energy_permutation_test(a, same, 199, 0);
    AlignmentReport alt_case = energy_permutation_test(a, shifted, 199, 0);
    CHECK(null_case.p_value > 0.01);
    CHECK(alt_case.p_value <= 0.01);
    CHECK(alt_case.p_value >= 1.0 / 200.0);  // never exactly zero
    CHECK(alt_case.statistic > null_case.statistic);

    // Deterministic in the seed.
    AlignmentReport again = energy_permutation_test(a, same, 199, 0);
    CHECK(again.p_value == null_case.p_value);
    CHECK(again.statistic == null_case.statistic);

    CHECK_THROWS_AS(energy_permutation_test({}, a, 199, 0), ValidationError);
}

TEST_CASE("alignment check accepts the aligned construction and rejects the shifted one") {
    AlignmentReport aligned = conditional_alignment_check(true, 0);
    AlignmentReport unaligned = conditional_alignment_check(false, 0);
    CHECK(aligned.p_value > 0.05);
    CHECK(unaligned.p_value <= 0.01);
}
