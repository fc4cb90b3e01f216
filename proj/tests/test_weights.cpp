#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <vector>

#include "strurw/weights.hpp"

using namespace strurw;

namespace {

BlockMatrix benchmark_source() {
    BlockMatrix B(2);
    B.at(0, 0) = B.at(1, 1) = 0.02;
    B.at(0, 1) = B.at(1, 0) = 0.016;
    return B;
}

BlockMatrix benchmark_target() {
    BlockMatrix B(2);
    B.at(0, 0) = B.at(1, 1) = 0.02;
    B.at(0, 1) = B.at(1, 0) = 0.002;
    return B;
}

}  // namespace

TEST_CASE("frozen weight values at full and half mixing") {
    // ratio off-diagonal: 0.002 / 0.016 = 0.125
    WeightTable full = compute_weight_table(benchmark_source(), benchmark_target(), 1.0);
    CHECK(full.at(0, 1) == doctest::Approx(0.125).epsilon(1e-12));
    CHECK(full.at(1, 0) == doctest::Approx(0.125).epsilon(1e-12));
    CHECK(full.at(0, 0) == doctest::Approx(1.0).epsilon(1e-12));

    // lambda = 0.5: 0.5 + 0.5 * 0.125 = 0.5625
    WeightTable half = compute_weight_table(benchmark_source(), benchmark_target(), 0.5);
    CHECK(half.at(0, 1) == doctest::Approx(0.5625).epsilon(1e-12));
    CHECK(half.at(0, 0) == doctest::Approx(1.0).epsilon(1e-12));

    CHECK_FALSE(full.degenerate_ratio);
    CHECK_FALSE(full.clamped);
}

TEST_CASE("lambda = 0 yields the all-ones table regardless of the ratio") {
    WeightTable t = compute_weight_table(benchmark_source(), benchmark_target(), 0.0);
    for (double w : t.w) CHECK(w == 1.0);
    CHECK(t.w == WeightTable::all_ones(2).w);
}

TEST_CASE("zero source probability leaves weight 1 and flags degeneracy") {
    BlockMatrix Bs = benchmark_source(), Bt = benchmark_target();
    Bs.at(0, 1) = 0.0;
    WeightTable t = compute_weight_table(Bs, Bt, 1.0);
    CHECK(t.at(0, 1) == 1.0);
    CHECK(t.degenerate_ratio);
    CHECK_FALSE(t.clamped);
}

TEST_CASE("nonpositive weights are clamped to epsilon") {
    BlockMatrix Bs = benchmark_source(), Bt = benchmark_target();
    Bt.at(0, 1) = 0.0;  // lambda = 1 => weight would be 0
    WeightTable t = compute_weight_table(Bs, Bt, 1.0);
    CHECK(t.at(0, 1) == kWeightEpsilon);
    CHECK(t.clamped);
}

TEST_CASE("table metadata records lambda and distinguishes inputs") {
    WeightTable a = compute_weight_table(benchmark_source(), benchmark_target(), 0.8);
    CHECK(a.lambda == 0.8);
    WeightTable b = compute_weight_table(benchmark_source(), benchmark_source(), 0.8);
    CHECK(a.source_b_hash == b.source_b_hash);
    CHECK(a.target_b_hash != b.target_b_hash);
    CHECK_THROWS_AS(compute_weight_table(benchmark_source(), BlockMatrix(3, 0.1), 0.5), ValidationError);
    CHECK_THROWS_AS(compute_weight_table(benchmark_source(), benchmark_target(), 1.5), ValidationError);
}

TEST_CASE("edge weights follow the receiver-row sender-column convention") {
    // Node 0 class 0, node 1 class 1, edge 0-1. With an asymmetric table the
    // two directions of the same undirected edge get different weights.
    WeightTable t = WeightTable::all_ones(2);
    t.w = {1.0, 2.0,   // receiver class 0: from sender 0 -> 1.0, sender 1 -> 2.0
           3.0, 4.0};  // receiver class 1
    std::vector<int> labels = {0, 1};
    LabeledGraph g = LabeledGraph::build(2, {{0, 1}}, std::vector<double>(2, 0.0), 1, labels, 2);
    LabeledGraph w = assign_edge_weights(g, labels, t);
    // message 1 -> 0: receiver class 0, sender class 1 => w[0][1] = 2
    CHECK(w.neighbors(0)[0].weight == 2.0);
    // message 0 -> 1: receiver class 1, sender class 0 => w[1][0] = 3
    CHECK(w.neighbors(1)[0].weight == 3.0);
}

TEST_CASE("weight assignment validates labels and shapes") {
    WeightTable t = WeightTable::all_ones(2);
    std::vector<int> labels = {0, 1};
    LabeledGraph g = LabeledGraph::build(2, {{0, 1}}, std::vector<double>(2, 0.0), 1, labels, 2);
    std::vector<int> partial = {0, kUnknownLabel};
    CHECK_THROWS_AS(assign_edge_weights(g, partial, t), ValidationError);
    CHECK_THROWS_AS(assign_edge_weights(g, std::vector<int>{0}, t), ValidationError);
    CHECK_THROWS_AS(assign_edge_weights(g, labels, WeightTable::all_ones(3)), ValidationError);
}

TEST_CASE("target refresh substitutes validation truth and detects empty classes") {
    // 4 nodes, classes {0,0,1,1}, edges 0-1, 2-3, 1-2.
    std::vector<int> truth = {0, 0, 1, 1};
    LabeledGraph g = LabeledGraph::build(4, {{0, 1}, {2, 3}, {1, 2}}, std::vector<double>(4, 0.0), 1, truth, 2);

    // All predictions say class 0; pseudo_only leaves class 1 empty.
    std::vector<int> preds = {0, 0, 0, 0};
    CHECK_FALSE(refresh_target_estimate(preds, g, {3}, PseudoLabelPolicy::pseudo_only).has_value());

    // val_true_plus_pseudo restores node 3's true label, so class 1 is
    // populated and the estimate uses labels {0,0,0,1}.
    auto est = refresh_target_estimate(preds, g, {3}, PseudoLabelPolicy::val_true_plus_pseudo);
    REQUIRE(est.has_value());
    CHECK(est->at(0, 0) == doctest::Approx(4.0 / 9.0));  // edges 0-1, 1-2 both ways
    CHECK(est->at(0, 1) == doctest::Approx(1.0 / 3.0));  // 2 -> 3 seen as class 0 -> 1
    CHECK(est->at(1, 1) == 0.0);

    // Correct predictions need no substitution.
    auto exact = refresh_target_estimate(truth, g, {}, PseudoLabelPolicy::pseudo_only);
    REQUIRE(exact.has_value());
    CHECK(exact->at(0, 0) == doctest::Approx(2.0 / 4.0));
    CHECK(exact->at(0, 1) == doctest::Approx(1.0 / 4.0));
    CHECK(exact->at(1, 1) == doctest::Approx(2.0 / 4.0));

    CHECK_THROWS_AS(refresh_target_estimate(std::vector<int>{0, 0}, g, {}, PseudoLabelPolicy::pseudo_only),
                    ValidationError);
}
