#pragma once

// Lambda-mixed class-pair edge weights and their application to the
// source graph.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "strurw/graph.hpp"
#include "strurw/shift_stats.hpp"

namespace strurw {

struct WeightTable {
    int k = 0;
    std::vector<double> w;  // row-major k x k, w[receiver][sender]
    double lambda = 0.0;
    // provenance
    std::uint64_t source_b_hash = 0;
    std::uint64_t target_b_hash = 0;
    long epoch_computed = -1;
    bool degenerate_ratio = false;  // some Bs_ij was 0 (weight forced to 1)
    bool clamped = false;           // some weight was clamped to epsilon

    double at(int receiver_class, int sender_class) const {
        return w[static_cast<std::size_t>(receiver_class) * k + sender_class];
    }

    static WeightTable all_ones(int k);
    std::string to_json() const;
};

constexpr double kWeightEpsilon = 1e-6;

// w_ij = (1 - lambda) + lambda * Bt_ij / Bs_ij. Where Bs_ij == 0 the ratio
// is undefined and the weight is set to 1 (inert: no such source edges
// exist); where the formula yields a nonpositive weight (Bt_ij == 0 at
// lambda == 1) it is clamped to kWeightEpsilon to preserve positivity.
WeightTable compute_weight_table(const BlockMatrix& Bs, const BlockMatrix& Bt_hat, double lambda);

// Directed pair (u, v) — the message u -> v — receives w[y_v][y_u]: row is
// the receiver's class, column the sender's. All source labels must be known.
LabeledGraph assign_edge_weights(const LabeledGraph& g_source, const std::vector<int>& labels,
                                 const WeightTable& table);

enum class PseudoLabelPolicy { pseudo_only, val_true_plus_pseudo };

struct StruRwSchedule {
    int start_epoch = 100;  // m
    int period = 5;         // t
    double lambda = 0.8;
    PseudoLabelPolicy policy = PseudoLabelPolicy::val_true_plus_pseudo;
};

// Target block-matrix estimate from predicted labels, with validation
// nodes' true labels substituted under val_true_plus_pseudo. Returns
// nullopt when some class receives no labels at all, in which case the
// caller keeps its previous estimate.
std::optional<BlockMatrix> refresh_target_estimate(const std::vector<int>& predictions,
                                                   const LabeledGraph& g_target,
                                                   const std::vector<int>& val_mask,
                                                   PseudoLabelPolicy policy);

}  // namespace strurw
