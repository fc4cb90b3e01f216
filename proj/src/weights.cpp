#include "strurw/weights.hpp"

#include <cmath>
#include <cstring>

#include <json.hpp>

#include "strurw/rng.hpp"

namespace strurw {

namespace {

std::uint64_t hash_matrix(const BlockMatrix& B) {
    std::uint64_t h = 0x9e3779b97f4a7c15ULL ^ static_cast<std::uint64_t>(B.k);
    for (double x : B.entries) {
        std::uint64_t bits;
        static_assert(sizeof(bits) == sizeof(x));
        std::memcpy(&bits, &x, sizeof(bits));
        h ^= bits;
        h = splitmix64(h);
    }
    return h;
}

}  // namespace

WeightTable WeightTable::all_ones(int k) {
    WeightTable t;
    t.k = k;
    t.w.assign(static_cast<std::size_t>(k) * k, 1.0);
    return t;
}

std::string WeightTable::to_json() const {
    nlohmann::json doc;
    doc["k"] = k;
    doc["lambda"] = lambda;
    nlohmann::json rows = nlohmann::json::array();
    for (int i = 0; i < k; ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (int j = 0; j < k; ++j) row.push_back(at(i, j));
        rows.push_back(std::move(row));
    }
    doc["w"] = std::move(rows);
    doc["degenerate_ratio"] = degenerate_ratio;
    doc["clamped"] = clamped;
    return doc.dump();
}

WeightTable compute_weight_table(const BlockMatrix& Bs, const BlockMatrix& Bt_hat, double lambda) {
    if (Bs.k != Bt_hat.k) throw ValidationError("compute_weight_table: class counts differ");
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw ValidationError("compute_weight_table: lambda must lie in [0,1]");
    WeightTable t;
    t.k = Bs.k;
    t.lambda = lambda;
    t.source_b_hash = hash_matrix(Bs);
    t.target_b_hash = hash_matrix(Bt_hat);
    t.w.resize(static_cast<std::size_t>(t.k) * t.k);
    for (int i = 0; i < t.k; ++i)
        for (int j = 0; j < t.k; ++j) {
            double w;
            if (Bs.at(i, j) == 0.0) {
                w = 1.0;  // no source edges of this class pair exist to reweight
                t.degenerate_ratio = true;
            } else {
                w = (1.0 - lambda) + lambda * (Bt_hat.at(i, j) / Bs.at(i, j));
                if (w <= 0.0) {
                    w = kWeightEpsilon;
                    t.clamped = true;
                }
            }
            t.w[static_cast<std::size_t>(i) * t.k + j] = w;
        }
    return t;
}

LabeledGraph assign_edge_weights(const LabeledGraph& g_source, const std::vector<int>& labels,
                                 const WeightTable& table) {
    if (labels.size() != static_cast<std::size_t>(g_source.num_nodes()))
        throw ValidationError("assign_edge_weights: labels size does not match num_nodes");
    for (int y : labels)
        if (y < 0 || y >= table.k) throw ValidationError("assign_edge_weights: every source node must be labeled");
    if (table.k != g_source.num_classes())
        throw ValidationError("assign_edge_weights: table class count does not match graph");
    return g_source.with_edge_weights(
        [&](int sender, int receiver) { return table.at(labels[receiver], labels[sender]); });
}

std::optional<BlockMatrix> refresh_target_estimate(const std::vector<int>& predictions,
                                                   const LabeledGraph& g_target,
                                                   const std::vector<int>& val_mask,
                                                   PseudoLabelPolicy policy) {
    if (predictions.size() != static_cast<std::size_t>(g_target.num_nodes()))
        throw ValidationError("refresh_target_estimate: prediction count does not match num_nodes");
    std::vector<int> labels = predictions;
    if (policy == PseudoLabelPolicy::val_true_plus_pseudo) {
        for (int v : val_mask) {
            g_target.check_node(v);
            if (g_target.label(v) == kUnknownLabel)
                throw ValidationError("refresh_target_estimate: validation node has no true label");
            labels[v] = g_target.label(v);
        }
    }
    BlockEstimate est = estimate_block_matrix(g_target, labels);
    if (est.any_degenerate) return std::nullopt;
    return est.B;
}

}  // namespace strurw
