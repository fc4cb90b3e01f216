#pragma once

// Class-conditional edge-probability estimation and the CSS metric.

#include <string>
#include <vector>

#include "strurw/graph.hpp"

namespace strurw {

struct BlockMatrix {
    int k = 0;
    std::vector<double> entries;  // row-major k x k

    BlockMatrix() = default;
    explicit BlockMatrix(int k_, double fill = 0.0) : k(k_), entries(static_cast<std::size_t>(k_) * k_, fill) {}

    double& at(int i, int j) { return entries[static_cast<std::size_t>(i) * k + j]; }
    double at(int i, int j) const { return entries[static_cast<std::size_t>(i) * k + j]; }

    bool operator==(const BlockMatrix&) const = default;

    std::string to_json() const;
    static BlockMatrix from_json(const std::string& text);
};

struct BlockEstimate {
    BlockMatrix B;
    std::vector<bool> degenerate_class;  // true where |V_i| == 0 (row/col zeroed)
    bool any_degenerate = false;
};

// B_ij = #{stored directed pairs (u,v) with y_u=i, y_v=j} / (|V_i| * |V_j|).
// The diagonal denominator is |V_i|^2, counting both directions of each
// intra-class edge. Labels must cover every node; classes with no nodes are
// flagged and their row/column set to 0.
BlockEstimate estimate_block_matrix(const LabeledGraph& g, const std::vector<int>& labels);

struct CssResult {
    double value = 0.0;      // mean of delta over all k^2 entries; +inf entries propagate
    bool unbounded = false;  // some entry had one zero and one nonzero probability
    std::vector<double> delta;  // per-entry table, row-major
};

// Symmetric relative difference, averaged over all k^2 entries:
// delta_ij = (|Bs-Bt|/Bs + |Bs-Bt|/Bt) / 2, with delta_ij = 0 when both
// entries are zero and +inf (and the unbounded flag) when exactly one is.
CssResult css_metric(const BlockMatrix& Bs, const BlockMatrix& Bt);

}  // namespace strurw
