#pragma once

// Core graph representation shared by all modules. Undirected edges are
// stored as two directed pairs so per-direction message weights stay
// unambiguous. Graphs are immutable after construction; weight assignment
// produces a new overlay graph.

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace strurw {

struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

constexpr int kUnknownLabel = -1;

struct NeighborRef {
    int node;
    double weight;
    bool operator==(const NeighborRef&) const = default;
};

class LabeledGraph {
public:
    LabeledGraph() = default;

    // undirected_edges: each {u, v} with u != v, no duplicates in either
    // orientation. attrs is row-major [num_nodes x attr_dim]. labels use
    // kUnknownLabel for unlabeled nodes.
    static LabeledGraph build(int num_nodes, const std::vector<std::pair<int, int>>& undirected_edges,
                              std::vector<double> attrs, int attr_dim, std::vector<int> labels,
                              int num_classes);

    int num_nodes() const { return num_nodes_; }
    int num_classes() const { return num_classes_; }
    int attr_dim() const { return attr_dim_; }
    int num_directed_edges() const { return static_cast<int>(nbr_.size()); }

    const std::vector<int>& labels() const { return labels_; }
    int label(int v) const { return labels_[static_cast<std::size_t>(v)]; }

    const std::vector<double>& attrs() const { return attrs_; }
    const double* attr_row(int v) const { return attrs_.data() + static_cast<std::size_t>(v) * attr_dim_; }

    bool has_edge_weights() const { return !edge_weights_.empty(); }

    // In-neighbors of v (== out-neighbors, graph is undirected), ascending
    // index order, each with the weight of the directed pair (u, v),
    // i.e. the message u -> v. Weight defaults to 1.0 when absent.
    std::vector<NeighborRef> neighbors(int v) const;

    // CSR access for hot loops: neighbors of v are nbr[offset(v)..offset(v+1)).
    const std::vector<std::size_t>& offsets() const { return offsets_; }
    const std::vector<int>& nbr() const { return nbr_; }
    const std::vector<double>& edge_weights() const { return edge_weights_; }
    double edge_weight(std::size_t csr_index) const {
        return edge_weights_.empty() ? 1.0 : edge_weights_[csr_index];
    }

    int degree(int v) const {
        check_node(v);
        return static_cast<int>(offsets_[static_cast<std::size_t>(v) + 1] - offsets_[static_cast<std::size_t>(v)]);
    }

    // Returns a copy with per-directed-edge weights; weight of (u, v) is
    // looked up by the callback as weight_of(u, v). All weights must be
    // positive and finite.
    template <typename F>
    LabeledGraph with_edge_weights(F&& weight_of) const {
        LabeledGraph out = *this;
        out.edge_weights_.assign(nbr_.size(), 1.0);
        for (int v = 0; v < num_nodes_; ++v) {
            for (std::size_t e = offsets_[v]; e < offsets_[static_cast<std::size_t>(v) + 1]; ++e) {
                double w = weight_of(nbr_[e], v);
                if (!(w > 0.0) || !std::isfinite(w))
                    throw ValidationError("edge weight must be positive and finite");
                out.edge_weights_[e] = w;
            }
        }
        return out;
    }

    // Copy with replaced attribute matrix (same shape).
    LabeledGraph with_attrs(std::vector<double> attrs) const {
        if (attrs.size() != attrs_.size()) throw ValidationError("with_attrs: size mismatch");
        for (double a : attrs)
            if (!std::isfinite(a)) throw ValidationError("with_attrs: attrs must be finite");
        LabeledGraph out = *this;
        out.attrs_ = std::move(attrs);
        return out;
    }

    LabeledGraph without_edge_weights() const {
        LabeledGraph out = *this;
        out.edge_weights_.clear();
        return out;
    }

    // Structural equality: node count, edge multiset, attrs bitwise,
    // labels, weights.
    bool operator==(const LabeledGraph&) const = default;

    std::string serialize() const;
    static LabeledGraph deserialize(const std::string& text);

    void check_node(int v) const {
        if (v < 0 || v >= num_nodes_) throw ValidationError("node index out of range: " + std::to_string(v));
    }

private:
    int num_nodes_ = 0;
    int num_classes_ = 0;
    int attr_dim_ = 0;
    std::vector<std::size_t> offsets_;   // size num_nodes+1
    std::vector<int> nbr_;               // sorted within each node's range
    std::vector<double> edge_weights_;   // empty, or one per directed pair
    std::vector<double> attrs_;          // row-major
    std::vector<int> labels_;
};

struct DomainPair {
    LabeledGraph source;  // all labels known
    LabeledGraph target;  // labels known everywhere in the data, masked at use sites
    std::vector<int> target_val_mask;
    std::vector<int> target_test_mask;
};

}  // namespace strurw
