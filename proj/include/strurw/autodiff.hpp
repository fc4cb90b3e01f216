#pragma once

// Minimal reverse-mode automatic differentiation over dense row-major
// double matrices. A Tape records primitive ops in forward order; backward
// replays the adjoints in exact reverse order. Every op checks its output
// for NaN/Inf and throws on the first nonfinite value.

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "strurw/graph.hpp"

namespace strurw::ad {

struct NumericsError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Mat {
    int rows = 0;
    int cols = 0;
    std::vector<double> v;

    Mat() = default;
    Mat(int r, int c, double fill = 0.0) : rows(r), cols(c), v(static_cast<std::size_t>(r) * c, fill) {}

    double& at(int r, int c) { return v[static_cast<std::size_t>(r) * cols + c]; }
    double at(int r, int c) const { return v[static_cast<std::size_t>(r) * cols + c]; }
    std::size_t size() const { return v.size(); }

    bool operator==(const Mat&) const = default;
};

class Tape {
public:
    using Id = std::size_t;

    // Leaf node; gradients accumulate into grad(id) during backward.
    Id input(Mat value);

    Id matmul(Id a, Id b);
    Id add(Id a, Id b);                 // same shape
    Id add_bias(Id a, Id bias);         // bias is a 1 x cols row vector, broadcast
    Id relu(Id a);
    Id concat_rows(Id a, Id b);         // same cols
    Id permute_rows(Id a, const std::vector<int>& perm);  // out row i = in row perm[i]
    Id scalar_mul(Id a, double c);
    Id grad_reversal(Id a, double alpha);  // forward identity, backward scaled by -alpha

    // Weighted neighbor aggregation over the graph: for each node v,
    // out_v = sum_{u in N(v)} w_uv h_u, divided by sum_{u} w_uv when
    // `mean` (empty neighborhood yields the zero vector). Weights come
    // from the graph's edge weights (1.0 when absent). include_self adds
    // the node's own row with weight 1.
    Id neighbor_agg(Id h, const LabeledGraph& g, bool mean, bool include_self = false);

    // Mean cross-entropy of row-softmax(logits) against class indices.
    // Rows with label kUnknownLabel are skipped. Optional per-row weights
    // rescale each row's contribution (mean is over included rows).
    Id softmax_cross_entropy(Id logits, const std::vector<int>& labels,
                             const std::vector<double>* row_weights = nullptr);

    // Mean cross-entropy against dense soft labels (rows sum to 1).
    Id soft_cross_entropy(Id logits, const Mat& soft_labels);

    // Mean binary cross-entropy with logits; targets in {0, 1}, logits n x 1.
    Id binary_cross_entropy_with_logits(Id logits, const std::vector<double>& targets);

    const Mat& value(Id id) const { return nodes_[id].value; }
    const Mat& grad(Id id) const { return nodes_[id].grad; }

    // Seeds d(loss)/d(loss) = 1 and accumulates gradients into every node.
    void backward(Id loss);

    std::size_t size() const { return nodes_.size(); }

private:
    struct Node {
        Mat value;
        Mat grad;
        std::function<void(Tape&)> back;  // empty for leaves
    };

    Id push(Mat value, std::function<void(Tape&)> back);
    void check_finite(const Mat& m, const char* op) const;
    Mat& grad_mut(Id id) { return nodes_[id].grad; }

    std::vector<Node> nodes_;
};

struct AdamState {
    Mat m;
    Mat v;
    long step = 0;
};

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// Standard Adam update with bias correction; throws on nonfinite gradients.
void adam_step(Mat& params, const Mat& grads, AdamState& state, const AdamConfig& cfg);

}  // namespace strurw::ad
