#pragma once

// Edge-weight-aware GNN encoder, classifier head, and domain discriminator
// with gradient reversal. Each layer computes
//   h^{l+1}_v = relu(W_self h^l_v + W_nbr AGG_v + b)
// with weighted mean or sum aggregation over neighbors; relu is skipped on
// the last encoder layer.

#include <cstdint>
#include <string>
#include <vector>

#include "strurw/autodiff.hpp"
#include "strurw/graph.hpp"

namespace strurw {

enum class Aggregation { weighted_mean, weighted_sum };

// How a node's own representation enters the layer. `transform` is the
// update above (separate W_self path). `in_aggregation` drops the W_self
// term and instead includes the node itself in AGG with weight 1
// (GCN-style); a free self path lets the model sidestep neighborhood
// structure entirely, which hides structure shift.
enum class SelfMode { transform, in_aggregation };

struct EncoderConfig {
    int input_dim = 0;
    std::vector<int> hidden_dims;  // one entry per layer; last is the representation dim
    Aggregation aggregation = Aggregation::weighted_mean;
    SelfMode self_mode = SelfMode::transform;
};

struct LinearParams {
    ad::Mat W;  // in x out
    ad::Mat b;  // 1 x out
};

struct LayerParams {
    LinearParams self;
    LinearParams nbr;
};

struct ModelConfig {
    EncoderConfig encoder;
    int num_classes = 0;
    int discriminator_hidden = 20;
};

struct ModelState {
    ModelConfig config;
    std::vector<LayerParams> encoder;
    LinearParams classifier;  // rep -> k logits
    LinearParams disc_hidden;  // rep -> hidden
    LinearParams disc_out;     // hidden -> 1 logit
    std::vector<ad::AdamState> opt;  // one per parameter matrix, in parameter_order
    std::uint64_t init_seed = 0;

    // Checkpoint / optimizer order: encoder layer 0 (W_self, b_self,
    // W_nbr, b_nbr), layer 1, ..., classifier (W, b), disc_hidden (W, b),
    // disc_out (W, b).
    std::vector<ad::Mat*> parameter_order();
    std::vector<const ad::Mat*> parameter_order() const;
};

// Glorot-uniform weights, zero biases, seeded.
ModelState init_model(const ModelConfig& config, std::uint64_t seed);

// Feeds every parameter matrix onto the tape as a leaf, in
// parameter_order; gradients are read back through these ids.
std::vector<ad::Tape::Id> bind_params(ad::Tape& tape, const ModelState& state);

ad::Tape::Id encode(ad::Tape& tape, const LabeledGraph& g, const ModelState& state,
                    const std::vector<ad::Tape::Id>& params);

ad::Tape::Id classify(ad::Tape& tape, ad::Tape::Id h, const ModelState& state,
                      const std::vector<ad::Tape::Id>& params);

// Forward MLP(h) through grad_reversal(., alpha): the encoder's gradient
// from the discriminator loss is scaled by -alpha.
ad::Tape::Id discriminate(ad::Tape& tape, ad::Tape::Id h, const ModelState& state, double alpha,
                          const std::vector<ad::Tape::Id>& params);

// Row argmax with ties broken toward the lowest index.
std::vector<int> predict(const ad::Mat& logits);

// No-grad convenience forward: encoder then classifier.
ad::Mat forward_logits(const LabeledGraph& g, const ModelState& state);
ad::Mat forward_representations(const LabeledGraph& g, const ModelState& state);

void save_checkpoint(const ModelState& state, const std::string& path, long epoch);
ModelState load_checkpoint(const std::string& path);

}  // namespace strurw
