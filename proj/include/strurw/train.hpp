#pragma once

// Epoch loop for the three training pipelines (ERM, adversarial, mixup),
// with optional structural re-weighting of the source graph, evaluation,
// and best-validation model selection.

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "strurw/gnn.hpp"
#include "strurw/graph.hpp"
#include "strurw/rng.hpp"
#include "strurw/weights.hpp"

namespace strurw {

enum class Pipeline { erm, adv, mixup };

std::string pipeline_name(Pipeline p);
Pipeline pipeline_from_name(const std::string& name);

struct GrlSchedule {
    double scale = 1.0;
    double alpha_max = 1.0;
};

struct TrainConfig {
    Pipeline pipeline = Pipeline::erm;
    std::optional<StruRwSchedule> strurw;
    int epochs = 200;
    double lr = 0.004;
    std::uint64_t seed = 0;
    GrlSchedule grl;          // adv only
    double mixup_alpha = 1.0;  // Beta parameter, mixup only
    int eval_every = 1;
    std::vector<int> hidden_dims = {20, 20};
    Aggregation aggregation = Aggregation::weighted_mean;
    SelfMode self_mode = SelfMode::transform;
    int discriminator_hidden = 20;
};

struct EpochMetrics {
    int epoch = 0;
    double src_acc = 0.0;
    double tgt_val_acc = 0.0;
    double tgt_test_acc = 0.0;
    double loss_erm = 0.0;
    double loss_adv = 0.0;  // 0 outside the adv pipeline
    double css_hat = 0.0;   // CSS(B^S, B-hat^T); valid once an estimate exists
    bool css_valid = false;
};

struct RunMetrics {
    std::vector<EpochMetrics> epochs;
    int best_epoch = -1;
    double best_val_acc = 0.0;
    double best_test_acc = 0.0;
};

// Loss builders, exposed for direct testing. erm_loss is the mean
// cross-entropy over labeled rows; adv_loss is the mean binary
// cross-entropy of the discriminator on source (=1) vs target (=0)
// representations, reversed into the encoder by alpha.
ad::Tape::Id erm_loss(ad::Tape& tape, ad::Tape::Id logits, const std::vector<int>& labels);
ad::Tape::Id adv_loss(ad::Tape& tape, ad::Tape::Id h_source, ad::Tape::Id h_target,
                      const ModelState& state, double alpha, const std::vector<ad::Tape::Id>& params);

struct MixupResult {
    ad::Tape::Id mixed;      // lam * h + (1 - lam) * h[perm]
    ad::Mat soft_labels;     // lam * onehot(y) + (1 - lam) * onehot(y[perm])
    double lambda_mix = 1.0;
    std::vector<int> perm;
};

// Manifold-mixup at the final encoder layer; perm and lambda_mix ~
// Beta(alpha, alpha) are drawn from the supplied stream.
MixupResult mixup_step(ad::Tape& tape, ad::Tape::Id h, const std::vector<int>& labels, int num_classes,
                       double alpha, Xoshiro256& rng);

double grl_alpha(const GrlSchedule& schedule, int epoch, int total_epochs);

RunMetrics run_algorithm1(const DomainPair& pair, const TrainConfig& config,
                          ModelState* final_model = nullptr);

// Results CSV: one row per recorded epoch.
extern const char* kMetricsCsvHeader;
void write_metrics_csv(std::ostream& out, const std::string& run_id, const TrainConfig& config,
                       const RunMetrics& metrics, bool with_header);

double accuracy(const std::vector<int>& predictions, const std::vector<int>& labels,
                const std::vector<int>* mask = nullptr);

}  // namespace strurw
