#include "strurw/train.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

namespace strurw {

using ad::Mat;
using ad::Tape;

std::string pipeline_name(Pipeline p) {
    switch (p) {
        case Pipeline::erm: return "erm";
        case Pipeline::adv: return "adv";
        case Pipeline::mixup: return "mixup";
    }
    return "?";
}

Pipeline pipeline_from_name(const std::string& name) {
    if (name == "erm") return Pipeline::erm;
    if (name == "adv") return Pipeline::adv;
    if (name == "mixup") return Pipeline::mixup;
    throw ValidationError("unknown pipeline: " + name);
}

ad::Tape::Id erm_loss(Tape& tape, Tape::Id logits, const std::vector<int>& labels) {
    return tape.softmax_cross_entropy(logits, labels);
}

ad::Tape::Id adv_loss(Tape& tape, Tape::Id h_source, Tape::Id h_target, const ModelState& state,
                      double alpha, const std::vector<Tape::Id>& params) {
    // Copy the row counts up front: pushing ops may reallocate the tape's
    // node storage, invalidating references into it.
    const int rows_s = tape.value(h_source).rows;
    const int rows_t = tape.value(h_target).rows;
    if (rows_s == 0 || rows_t == 0) throw ValidationError("adv_loss: both domains must be nonempty");
    Tape::Id both = tape.concat_rows(h_source, h_target);
    Tape::Id logit = discriminate(tape, both, state, alpha, params);
    std::vector<double> targets(static_cast<std::size_t>(rows_s) + rows_t, 0.0);
    std::fill(targets.begin(), targets.begin() + rows_s, 1.0);
    return tape.binary_cross_entropy_with_logits(logit, targets);
}

namespace {

double sample_gamma(double shape, Xoshiro256& rng) {
    // Marsaglia-Tsang; shapes < 1 boosted via the U^{1/a} identity.
    if (shape < 1.0) {
        const double u = std::max(rng.uniform(), 1e-300);
        return sample_gamma(shape + 1.0, rng) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        const double u1 = std::max(rng.uniform(), 1e-300);
        const double u2 = rng.uniform();
        const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
        const double x = 1.0 + c * z;
        if (x <= 0.0) continue;
        const double v = x * x * x;
        const double u = std::max(rng.uniform(), 1e-300);
        if (std::log(u) < 0.5 * z * z + d - d * v + d * std::log(v)) return d * v;
    }
}

double sample_beta(double alpha, Xoshiro256& rng) {
    const double x = sample_gamma(alpha, rng);
    const double y = sample_gamma(alpha, rng);
    return x / (x + y);
}

}  // namespace

MixupResult mixup_step(Tape& tape, Tape::Id h, const std::vector<int>& labels, int num_classes,
                       double alpha, Xoshiro256& rng) {
    if (alpha <= 0.0) throw ValidationError("mixup_step: alpha must be positive");
    // Copy the row count up front: pushing ops may reallocate the tape's
    // node storage, invalidating references into it.
    const int rows = tape.value(h).rows;
    if (rows < 2) throw ValidationError("mixup_step: need at least two rows");
    if (labels.size() != static_cast<std::size_t>(rows))
        throw ValidationError("mixup_step: label count does not match rows");

    MixupResult out;
    out.perm.resize(static_cast<std::size_t>(rows));
    for (int i = 0; i < rows; ++i) out.perm[i] = i;
    for (std::size_t i = out.perm.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(rng.uniform() * static_cast<double>(i));
        if (j >= i) j = i - 1;
        std::swap(out.perm[i - 1], out.perm[j]);
    }
    out.lambda_mix = sample_beta(alpha, rng);

    out.mixed = tape.add(tape.scalar_mul(h, out.lambda_mix),
                         tape.scalar_mul(tape.permute_rows(h, out.perm), 1.0 - out.lambda_mix));
    out.soft_labels = Mat(rows, num_classes);
    for (int i = 0; i < rows; ++i) {
        out.soft_labels.at(i, labels[i]) += out.lambda_mix;
        out.soft_labels.at(i, labels[out.perm[i]]) += 1.0 - out.lambda_mix;
    }
    return out;
}

double grl_alpha(const GrlSchedule& schedule, int epoch, int total_epochs) {
    const double ramp = schedule.scale * static_cast<double>(epoch) / static_cast<double>(total_epochs);
    return std::min(schedule.alpha_max, ramp);
}

double accuracy(const std::vector<int>& predictions, const std::vector<int>& labels,
                const std::vector<int>* mask) {
    std::size_t correct = 0, total = 0;
    if (mask) {
        for (int v : mask[0]) {
            ++total;
            if (predictions[v] == labels[v]) ++correct;
        }
    } else {
        for (std::size_t v = 0; v < labels.size(); ++v) {
            ++total;
            if (predictions[v] == labels[v]) ++correct;
        }
    }
    return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total);
}

RunMetrics run_algorithm1(const DomainPair& pair, const TrainConfig& config, ModelState* final_model) {
    if (config.epochs < 1) throw ValidationError("run_algorithm1: epochs must be >= 1");
    if (!(config.lr > 0.0)) throw ValidationError("run_algorithm1: lr must be positive");
    if (config.strurw && config.strurw->start_epoch >= config.epochs)
        throw ValidationError("run_algorithm1: strurw start epoch must precede the final epoch");
    if (config.strurw && config.strurw->period < 1)
        throw ValidationError("run_algorithm1: strurw period must be >= 1");
    for (int y : pair.source.labels())
        if (y == kUnknownLabel) throw ValidationError("run_algorithm1: source labels must all be known");

    ModelConfig model_config;
    model_config.encoder.input_dim = pair.source.attr_dim();
    model_config.encoder.hidden_dims = config.hidden_dims;
    model_config.encoder.aggregation = config.aggregation;
    model_config.encoder.self_mode = config.self_mode;
    model_config.num_classes = pair.source.num_classes();
    model_config.discriminator_hidden = config.discriminator_hidden;
    ModelState state = init_model(model_config, substream_seed(config.seed, 0x696e6974ULL));

    auto mixup_rng = substream(config.seed, 0x6d6978ULL);
    ad::AdamConfig adam;
    adam.lr = config.lr;

    // B^S from the known source labels; held fixed across the run.
    const BlockMatrix Bs = estimate_block_matrix(pair.source, pair.source.labels()).B;
    std::optional<BlockMatrix> Bt_hat;
    LabeledGraph weighted_source = pair.source;  // reweighted in place on refresh epochs

    RunMetrics metrics;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        if (config.strurw && epoch >= config.strurw->start_epoch &&
            (epoch - config.strurw->start_epoch) % config.strurw->period == 0) {
            auto preds = predict(forward_logits(pair.target, state));
            auto estimate =
                refresh_target_estimate(preds, pair.target, pair.target_val_mask, config.strurw->policy);
            if (estimate) Bt_hat = std::move(*estimate);  // degenerate: keep the previous estimate
            if (Bt_hat) {
                WeightTable table = compute_weight_table(Bs, *Bt_hat, config.strurw->lambda);
                table.epoch_computed = epoch;
                weighted_source = assign_edge_weights(pair.source, pair.source.labels(), table);
            }
        }

        Tape tape;
        auto params = bind_params(tape, state);
        Tape::Id h_source = encode(tape, weighted_source, state, params);

        EpochMetrics em;
        em.epoch = epoch;
        Tape::Id loss = 0;
        switch (config.pipeline) {
            case Pipeline::erm: {
                Tape::Id logits = classify(tape, h_source, state, params);
                loss = erm_loss(tape, logits, pair.source.labels());
                em.loss_erm = tape.value(loss).at(0, 0);
                break;
            }
            case Pipeline::adv: {
                Tape::Id logits = classify(tape, h_source, state, params);
                Tape::Id erm = erm_loss(tape, logits, pair.source.labels());
                Tape::Id h_target = encode(tape, pair.target, state, params);
                const double alpha = grl_alpha(config.grl, epoch, config.epochs);
                Tape::Id adv = adv_loss(tape, h_source, h_target, state, alpha, params);
                loss = tape.add(erm, adv);
                em.loss_erm = tape.value(erm).at(0, 0);
                em.loss_adv = tape.value(adv).at(0, 0);
                break;
            }
            case Pipeline::mixup: {
                MixupResult mix = mixup_step(tape, h_source, pair.source.labels(),
                                             pair.source.num_classes(), config.mixup_alpha, mixup_rng);
                Tape::Id logits = classify(tape, mix.mixed, state, params);
                loss = tape.soft_cross_entropy(logits, mix.soft_labels);
                em.loss_erm = tape.value(loss).at(0, 0);
                break;
            }
        }

        tape.backward(loss);
        auto matrices = state.parameter_order();
        for (std::size_t i = 0; i < matrices.size(); ++i)
            ad::adam_step(*matrices[i], tape.grad(params[i]), state.opt[i], adam);

        const bool record = epoch % config.eval_every == 0 || epoch + 1 == config.epochs;
        if (record) {
            // Post-step evaluation on fresh tapes; no gradient involvement.
            auto src_preds = predict(forward_logits(weighted_source, state));
            auto tgt_preds = predict(forward_logits(pair.target, state));
            em.src_acc = accuracy(src_preds, pair.source.labels());
            em.tgt_val_acc = accuracy(tgt_preds, pair.target.labels(), &pair.target_val_mask);
            em.tgt_test_acc = accuracy(tgt_preds, pair.target.labels(), &pair.target_test_mask);
            if (Bt_hat) {
                em.css_hat = css_metric(Bs, *Bt_hat).value;
                em.css_valid = true;
            }
            metrics.epochs.push_back(em);
            if (metrics.best_epoch < 0 || em.tgt_val_acc > metrics.best_val_acc) {
                metrics.best_epoch = epoch;
                metrics.best_val_acc = em.tgt_val_acc;
                metrics.best_test_acc = em.tgt_test_acc;
            }
        }
    }

    if (final_model) *final_model = std::move(state);
    return metrics;
}

const char* kMetricsCsvHeader =
    "run_id,pipeline,strurw,lambda,m,t,seed,epoch,src_acc,tgt_val_acc,tgt_test_acc,loss_erm,loss_adv,css_hat";

void write_metrics_csv(std::ostream& out, const std::string& run_id, const TrainConfig& config,
                       const RunMetrics& metrics, bool with_header) {
    if (with_header) out << kMetricsCsvHeader << "\n";
    const bool rw = config.strurw.has_value();
    for (const auto& em : metrics.epochs) {
        out << run_id << ',' << pipeline_name(config.pipeline) << ',' << (rw ? 1 : 0) << ','
            << (rw ? config.strurw->lambda : 0.0) << ',' << (rw ? config.strurw->start_epoch : 0) << ','
            << (rw ? config.strurw->period : 0) << ',' << config.seed << ',' << em.epoch << ','
            << std::setprecision(17) << em.src_acc << ',' << em.tgt_val_acc << ',' << em.tgt_test_acc
            << ',' << em.loss_erm << ',' << em.loss_adv << ',';
        if (em.css_valid) out << em.css_hat;
        out << "\n";
    }
}

}  // namespace strurw
