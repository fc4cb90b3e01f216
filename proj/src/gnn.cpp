#include "strurw/gnn.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "strurw/rng.hpp"

namespace strurw {

using ad::Mat;
using ad::Tape;

std::vector<Mat*> ModelState::parameter_order() {
    std::vector<Mat*> out;
    for (auto& layer : encoder) {
        out.push_back(&layer.self.W);
        out.push_back(&layer.self.b);
        out.push_back(&layer.nbr.W);
        out.push_back(&layer.nbr.b);
    }
    out.push_back(&classifier.W);
    out.push_back(&classifier.b);
    out.push_back(&disc_hidden.W);
    out.push_back(&disc_hidden.b);
    out.push_back(&disc_out.W);
    out.push_back(&disc_out.b);
    return out;
}

std::vector<const Mat*> ModelState::parameter_order() const {
    auto mut = const_cast<ModelState*>(this)->parameter_order();
    return {mut.begin(), mut.end()};
}

namespace {

LinearParams glorot_linear(int in, int out, Xoshiro256& rng) {
    LinearParams p;
    p.W = Mat(in, out);
    p.b = Mat(1, out);
    const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
    for (double& w : p.W.v) w = (2.0 * rng.uniform() - 1.0) * limit;
    return p;
}

}  // namespace

ModelState init_model(const ModelConfig& config, std::uint64_t seed) {
    if (config.encoder.hidden_dims.empty()) throw ValidationError("init_model: encoder needs at least one layer");
    if (config.encoder.input_dim <= 0) throw ValidationError("init_model: input_dim must be positive");
    if (config.num_classes < 1) throw ValidationError("init_model: num_classes must be >= 1");

    ModelState state;
    state.config = config;
    state.init_seed = seed;
    auto rng = substream(seed, 0x6d6f64656cULL);  // model-init stream
    int in = config.encoder.input_dim;
    for (int dim : config.encoder.hidden_dims) {
        LayerParams layer;
        layer.self = glorot_linear(in, dim, rng);
        layer.nbr = glorot_linear(in, dim, rng);
        state.encoder.push_back(std::move(layer));
        in = dim;
    }
    state.classifier = glorot_linear(in, config.num_classes, rng);
    state.disc_hidden = glorot_linear(in, config.discriminator_hidden, rng);
    state.disc_out = glorot_linear(config.discriminator_hidden, 1, rng);
    state.opt.resize(state.parameter_order().size());
    return state;
}

std::vector<Tape::Id> bind_params(Tape& tape, const ModelState& state) {
    std::vector<Tape::Id> ids;
    for (const Mat* m : state.parameter_order()) ids.push_back(tape.input(*m));
    return ids;
}

ad::Tape::Id encode(Tape& tape, const LabeledGraph& g, const ModelState& state,
                    const std::vector<Tape::Id>& params) {
    if (g.attr_dim() != state.config.encoder.input_dim)
        throw ValidationError("encode: graph attr_dim does not match encoder input_dim");
    const bool mean = state.config.encoder.aggregation == Aggregation::weighted_mean;
    Mat attrs(g.num_nodes(), g.attr_dim());
    attrs.v = g.attrs();
    Tape::Id h = tape.input(std::move(attrs));
    const std::size_t layers = state.encoder.size();
    for (std::size_t l = 0; l < layers; ++l) {
        const Tape::Id w_self = params[4 * l + 0];
        const Tape::Id b_self = params[4 * l + 1];
        const Tape::Id w_nbr = params[4 * l + 2];
        const Tape::Id b_nbr = params[4 * l + 3];
        Tape::Id z;
        if (state.config.encoder.self_mode == SelfMode::transform) {
            Tape::Id agg = tape.neighbor_agg(h, g, mean);
            z = tape.add(tape.add_bias(tape.matmul(h, w_self), b_self),
                         tape.add_bias(tape.matmul(agg, w_nbr), b_nbr));
        } else {
            // W_self / b_self stay in the parameter set (zero gradient) so
            // the checkpoint layout is mode-independent.
            Tape::Id agg = tape.neighbor_agg(h, g, mean, /*include_self=*/true);
            z = tape.add_bias(tape.matmul(agg, w_nbr), b_nbr);
        }
        h = (l + 1 < layers) ? tape.relu(z) : z;
    }
    return h;
}

ad::Tape::Id classify(Tape& tape, Tape::Id h, const ModelState& state,
                      const std::vector<Tape::Id>& params) {
    const std::size_t base = 4 * state.encoder.size();
    return tape.add_bias(tape.matmul(h, params[base]), params[base + 1]);
}

ad::Tape::Id discriminate(Tape& tape, Tape::Id h, const ModelState& state, double alpha,
                          const std::vector<Tape::Id>& params) {
    if (alpha < 0.0) throw ValidationError("discriminate: alpha must be nonnegative");
    const std::size_t base = 4 * state.encoder.size() + 2;
    Tape::Id rev = tape.grad_reversal(h, alpha);
    Tape::Id hidden = tape.relu(tape.add_bias(tape.matmul(rev, params[base]), params[base + 1]));
    return tape.add_bias(tape.matmul(hidden, params[base + 2]), params[base + 3]);
}

std::vector<int> predict(const Mat& logits) {
    std::vector<int> out(static_cast<std::size_t>(logits.rows));
    for (int i = 0; i < logits.rows; ++i) {
        int best = 0;
        for (int j = 1; j < logits.cols; ++j)
            if (logits.at(i, j) > logits.at(i, best)) best = j;
        out[i] = best;
    }
    return out;
}

ad::Mat forward_representations(const LabeledGraph& g, const ModelState& state) {
    Tape tape;
    auto params = bind_params(tape, state);
    return tape.value(encode(tape, g, state, params));
}

ad::Mat forward_logits(const LabeledGraph& g, const ModelState& state) {
    Tape tape;
    auto params = bind_params(tape, state);
    return tape.value(classify(tape, encode(tape, g, state, params), state, params));
}

void save_checkpoint(const ModelState& state, const std::string& path, long epoch) {
    nlohmann::json header;
    header["format"] = "strurw-ckpt-v1";
    header["epoch"] = epoch;
    header["seed"] = state.init_seed;
    header["input_dim"] = state.config.encoder.input_dim;
    header["hidden_dims"] = state.config.encoder.hidden_dims;
    header["aggregation"] = state.config.encoder.aggregation == Aggregation::weighted_mean ? "weighted_mean" : "weighted_sum";
    header["self_mode"] = state.config.encoder.self_mode == SelfMode::transform ? "transform" : "in_aggregation";
    header["num_classes"] = state.config.num_classes;
    header["discriminator_hidden"] = state.config.discriminator_hidden;
    const std::string head = header.dump();

    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot open checkpoint for writing: " + path);
    const std::uint64_t head_len = head.size();
    char len_le[8];
    for (int i = 0; i < 8; ++i) len_le[i] = static_cast<char>((head_len >> (8 * i)) & 0xff);
    out.write(len_le, 8);
    out.write(head.data(), static_cast<std::streamsize>(head.size()));
    for (const Mat* m : state.parameter_order())
        for (double x : m->v) {
            std::uint64_t bits;
            std::memcpy(&bits, &x, 8);
            char le[8];
            for (int i = 0; i < 8; ++i) le[i] = static_cast<char>((bits >> (8 * i)) & 0xff);
            out.write(le, 8);
        }
    if (!out) throw ValidationError("checkpoint write failed: " + path);
}

ModelState load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open checkpoint: " + path);
    char len_le[8];
    in.read(len_le, 8);
    if (!in) throw ParseError("checkpoint truncated: " + path);
    std::uint64_t head_len = 0;
    for (int i = 0; i < 8; ++i) head_len |= static_cast<std::uint64_t>(static_cast<unsigned char>(len_le[i])) << (8 * i);
    std::string head(head_len, '\0');
    in.read(head.data(), static_cast<std::streamsize>(head_len));
    if (!in) throw ParseError("checkpoint header truncated: " + path);

    nlohmann::json header;
    try {
        header = nlohmann::json::parse(head);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("checkpoint header parse error: ") + e.what());
    }
    if (header.value("format", "") != "strurw-ckpt-v1") throw ParseError("unknown checkpoint format");

    ModelConfig config;
    config.encoder.input_dim = header.at("input_dim").get<int>();
    config.encoder.hidden_dims = header.at("hidden_dims").get<std::vector<int>>();
    config.encoder.aggregation = header.at("aggregation").get<std::string>() == "weighted_sum"
                                     ? Aggregation::weighted_sum
                                     : Aggregation::weighted_mean;
    config.encoder.self_mode = header.value("self_mode", "transform") == "in_aggregation"
                                   ? SelfMode::in_aggregation
                                   : SelfMode::transform;
    config.num_classes = header.at("num_classes").get<int>();
    config.discriminator_hidden = header.at("discriminator_hidden").get<int>();

    ModelState state = init_model(config, header.at("seed").get<std::uint64_t>());
    for (Mat* m : state.parameter_order())
        for (double& x : m->v) {
            char le[8];
            in.read(le, 8);
            if (!in) throw ParseError("checkpoint blob truncated: " + path);
            std::uint64_t bits = 0;
            for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(le[i])) << (8 * i);
            std::memcpy(&x, &bits, 8);
        }
    return state;
}

}  // namespace strurw
