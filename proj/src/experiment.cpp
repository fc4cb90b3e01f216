#include "strurw/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include <json.hpp>

#include "strurw/rng.hpp"

namespace strurw {

using nlohmann::json;

ShiftSpec make_shift_spec(const SyntheticShift& shift) {
    if (shift.classes < 2) throw ValidationError("shift.classes must be >= 2");
    if (shift.n_per_class < 1) throw ValidationError("shift.n_per_class must be >= 1");
    for (double p : {shift.intra, shift.source_inter, shift.target_inter})
        if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("shift probabilities must lie in [0, 1]");

    std::vector<std::vector<double>> means = shift.means;
    if (means.empty()) {
        if (shift.classes != 3)
            throw ValidationError("shift.means required when classes != 3 (no default)");
        means = {{-1.0, 0.0}, {1.0, 0.0}, {3.0, 2.0}};
    }
    if (static_cast<int>(means.size()) != shift.classes)
        throw ValidationError("shift.means must have one vector per class");

    auto block = [&](double inter) {
        BlockMatrix B(shift.classes, inter);
        for (int i = 0; i < shift.classes; ++i) B.at(i, i) = shift.intra;
        return B;
    };
    ShiftSpec spec;
    spec.source.n_per_class.assign(static_cast<std::size_t>(shift.classes), shift.n_per_class);
    spec.source.B = block(shift.source_inter);
    spec.source.attr_model = GaussianAttrs{means};
    spec.target = spec.source;
    spec.target.B = block(shift.target_inter);
    return spec;
}

namespace {

// get<T> with a field-path error message.
template <typename T>
T field(const json& j, const std::string& key, const T& fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ParseError("config field '" + key + "': " + e.what());
    }
}

template <typename T>
T required_field(const json& j, const std::string& key) {
    if (!j.contains(key)) throw ParseError("config field '" + key + "' is required");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ParseError("config field '" + key + "': " + e.what());
    }
}

TrainConfig parse_train(const json& j) {
    TrainConfig t;
    t.pipeline = pipeline_from_name(field<std::string>(j, "pipeline", "erm"));
    t.epochs = field<int>(j, "epochs", t.epochs);
    t.lr = field<double>(j, "lr", t.lr);
    t.hidden_dims = field<std::vector<int>>(j, "hidden_dims", t.hidden_dims);
    t.discriminator_hidden = field<int>(j, "discriminator_hidden", t.discriminator_hidden);
    t.mixup_alpha = field<double>(j, "mixup_alpha", t.mixup_alpha);
    t.eval_every = field<int>(j, "eval_every", t.eval_every);
    const std::string agg = field<std::string>(j, "aggregation", "weighted_mean");
    if (agg == "weighted_mean") t.aggregation = Aggregation::weighted_mean;
    else if (agg == "weighted_sum") t.aggregation = Aggregation::weighted_sum;
    else throw ParseError("config field 'aggregation': expected weighted_mean or weighted_sum");
    const std::string self_mode = field<std::string>(j, "self_mode", "transform");
    if (self_mode == "transform") t.self_mode = SelfMode::transform;
    else if (self_mode == "in_aggregation") t.self_mode = SelfMode::in_aggregation;
    else throw ParseError("config field 'self_mode': expected transform or in_aggregation");
    if (j.contains("grl")) {
        t.grl.scale = field<double>(j.at("grl"), "scale", t.grl.scale);
        t.grl.alpha_max = field<double>(j.at("grl"), "alpha_max", t.grl.alpha_max);
    }
    if (j.contains("strurw") && !j.at("strurw").is_null()) {
        const json& s = j.at("strurw");
        StruRwSchedule sched;
        sched.start_epoch = field<int>(s, "start_epoch", sched.start_epoch);
        sched.period = field<int>(s, "period", sched.period);
        sched.lambda = field<double>(s, "lambda", sched.lambda);
        const std::string policy = field<std::string>(s, "policy", "val_true_plus_pseudo");
        if (policy == "pseudo_only") sched.policy = PseudoLabelPolicy::pseudo_only;
        else if (policy == "val_true_plus_pseudo") sched.policy = PseudoLabelPolicy::val_true_plus_pseudo;
        else throw ParseError("config field 'strurw.policy': expected pseudo_only or val_true_plus_pseudo");
        if (!(sched.lambda >= 0.0 && sched.lambda <= 1.0))
            throw ValidationError("strurw.lambda must lie in [0, 1]");
        t.strurw = sched;
    }
    if (t.epochs < 1) throw ValidationError("train.epochs must be >= 1");
    if (!(t.lr > 0.0)) throw ValidationError("train.lr must be positive");
    if (t.eval_every < 1) throw ValidationError("train.eval_every must be >= 1");
    return t;
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ParseError("config root must be an object");

    ExperimentConfig config;
    const json& shift = j.contains("shift") ? j.at("shift") : json::object();
    const std::string kind = field<std::string>(shift, "type", "synthetic");
    if (kind == "synthetic") {
        SyntheticShift s;
        s.classes = field<int>(shift, "classes", s.classes);
        s.n_per_class = field<int>(shift, "n_per_class", s.n_per_class);
        s.intra = field<double>(shift, "intra", s.intra);
        s.source_inter = field<double>(shift, "source_inter", s.source_inter);
        s.target_inter = field<double>(shift, "target_inter", s.target_inter);
        s.means = field<std::vector<std::vector<double>>>(shift, "means", s.means);
        make_shift_spec(s);  // validate eagerly
        config.synthetic = std::move(s);
    } else if (kind == "files") {
        config.source_path = required_field<std::string>(shift, "source");
        config.target_path = required_field<std::string>(shift, "target");
    } else {
        throw ParseError("config field 'shift.type': expected synthetic or files");
    }

    config.val_fraction = field<double>(j, "val_fraction", config.val_fraction);
    if (!(config.val_fraction > 0.0 && config.val_fraction < 1.0))
        throw ValidationError("val_fraction must lie in (0, 1)");
    config.train = parse_train(j.contains("train") ? j.at("train") : json::object());
    config.seeds = field<std::vector<std::uint64_t>>(j, "seeds", config.seeds);
    if (config.seeds.empty()) throw ValidationError("seeds must be nonempty");
    config.out_dir = field<std::string>(j, "out", config.out_dir);
    return config;
}

ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open config file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_experiment_config(buf.str());
}

DomainPair realize_domain_pair(const ExperimentConfig& config, std::uint64_t seed) {
    if (config.synthetic)
        return sample_domain_pair(make_shift_spec(*config.synthetic), config.val_fraction, seed);

    auto load = [](const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ParseError("cannot open graph file: " + path);
        std::stringstream buf;
        buf << in.rdbuf();
        return LabeledGraph::deserialize(buf.str());
    };
    DomainPair pair;
    pair.source = load(*config.source_path);
    pair.target = load(*config.target_path);
    for (int y : pair.source.labels())
        if (y == kUnknownLabel) throw ValidationError("source graph must be fully labeled");
    for (int y : pair.target.labels())
        if (y == kUnknownLabel)
            throw ValidationError("target graph must carry labels (masked at use sites)");

    // Seeded stratified val/test split of the target nodes.
    auto rng = substream(seed, 12);
    const int k = pair.target.num_classes();
    std::vector<std::vector<int>> by_class(static_cast<std::size_t>(k));
    for (int v = 0; v < pair.target.num_nodes(); ++v)
        by_class[static_cast<std::size_t>(pair.target.label(v))].push_back(v);
    for (auto& nodes : by_class) {
        for (std::size_t i = nodes.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(rng.uniform() * static_cast<double>(i));
            if (j >= i) j = i - 1;
            std::swap(nodes[i - 1], nodes[j]);
        }
        const auto n_val = static_cast<std::size_t>(
            std::llround(config.val_fraction * static_cast<double>(nodes.size())));
        for (std::size_t i = 0; i < nodes.size(); ++i)
            (i < n_val ? pair.target_val_mask : pair.target_test_mask).push_back(nodes[i]);
    }
    std::sort(pair.target_val_mask.begin(), pair.target_val_mask.end());
    std::sort(pair.target_test_mask.begin(), pair.target_test_mask.end());
    return pair;
}

std::string make_run_id(const std::string& config_text, std::uint64_t seed) {
    // FNV-1a over the config text: stable across runs of one build.
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : config_text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    std::ostringstream out;
    out << std::hex << h << "-s" << std::dec << seed;
    return out.str();
}

SummaryStat summarize(const std::vector<double>& values) {
    SummaryStat s;
    s.n = values.size();
    if (s.n == 0) return s;
    for (double v : values) s.mean += v;
    s.mean /= static_cast<double>(s.n);
    if (s.n > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - s.mean) * (v - s.mean);
        s.std_dev = std::sqrt(ss / static_cast<double>(s.n - 1));
    }
    return s;
}

}  // namespace strurw
