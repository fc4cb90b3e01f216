#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <vector>

#include "strurw/experiment.hpp"

using namespace strurw;

TEST_CASE("defaults: an empty config is a valid synthetic experiment") {
    ExperimentConfig config = parse_experiment_config("{}");
    REQUIRE(config.synthetic.has_value());
    CHECK(config.synthetic->classes == 3);
    CHECK(config.synthetic->n_per_class == 1000);
    CHECK(config.synthetic->intra == 0.02);
    CHECK(config.synthetic->source_inter == 0.002);
    CHECK(config.synthetic->target_inter == 0.016);
    CHECK(config.val_fraction == 0.2);
    CHECK(config.train.pipeline == Pipeline::erm);
    CHECK(config.train.epochs == 200);
    CHECK(config.train.lr == 0.004);
    CHECK_FALSE(config.train.strurw.has_value());
    CHECK(config.seeds == std::vector<std::uint64_t>{0});
}

TEST_CASE("full config parses every field") {
    const std::string text = R"({
      "shift": {"type": "synthetic", "classes": 2, "n_per_class": 50, "intra": 0.3,
                "source_inter": 0.05, "target_inter": 0.1,
                "means": [[0.0, 0.0], [1.0, 1.0]]},
      "val_fraction": 0.25,
      "train": {"pipeline": "adv", "epochs": 40, "lr": 0.01,
                "hidden_dims": [10, 10, 10], "discriminator_hidden": 6,
                "eval_every": 2, "aggregation": "weighted_sum",
                "self_mode": "in_aggregation",
                "grl": {"scale": 2.0, "alpha_max": 0.5},
                "strurw": {"start_epoch": 10, "period": 2, "lambda": 0.6,
                           "policy": "pseudo_only"}},
      "seeds": [3, 4, 5],
      "out": "results"
    })";
    ExperimentConfig config = parse_experiment_config(text);
    REQUIRE(config.synthetic.has_value());
    CHECK(config.synthetic->classes == 2);
    CHECK(config.synthetic->means.size() == 2);
    CHECK(config.val_fraction == 0.25);
    CHECK(config.train.pipeline == Pipeline::adv);
    CHECK(config.train.epochs == 40);
    CHECK(config.train.hidden_dims == std::vector<int>{10, 10, 10});
    CHECK(config.train.discriminator_hidden == 6);
    CHECK(config.train.eval_every == 2);
    CHECK(config.train.aggregation == Aggregation::weighted_sum);
    CHECK(config.train.self_mode == SelfMode::in_aggregation);
    CHECK(config.train.grl.scale == 2.0);
    CHECK(config.train.grl.alpha_max == 0.5);
    REQUIRE(config.train.strurw.has_value());
    CHECK(config.train.strurw->start_epoch == 10);
    CHECK(config.train.strurw->period == 2);
    CHECK(config.train.strurw->lambda == 0.6);
    CHECK(config.train.strurw->policy == PseudoLabelPolicy::pseudo_only);
    CHECK(config.seeds == std::vector<std::uint64_t>{3, 4, 5});
    CHECK(config.out_dir == "results");
}

TEST_CASE("schema errors carry the field path") {
    CHECK_THROWS_AS(parse_experiment_config("not json"), ParseError);
    CHECK_THROWS_AS(parse_experiment_config("[]"), ParseError);
    CHECK_THROWS_WITH_AS(parse_experiment_config(R"({"train": {"pipeline": 7}})"),
                         doctest::Contains("pipeline"), ParseError);
    CHECK_THROWS_AS(parse_experiment_config(R"({"train": {"pipeline": "sgd"}})"), ValidationError);
    CHECK_THROWS_AS(parse_experiment_config(R"({"shift": {"type": "magic"}})"), ParseError);
    CHECK_THROWS_AS(parse_experiment_config(R"({"shift": {"type": "files"}})"), ParseError);
    CHECK_THROWS_AS(parse_experiment_config(R"({"val_fraction": 1.5})"), ValidationError);
    CHECK_THROWS_AS(parse_experiment_config(R"({"seeds": []})"), ValidationError);
    CHECK_THROWS_AS(parse_experiment_config(R"({"train": {"epochs": 0}})"), ValidationError);
    CHECK_THROWS_AS(parse_experiment_config(R"({"train": {"aggregation": "max"}})"), ParseError);
    CHECK_THROWS_AS(parse_experiment_config(R"({"train": {"strurw": {"lambda": 2.0}}})"), ValidationError);
    CHECK_THROWS_AS(parse_experiment_config(R"({"shift": {"intra": 1.7}})"), ValidationError);
    CHECK_THROWS_AS(parse_experiment_config(R"({"shift": {"classes": 4}})"), ValidationError);
}

TEST_CASE("shift spec expansion builds the intended block matrices") {
    SyntheticShift shift;
    shift.classes = 3;
    shift.n_per_class = 10;
    shift.intra = 0.4;
    shift.source_inter = 0.1;
    shift.target_inter = 0.2;
    ShiftSpec spec = make_shift_spec(shift);
    CHECK(spec.source.n_per_class == std::vector<int>{10, 10, 10});
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            CHECK(spec.source.B.at(i, j) == (i == j ? 0.4 : 0.1));
            CHECK(spec.target.B.at(i, j) == (i == j ? 0.4 : 0.2));
        }
    const auto& means = std::get<GaussianAttrs>(spec.source.attr_model).means;
    REQUIRE(means.size() == 3);
    CHECK(means[0] == std::vector<double>{-1.0, 0.0});
}

TEST_CASE("file-based experiments load graphs and draw seeded masks") {
    // Build a small labeled pair, write it out, and reload through the
    // experiment path.
    SyntheticShift shift;
    shift.classes = 3;
    shift.n_per_class = 30;
    shift.intra = 0.3;
    shift.source_inter = 0.05;
    shift.target_inter = 0.1;
    DomainPair sampled = sample_domain_pair(make_shift_spec(shift), 0.2, 0);

    const std::string src_path = "test_experiment_source.json";
    const std::string tgt_path = "test_experiment_target.json";
    {
        std::ofstream(src_path) << sampled.source.serialize();
        std::ofstream(tgt_path) << sampled.target.serialize();
    }

    ExperimentConfig config = parse_experiment_config(
        R"({"shift": {"type": "files", "source": ")" + src_path + R"(", "target": ")" + tgt_path + R"("}})");
    DomainPair loaded = realize_domain_pair(config, 7);
    std::remove(src_path.c_str());
    std::remove(tgt_path.c_str());

    CHECK(loaded.source == sampled.source);
    CHECK(loaded.target == sampled.target);
    CHECK(loaded.target_val_mask.size() == 18);  // 20% of 90, stratified
    CHECK(loaded.target_test_mask.size() == 72);

    // Masks are seeded: same seed reproduces, different seed differs.
    std::ofstream(src_path) << sampled.source.serialize();
    std::ofstream(tgt_path) << sampled.target.serialize();
    DomainPair again = realize_domain_pair(config, 7);
    DomainPair other = realize_domain_pair(config, 8);
    std::remove(src_path.c_str());
    std::remove(tgt_path.c_str());
    CHECK(again.target_val_mask == loaded.target_val_mask);
    CHECK_FALSE(other.target_val_mask == loaded.target_val_mask);

    ExperimentConfig missing = parse_experiment_config(
        R"({"shift": {"type": "files", "source": "no_such.json", "target": "no_such.json"}})");
    CHECK_THROWS_AS(realize_domain_pair(missing, 0), ParseError);
}

TEST_CASE("synthetic realization matches direct sampling") {
    ExperimentConfig config = parse_experiment_config(
        R"({"shift": {"n_per_class": 40, "intra": 0.2, "source_inter": 0.02, "target_inter": 0.08}})");
    DomainPair a = realize_domain_pair(config, 3);
    DomainPair b = sample_domain_pair(make_shift_spec(*config.synthetic), config.val_fraction, 3);
    CHECK(a.source == b.source);
    CHECK(a.target == b.target);
    CHECK(a.target_val_mask == b.target_val_mask);
}

TEST_CASE("run ids separate configs and seeds") {
    const std::string a = R"({"seeds": [0]})";
    const std::string b = R"({"seeds": [1]})";
    CHECK(make_run_id(a, 0) == make_run_id(a, 0));
    CHECK(make_run_id(a, 0) != make_run_id(a, 1));
    CHECK(make_run_id(a, 0) != make_run_id(b, 0));
    CHECK(make_run_id(a, 3).ends_with("-s3"));
}

TEST_CASE("summary statistics use the unbiased standard deviation") {
    SummaryStat empty = summarize({});
    CHECK(empty.n == 0);
    SummaryStat one = summarize({0.7});
    CHECK(one.mean == 0.7);
    CHECK(one.std_dev == 0.0);
    SummaryStat s = summarize({2.0, 4.0, 6.0});
    CHECK(s.n == 3);
    CHECK(s.mean == doctest::Approx(4.0));
    CHECK(s.std_dev == doctest::Approx(2.0));  // sqrt(((4)+(0)+(4))/2)
}
