#pragma once

// Declarative experiment configs: a shift description (synthetic CSBM
// parameters or graph file paths), a training config, replicate seeds, and
// sweep/summary plumbing shared by the CLI.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "strurw/csbm.hpp"
#include "strurw/train.hpp"

namespace strurw {

// Three-class Gaussian benchmark family: shared intra-class probability,
// per-domain inter-class probability, fixed class means. The benchmark
// grid keeps the source assortative (0.002) and raises the target
// inter-class probability to grow the conditional structure shift.
struct SyntheticShift {
    int classes = 3;
    int n_per_class = 1000;
    double intra = 0.02;
    double source_inter = 0.002;
    double target_inter = 0.016;
    std::vector<std::vector<double>> means;  // defaults to {-1,0},{1,0},{3,2}
};

ShiftSpec make_shift_spec(const SyntheticShift& shift);

struct ExperimentConfig {
    // Exactly one of synthetic / (source_path + target_path) is set.
    std::optional<SyntheticShift> synthetic;
    std::optional<std::string> source_path;
    std::optional<std::string> target_path;
    double val_fraction = 0.2;
    TrainConfig train;
    std::vector<std::uint64_t> seeds = {0};
    std::string out_dir = ".";
};

// Parses and schema-validates the JSON document; throws ParseError /
// ValidationError with a field path on bad input.
ExperimentConfig parse_experiment_config(const std::string& text);
ExperimentConfig load_experiment_config(const std::string& path);

// Materializes the domain pair for one replicate: samples the synthetic
// family (seeded) or loads the graph files and draws seeded masks.
DomainPair realize_domain_pair(const ExperimentConfig& config, std::uint64_t seed);

// run_id = hex(config-content hash) + "-s" + seed; stable within a build.
std::string make_run_id(const std::string& config_text, std::uint64_t seed);

struct SummaryStat {
    double mean = 0.0;
    double std_dev = 0.0;  // unbiased (n-1); 0 for a single value
    std::size_t n = 0;
};

SummaryStat summarize(const std::vector<double>& values);

}  // namespace strurw
