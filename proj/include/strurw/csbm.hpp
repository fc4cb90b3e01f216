#pragma once

// Seeded contextual stochastic block model generation: the three-class
// Gaussian setup and the binary missing-value setup.

#include <cstdint>
#include <variant>
#include <vector>

#include "strurw/graph.hpp"
#include "strurw/shift_stats.hpp"

namespace strurw {

struct GaussianAttrs {
    // One mean vector per class; identity covariance.
    std::vector<std::vector<double>> means;
};

// Binary missing-value family: a class-i node carries symbol i with
// probability r and M.V. with probability 1-r. Symbols are encoded as
// one-hot vectors in R^3: onehot(0), onehot(1), onehot(M.V.).
struct DiscreteMvAttrs {
    double r;
};

constexpr int kMvSymbol = 2;  // one-hot index of the M.V. symbol

struct CsbmParams {
    std::vector<int> n_per_class;
    BlockMatrix B;  // symmetric, entries in [0, 1]
    std::variant<GaussianAttrs, DiscreteMvAttrs> attr_model;
    std::uint64_t seed = 0;
};

struct ShiftSpec {
    CsbmParams source;
    CsbmParams target;
};

// Nodes are laid out contiguously per class (class 0 first). Each unordered
// pair (u,v), u<v, is connected independently with probability B[y_u][y_v]
// via a geometric-skipping sampler (exact Bernoulli law, one RNG substream
// per class pair); attributes are drawn i.i.d. from the class distribution,
// one substream per node.
LabeledGraph sample_csbm(const CsbmParams& params);

enum class Domain { source, target };

// B^S = [[p,p],[p,p-delta]], B^T = [[p+delta,p],[p,p]]; n/2 nodes per class.
LabeledGraph sample_example41(int n, double p, double delta, double r, Domain domain, std::uint64_t seed);

CsbmParams example41_params(int n, double p, double delta, double r, Domain domain, std::uint64_t seed);

// Two independent graphs plus stratified target val/test masks. Sub-seeds
// for source, target, and masks are derived from `seed`; the seeds stored
// in `spec` are ignored.
DomainPair sample_domain_pair(const ShiftSpec& spec, double val_fraction, std::uint64_t seed);

}  // namespace strurw
