#pragma once

// Empirical verification of the binary missing-value construction: the
// cross-domain multiset-distribution identity, the explicit thresholding
// classifier and its error bound, and the attribute-alignment check.

#include <cstdint>
#include <vector>

#include "strurw/graph.hpp"

namespace strurw {

struct MultisetFeature {
    int c0 = 0;  // value-0 neighbors
    int c1 = 0;  // value-1 neighbors
    int c2 = 0;  // M.V. neighbors
    bool operator==(const MultisetFeature&) const = default;
};

struct NodeMultiset {
    int node = 0;
    int label = 0;
    MultisetFeature feature;
};

// One entry per M.V. node: counts of the neighbor attribute symbols.
// Requires the one-hot {0, 1, M.V.} attribute alphabet.
std::vector<NodeMultiset> collect_multisets(const LabeledGraph& g);

// Threshold (c0 - c1)/n against delta*r/4 (the Hoeffding midpoint between
// the two class-conditional means); exact equality breaks toward class 1
// (measure-zero in the model). p is unused and kept for signature symmetry.
int hoeffding_classifier(const MultisetFeature& f, int n, double p, double delta, double r);

struct HoeffdingReport {
    double error = 0.0;
    std::size_t evaluated = 0;  // number of M.V. nodes classified
};

// Empirical target-domain error of the thresholding classifier on the
// M.V. nodes of one sampled target graph.
HoeffdingReport hoeffding_target_error(int n, double p, double delta, double r, std::uint64_t seed);

enum class IdentityMode {
    matched,   // source class-0 vs target class-1: identical laws by construction
    contrast,  // source class-1 vs target class-1: laws differ by delta
};

struct TvReport {
    double tv = 0.0;
    std::size_t samples_per_side = 0;
    int bins = 0;
};

// Empirical total-variation distance between two multiset distributions,
// over tercile-binned (c0, c1, c2) (27 cells, pooled-quantile cuts).
// Samples accumulate across independently seeded graphs until
// num_samples per side. num_samples must be >= 1000.
TvReport distribution_identity_check(int n, double p, double delta, double r,
                                     std::size_t num_samples, IdentityMode mode, std::uint64_t seed);

struct AlignmentReport {
    double statistic = 0.0;  // energy distance between the two samples
    double p_value = 0.0;    // permutation p-value, never exactly 0
};

// Energy-distance permutation two-sample test; rows of a and b are
// observations.
AlignmentReport energy_permutation_test(const std::vector<std::vector<double>>& a,
                                        const std::vector<std::vector<double>>& b, int num_permutations,
                                        std::uint64_t seed);

// Builds an S/T pair with a shared structure law and a known affine
// attribute shift, optionally undoes the shift on the target, pushes both
// graphs through a fixed random untrained encoder, and tests whether the
// marginal last-layer representations are distribution-invariant.
AlignmentReport conditional_alignment_check(bool apply_alignment, std::uint64_t seed);

}  // namespace strurw
