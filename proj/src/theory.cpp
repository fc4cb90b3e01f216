#include "strurw/theory.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>

#include "strurw/csbm.hpp"
#include "strurw/gnn.hpp"
#include "strurw/rng.hpp"

namespace strurw {

namespace {

// Decodes the one-hot {0, 1, M.V.} alphabet; throws on anything else.
int attr_symbol(const LabeledGraph& g, int v) {
    if (g.attr_dim() != 3) throw ValidationError("collect_multisets: expected 3-dim one-hot attributes");
    const double* row = g.attr_row(v);
    int symbol = -1;
    for (int j = 0; j < 3; ++j) {
        if (row[j] == 1.0) {
            if (symbol != -1) throw ValidationError("collect_multisets: attribute row is not one-hot");
            symbol = j;
        } else if (row[j] != 0.0) {
            throw ValidationError("collect_multisets: attribute row is not one-hot");
        }
    }
    if (symbol == -1) throw ValidationError("collect_multisets: attribute row is not one-hot");
    return symbol;
}

MultisetFeature neighbor_counts(const LabeledGraph& g, int v) {
    MultisetFeature f;
    const auto& offsets = g.offsets();
    const auto& nbr = g.nbr();
    for (std::size_t e = offsets[v]; e < offsets[static_cast<std::size_t>(v) + 1]; ++e) {
        switch (attr_symbol(g, nbr[e])) {
            case 0: ++f.c0; break;
            case 1: ++f.c1; break;
            default: ++f.c2; break;
        }
    }
    return f;
}

}  // namespace

std::vector<NodeMultiset> collect_multisets(const LabeledGraph& g) {
    std::vector<NodeMultiset> out;
    for (int v = 0; v < g.num_nodes(); ++v) {
        if (attr_symbol(g, v) != kMvSymbol) continue;
        out.push_back({v, g.label(v), neighbor_counts(g, v)});
    }
    return out;
}

int hoeffding_classifier(const MultisetFeature& f, int n, double p, double delta, double r) {
    // Midpoint of E[(c0-c1)/n | Y=0] = delta*r/2 and E[... | Y=1] = 0; the
    // Hoeffding argument with t = delta*r/4 gives error <= 2exp(-n d^2 r^2/32).
    (void)p;
    const double threshold = delta * r / 4.0;
    const double h = static_cast<double>(f.c0 - f.c1) / static_cast<double>(n);
    return h > threshold ? 0 : 1;
}

HoeffdingReport hoeffding_target_error(int n, double p, double delta, double r, std::uint64_t seed) {
    const LabeledGraph g = sample_example41(n, p, delta, r, Domain::target, seed);
    HoeffdingReport report;
    std::size_t wrong = 0;
    for (const auto& ms : collect_multisets(g)) {
        ++report.evaluated;
        if (hoeffding_classifier(ms.feature, n, p, delta, r) != ms.label) ++wrong;
    }
    if (report.evaluated > 0)
        report.error = static_cast<double>(wrong) / static_cast<double>(report.evaluated);
    return report;
}

namespace {

// Per-coordinate tercile cuts from the pooled sample, 3^3 cells.
int tercile_bin(int value, const std::array<int, 2>& cuts) {
    if (value < cuts[0]) return 0;
    if (value < cuts[1]) return 1;
    return 2;
}

std::array<int, 2> tercile_cuts(std::vector<int> values) {
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return {values[n / 3], values[(2 * n) / 3]};
}

}  // namespace

TvReport distribution_identity_check(int n, double p, double delta, double r,
                                     std::size_t num_samples, IdentityMode mode, std::uint64_t seed) {
    if (num_samples < 1000)
        throw ValidationError("distribution_identity_check: need at least 1000 samples per side");

    // matched: source class-0 vs target class-1; contrast: source class-1
    // vs target class-1 (that pair's laws differ by delta).
    const int class_a = mode == IdentityMode::matched ? 0 : 1;
    const int class_b = 1;

    // Nodes within one graph are positively correlated (shared neighbor
    // attributes), so take only a few per graph and average over many
    // independent graphs.
    const std::size_t per_graph = 100;
    auto collect_side = [&](Domain domain, int cls, std::uint64_t side_tag) {
        std::vector<MultisetFeature> out;
        std::uint64_t graph_index = 0;
        while (out.size() < num_samples) {
            const LabeledGraph g =
                sample_example41(n, p, delta, r, domain, substream_seed(seed, side_tag, graph_index++));
            std::size_t taken = 0;
            for (int v = 0; v < g.num_nodes() && out.size() < num_samples && taken < per_graph; ++v)
                if (g.label(v) == cls) {
                    out.push_back(neighbor_counts(g, v));
                    ++taken;
                }
        }
        return out;
    };
    const auto side_a = collect_side(Domain::source, class_a, 21);
    const auto side_b = collect_side(Domain::target, class_b, 22);

    std::vector<int> c0, c1, c2;
    for (const auto* side : {&side_a, &side_b})
        for (const auto& f : *side) {
            c0.push_back(f.c0);
            c1.push_back(f.c1);
            c2.push_back(f.c2);
        }
    const auto cut0 = tercile_cuts(std::move(c0));
    const auto cut1 = tercile_cuts(std::move(c1));
    const auto cut2 = tercile_cuts(std::move(c2));

    std::array<double, 27> pa{}, pb{};
    auto cell = [&](const MultisetFeature& f) {
        return 9 * tercile_bin(f.c0, cut0) + 3 * tercile_bin(f.c1, cut1) + tercile_bin(f.c2, cut2);
    };
    for (const auto& f : side_a) pa[cell(f)] += 1.0 / static_cast<double>(side_a.size());
    for (const auto& f : side_b) pb[cell(f)] += 1.0 / static_cast<double>(side_b.size());

    TvReport report;
    report.samples_per_side = num_samples;
    report.bins = 27;
    for (int i = 0; i < 27; ++i) report.tv += 0.5 * std::abs(pa[i] - pb[i]);
    return report;
}

namespace {

double mean_cross_distance(const std::vector<std::vector<double>>& d, const std::vector<int>& idx_a,
                           const std::vector<int>& idx_b) {
    double sum = 0.0;
    for (int i : idx_a)
        for (int j : idx_b) sum += d[i][j];
    return sum / (static_cast<double>(idx_a.size()) * static_cast<double>(idx_b.size()));
}

double energy_statistic(const std::vector<std::vector<double>>& d, const std::vector<int>& idx_a,
                        const std::vector<int>& idx_b) {
    return 2.0 * mean_cross_distance(d, idx_a, idx_b) - mean_cross_distance(d, idx_a, idx_a) -
           mean_cross_distance(d, idx_b, idx_b);
}

}  // namespace

AlignmentReport energy_permutation_test(const std::vector<std::vector<double>>& a,
                                        const std::vector<std::vector<double>>& b, int num_permutations,
                                        std::uint64_t seed) {
    if (a.empty() || b.empty()) throw ValidationError("energy_permutation_test: empty sample");
    const int na = static_cast<int>(a.size());
    const int nb = static_cast<int>(b.size());
    const int n = na + nb;

    std::vector<std::vector<double>> d(n, std::vector<double>(n, 0.0));
    auto row = [&](int i) -> const std::vector<double>& { return i < na ? a[i] : b[i - na]; };
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const auto& x = row(i);
            const auto& y = row(j);
            double s = 0.0;
            for (std::size_t c = 0; c < x.size(); ++c) s += (x[c] - y[c]) * (x[c] - y[c]);
            d[i][j] = d[j][i] = std::sqrt(s);
        }

    std::vector<int> pool(n);
    for (int i = 0; i < n; ++i) pool[i] = i;
    std::vector<int> idx_a(pool.begin(), pool.begin() + na);
    std::vector<int> idx_b(pool.begin() + na, pool.end());

    AlignmentReport report;
    report.statistic = energy_statistic(d, idx_a, idx_b);

    auto rng = substream(seed, 31);
    int at_least = 0;
    for (int perm = 0; perm < num_permutations; ++perm) {
        for (std::size_t i = pool.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(rng.uniform() * static_cast<double>(i));
            if (j >= i) j = i - 1;
            std::swap(pool[i - 1], pool[j]);
        }
        std::vector<int> pa(pool.begin(), pool.begin() + na);
        std::vector<int> pb(pool.begin() + na, pool.end());
        if (energy_statistic(d, pa, pb) >= report.statistic) ++at_least;
    }
    report.p_value = static_cast<double>(1 + at_least) / static_cast<double>(1 + num_permutations);
    return report;
}

AlignmentReport conditional_alignment_check(bool apply_alignment, std::uint64_t seed) {
    // Shared structure law, known affine attribute shift on the target.
    const std::vector<double> shift = {2.5, -1.5};
    BlockMatrix B(2);
    B.at(0, 0) = B.at(1, 1) = 0.02;
    B.at(0, 1) = B.at(1, 0) = 0.005;

    CsbmParams source;
    source.n_per_class = {400, 400};
    source.B = B;
    source.attr_model = GaussianAttrs{{{0.0, 0.0}, {2.0, 0.0}}};
    source.seed = substream_seed(seed, 41);

    CsbmParams target = source;
    target.attr_model = GaussianAttrs{{{0.0 + shift[0], 0.0 + shift[1]}, {2.0 + shift[0], 0.0 + shift[1]}}};
    target.seed = substream_seed(seed, 42);

    LabeledGraph g_source = sample_csbm(source);
    LabeledGraph g_target = sample_csbm(target);
    if (apply_alignment) {
        // The alignment map subtracts the shift; label-free and exact.
        std::vector<double> attrs = g_target.attrs();
        for (std::size_t i = 0; i < attrs.size(); ++i) attrs[i] -= shift[i % 2];
        g_target = g_target.with_attrs(std::move(attrs));
    }

    ModelConfig config;
    config.encoder.input_dim = 2;
    config.encoder.hidden_dims = {16, 16};
    config.num_classes = 2;
    const ModelState model = init_model(config, substream_seed(seed, 43));

    const ad::Mat hs = forward_representations(g_source, model);
    const ad::Mat ht = forward_representations(g_target, model);

    // Marginalize: subsample nodes from each domain.
    const int per_side = 300;
    auto subsample = [&](const ad::Mat& h, int num_nodes, std::uint64_t tag) {
        auto rng = substream(seed, 44, tag);
        std::vector<int> idx(static_cast<std::size_t>(num_nodes));
        for (int i = 0; i < num_nodes; ++i) idx[i] = i;
        for (std::size_t i = idx.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(rng.uniform() * static_cast<double>(i));
            if (j >= i) j = i - 1;
            std::swap(idx[i - 1], idx[j]);
        }
        std::vector<std::vector<double>> out;
        for (int i = 0; i < per_side; ++i) {
            std::vector<double> rep(static_cast<std::size_t>(h.cols));
            for (int j = 0; j < h.cols; ++j) rep[j] = h.at(idx[i], j);
            out.push_back(std::move(rep));
        }
        return out;
    };
    const auto sample_s = subsample(hs, g_source.num_nodes(), 0);
    const auto sample_t = subsample(ht, g_target.num_nodes(), 1);

    return energy_permutation_test(sample_s, sample_t, 199, substream_seed(seed, 45));
}

}  // namespace strurw
