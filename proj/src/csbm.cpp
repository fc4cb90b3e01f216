#include "strurw/csbm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "strurw/rng.hpp"

namespace strurw {

namespace {

void validate(const CsbmParams& params) {
    const int k = static_cast<int>(params.n_per_class.size());
    if (k < 1) throw ValidationError("csbm: need at least one class");
    for (int n : params.n_per_class)
        if (n < 0) throw ValidationError("csbm: negative class size");
    if (params.B.k != k) throw ValidationError("csbm: B size does not match class count");
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) {
            const double b = params.B.at(i, j);
            if (!(b >= 0.0 && b <= 1.0)) throw ValidationError("csbm: B entries must lie in [0,1]");
            if (params.B.at(i, j) != params.B.at(j, i)) throw ValidationError("csbm: B must be symmetric");
        }
    if (const auto* g = std::get_if<GaussianAttrs>(&params.attr_model)) {
        if (static_cast<int>(g->means.size()) != k)
            throw ValidationError("csbm: gaussian mean count does not match class count");
        for (const auto& m : g->means)
            if (m.size() != g->means.front().size()) throw ValidationError("csbm: gaussian means have mixed dims");
    } else {
        const auto& mv = std::get<DiscreteMvAttrs>(params.attr_model);
        if (k != 2) throw ValidationError("csbm: discrete_mv attrs are only defined for k=2");
        if (!(mv.r > 0.0 && mv.r < 1.0)) throw ValidationError("csbm: r must lie in (0,1)");
    }
}

// Bernoulli(p) over pair indices [0, count) via geometric skipping.
template <typename Emit>
void sample_block(std::uint64_t count, double p, Xoshiro256& rng, Emit&& emit) {
    if (p <= 0.0 || count == 0) return;
    if (p >= 1.0) {
        for (std::uint64_t t = 0; t < count; ++t) emit(t);
        return;
    }
    const double log1mp = std::log1p(-p);
    double pos = -1.0;
    for (;;) {
        double u = rng.uniform();
        // skip ~ Geometric(p): failures before the next success
        double skip = std::floor(std::log1p(-u) / log1mp);
        pos += skip + 1.0;
        if (pos >= static_cast<double>(count)) return;
        emit(static_cast<std::uint64_t>(pos));
    }
}

}  // namespace

LabeledGraph sample_csbm(const CsbmParams& params) {
    validate(params);
    const int k = static_cast<int>(params.n_per_class.size());
    std::vector<int> class_start(k + 1, 0);
    for (int i = 0; i < k; ++i) class_start[i + 1] = class_start[i] + params.n_per_class[i];
    const int n = class_start[k];

    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < k; ++i) {
        for (int j = i; j < k; ++j) {
            const double p = params.B.at(i, j);
            auto rng = substream(params.seed, 1, static_cast<std::uint64_t>(i) * k + j);
            if (i == j) {
                const std::uint64_t ni = params.n_per_class[i];
                if (ni < 2) continue;
                const std::uint64_t count = ni * (ni - 1) / 2;
                // Walk the triangular pair order (a,b), a<b, advancing by skips.
                std::uint64_t row = 0, col = 1, consumed = 0;
                sample_block(count, p, rng, [&](std::uint64_t t) {
                    std::uint64_t step = t - consumed;
                    while (step > 0) {
                        const std::uint64_t left_in_row = ni - col;
                        if (step < left_in_row) {
                            col += step;
                            step = 0;
                        } else {
                            step -= left_in_row;
                            ++row;
                            col = row + 1;
                        }
                    }
                    consumed = t;
                    edges.emplace_back(class_start[i] + static_cast<int>(row), class_start[i] + static_cast<int>(col));
                });
            } else {
                const std::uint64_t nj = params.n_per_class[j];
                if (nj == 0) continue;
                const std::uint64_t count = static_cast<std::uint64_t>(params.n_per_class[i]) * nj;
                sample_block(count, p, rng, [&](std::uint64_t t) {
                    edges.emplace_back(class_start[i] + static_cast<int>(t / nj),
                                       class_start[j] + static_cast<int>(t % nj));
                });
            }
        }
    }

    std::vector<int> labels(n);
    for (int i = 0; i < k; ++i)
        std::fill(labels.begin() + class_start[i], labels.begin() + class_start[i + 1], i);

    std::vector<double> attrs;
    int attr_dim;
    if (const auto* gauss = std::get_if<GaussianAttrs>(&params.attr_model)) {
        attr_dim = static_cast<int>(gauss->means.front().size());
        attrs.resize(static_cast<std::size_t>(n) * attr_dim);
        for (int v = 0; v < n; ++v) {
            auto rng = substream(params.seed, 2, static_cast<std::uint64_t>(v));
            const auto& mean = gauss->means[labels[v]];
            for (int d = 0; d < attr_dim; ++d) {
                // Box-Muller; one draw per dimension, second variate discarded
                const double u1 = std::max(rng.uniform(), 1e-300);
                const double u2 = rng.uniform();
                attrs[static_cast<std::size_t>(v) * attr_dim + d] =
                    mean[d] + std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
            }
        }
    } else {
        const double r = std::get<DiscreteMvAttrs>(params.attr_model).r;
        attr_dim = 3;
        attrs.assign(static_cast<std::size_t>(n) * 3, 0.0);
        for (int v = 0; v < n; ++v) {
            auto rng = substream(params.seed, 2, static_cast<std::uint64_t>(v));
            const int symbol = rng.uniform() < r ? labels[v] : kMvSymbol;
            attrs[static_cast<std::size_t>(v) * 3 + symbol] = 1.0;
        }
    }

    return LabeledGraph::build(n, edges, std::move(attrs), attr_dim, std::move(labels), k);
}

CsbmParams example41_params(int n, double p, double delta, double r, Domain domain, std::uint64_t seed) {
    if (n <= 0 || n % 2 != 0) throw ValidationError("example41: n must be positive and even");
    if (!(p > 0.0 && p < 0.5)) throw ValidationError("example41: p must lie in (0, 1/2)");
    if (!(r > 0.0 && r < 1.0)) throw ValidationError("example41: r must lie in (0, 1)");
    if (delta == 0.0 || std::abs(delta) > p) throw ValidationError("example41: delta must lie in [-p, p] \\ {0}");

    CsbmParams params;
    params.n_per_class = {n / 2, n / 2};
    params.B = BlockMatrix(2, p);
    if (domain == Domain::source)
        params.B.at(1, 1) = p - delta;
    else
        params.B.at(0, 0) = p + delta;
    params.attr_model = DiscreteMvAttrs{r};
    params.seed = seed;
    return params;
}

LabeledGraph sample_example41(int n, double p, double delta, double r, Domain domain, std::uint64_t seed) {
    return sample_csbm(example41_params(n, p, delta, r, domain, seed));
}

DomainPair sample_domain_pair(const ShiftSpec& spec, double val_fraction, std::uint64_t seed) {
    if (!(val_fraction > 0.0 && val_fraction < 1.0))
        throw ValidationError("val_fraction must lie in (0, 1)");

    DomainPair pair;
    CsbmParams src = spec.source;
    src.seed = substream_seed(seed, 10);
    CsbmParams tgt = spec.target;
    tgt.seed = substream_seed(seed, 11);
    pair.source = sample_csbm(src);
    pair.target = sample_csbm(tgt);
    if (pair.source.num_classes() != pair.target.num_classes())
        throw ValidationError("domain pair: class counts differ");
    if (pair.source.attr_dim() != pair.target.attr_dim())
        throw ValidationError("domain pair: attribute dims differ");

    // Stratified val/test split over target nodes.
    auto rng = substream(seed, 12);
    const auto& labels = pair.target.labels();
    std::vector<std::vector<int>> by_class(pair.target.num_classes());
    for (int v = 0; v < pair.target.num_nodes(); ++v) by_class[labels[v]].push_back(v);
    for (auto& members : by_class) {
        // Fisher-Yates with the mask substream
        for (std::size_t i = members.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(rng.uniform() * static_cast<double>(i));
            if (j >= i) j = i - 1;
            std::swap(members[i - 1], members[j]);
        }
        const std::size_t n_val = static_cast<std::size_t>(
            std::llround(val_fraction * static_cast<double>(members.size())));
        for (std::size_t i = 0; i < members.size(); ++i)
            (i < n_val ? pair.target_val_mask : pair.target_test_mask).push_back(members[i]);
    }
    std::sort(pair.target_val_mask.begin(), pair.target_val_mask.end());
    std::sort(pair.target_test_mask.begin(), pair.target_test_mask.end());
    return pair;
}

}  // namespace strurw
