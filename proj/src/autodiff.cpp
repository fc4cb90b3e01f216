#include "strurw/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

namespace strurw::ad {

Tape::Id Tape::push(Mat value, std::function<void(Tape&)> back) {
    Node node;
    node.grad = Mat(value.rows, value.cols);
    node.value = std::move(value);
    node.back = std::move(back);
    nodes_.push_back(std::move(node));
    return nodes_.size() - 1;
}

void Tape::check_finite(const Mat& m, const char* op) const {
    for (double x : m.v)
        if (!std::isfinite(x)) throw NumericsError(std::string("nonfinite value produced by ") + op);
}

Tape::Id Tape::input(Mat value) {
    check_finite(value, "input");
    return push(std::move(value), nullptr);
}

Tape::Id Tape::matmul(Id a, Id b) {
    const Mat& A = value(a);
    const Mat& B = value(b);
    if (A.cols != B.rows) throw NumericsError("matmul: inner dims disagree");
    Mat C(A.rows, B.cols);
    for (int i = 0; i < A.rows; ++i)
        for (int kk = 0; kk < A.cols; ++kk) {
            const double aik = A.at(i, kk);
            if (aik == 0.0) continue;
            for (int j = 0; j < B.cols; ++j) C.at(i, j) += aik * B.at(kk, j);
        }
    check_finite(C, "matmul");
    Id out = push(std::move(C), nullptr);
    // dA += dC * B^T ; dB += A^T * dC
    nodes_[out].back = [a, b, out](Tape& t) {
        const Mat& A = t.value(a);
        const Mat& B = t.value(b);
        const Mat& dC = t.grad(out);
        Mat& dA = t.grad_mut(a);
        Mat& dB = t.grad_mut(b);
        for (int i = 0; i < A.rows; ++i)
            for (int j = 0; j < B.cols; ++j) {
                const double g = dC.at(i, j);
                if (g == 0.0) continue;
                for (int kk = 0; kk < A.cols; ++kk) {
                    dA.at(i, kk) += g * B.at(kk, j);
                    dB.at(kk, j) += A.at(i, kk) * g;
                }
            }
    };
    return out;
}

Tape::Id Tape::add(Id a, Id b) {
    const Mat& A = value(a);
    const Mat& B = value(b);
    if (A.rows != B.rows || A.cols != B.cols) throw NumericsError("add: shapes disagree");
    Mat C = A;
    for (std::size_t i = 0; i < C.size(); ++i) C.v[i] += B.v[i];
    check_finite(C, "add");
    Id out = push(std::move(C), nullptr);
    nodes_[out].back = [a, b, out](Tape& t) {
        const Mat& dC = t.grad(out);
        Mat& dA = t.grad_mut(a);
        Mat& dB = t.grad_mut(b);
        for (std::size_t i = 0; i < dC.size(); ++i) {
            dA.v[i] += dC.v[i];
            dB.v[i] += dC.v[i];
        }
    };
    return out;
}

Tape::Id Tape::add_bias(Id a, Id bias) {
    const Mat& A = value(a);
    const Mat& B = value(bias);
    if (B.rows != 1 || B.cols != A.cols) throw NumericsError("add_bias: bias must be 1 x cols");
    Mat C = A;
    for (int i = 0; i < C.rows; ++i)
        for (int j = 0; j < C.cols; ++j) C.at(i, j) += B.at(0, j);
    check_finite(C, "add_bias");
    Id out = push(std::move(C), nullptr);
    nodes_[out].back = [a, bias, out](Tape& t) {
        const Mat& dC = t.grad(out);
        Mat& dA = t.grad_mut(a);
        Mat& dB = t.grad_mut(bias);
        for (int i = 0; i < dC.rows; ++i)
            for (int j = 0; j < dC.cols; ++j) {
                dA.at(i, j) += dC.at(i, j);
                dB.at(0, j) += dC.at(i, j);
            }
    };
    return out;
}

Tape::Id Tape::relu(Id a) {
    Mat C = value(a);
    for (double& x : C.v) x = x > 0.0 ? x : 0.0;
    Id out = push(std::move(C), nullptr);
    nodes_[out].back = [a, out](Tape& t) {
        const Mat& A = t.value(a);
        const Mat& dC = t.grad(out);
        Mat& dA = t.grad_mut(a);
        for (std::size_t i = 0; i < dC.size(); ++i)
            if (A.v[i] > 0.0) dA.v[i] += dC.v[i];
    };
    return out;
}

Tape::Id Tape::concat_rows(Id a, Id b) {
    const Mat& A = value(a);
    const Mat& B = value(b);
    if (A.cols != B.cols) throw NumericsError("concat_rows: column counts disagree");
    Mat C(A.rows + B.rows, A.cols);
    std::copy(A.v.begin(), A.v.end(), C.v.begin());
    std::copy(B.v.begin(), B.v.end(), C.v.begin() + A.v.size());
    Id out = push(std::move(C), nullptr);
    nodes_[out].back = [a, b, out](Tape& t) {
        const Mat& dC = t.grad(out);
        Mat& dA = t.grad_mut(a);
        Mat& dB = t.grad_mut(b);
        for (std::size_t i = 0; i < dA.size(); ++i) dA.v[i] += dC.v[i];
        for (std::size_t i = 0; i < dB.size(); ++i) dB.v[i] += dC.v[dA.size() + i];
    };
    return out;
}

Tape::Id Tape::permute_rows(Id a, const std::vector<int>& perm) {
    const Mat& A = value(a);
    if (perm.size() != static_cast<std::size_t>(A.rows))
        throw NumericsError("permute_rows: permutation length does not match rows");
    Mat C(A.rows, A.cols);
    for (int i = 0; i < A.rows; ++i) {
        const int src = perm[i];
        if (src < 0 || src >= A.rows) throw NumericsError("permute_rows: index out of range");
        for (int j = 0; j < A.cols; ++j) C.at(i, j) = A.at(src, j);
    }
    Id out = push(std::move(C), nullptr);
    nodes_[out].back = [a, perm, out](Tape& t) {
        const Mat& dC = t.grad(out);
        Mat& dA = t.grad_mut(a);
        for (int i = 0; i < dC.rows; ++i)
            for (int j = 0; j < dC.cols; ++j) dA.at(perm[i], j) += dC.at(i, j);
    };
    return out;
}

Tape::Id Tape::scalar_mul(Id a, double c) {
    Mat C = value(a);
    for (double& x : C.v) x *= c;
    check_finite(C, "scalar_mul");
    Id out = push(std::move(C), nullptr);
    nodes_[out].back = [a, c, out](Tape& t) {
        const Mat& dC = t.grad(out);
        Mat& dA = t.grad_mut(a);
        for (std::size_t i = 0; i < dC.size(); ++i) dA.v[i] += c * dC.v[i];
    };
    return out;
}

Tape::Id Tape::grad_reversal(Id a, double alpha) {
    Mat C = value(a);  // forward identity, exactly
    Id out = push(std::move(C), nullptr);
    nodes_[out].back = [a, alpha, out](Tape& t) {
        const Mat& dC = t.grad(out);
        Mat& dA = t.grad_mut(a);
        for (std::size_t i = 0; i < dC.size(); ++i) dA.v[i] += -alpha * dC.v[i];
    };
    return out;
}

Tape::Id Tape::neighbor_agg(Id h, const LabeledGraph& g, bool mean, bool include_self) {
    const Mat& H = value(h);
    if (H.rows != g.num_nodes()) throw NumericsError("neighbor_agg: row count does not match num_nodes");
    const auto& offsets = g.offsets();
    const auto& nbr = g.nbr();
    Mat C(H.rows, H.cols);
    std::vector<double> wsum(static_cast<std::size_t>(H.rows), 0.0);
    for (int v = 0; v < H.rows; ++v) {
        for (std::size_t e = offsets[v]; e < offsets[static_cast<std::size_t>(v) + 1]; ++e) {
            const int u = nbr[e];
            const double w = g.edge_weight(e);
            wsum[v] += w;
            for (int j = 0; j < H.cols; ++j) C.at(v, j) += w * H.at(u, j);
        }
        if (include_self) {
            wsum[v] += 1.0;
            for (int j = 0; j < H.cols; ++j) C.at(v, j) += H.at(v, j);
        }
        if (mean && wsum[v] > 0.0)
            for (int j = 0; j < H.cols; ++j) C.at(v, j) /= wsum[v];
    }
    check_finite(C, "neighbor_agg");
    Id out = push(std::move(C), nullptr);
    nodes_[out].back = [h, &g, mean, include_self, wsum = std::move(wsum), out](Tape& t) {
        const Mat& dC = t.grad(out);
        Mat& dH = t.grad_mut(h);
        const auto& offsets = g.offsets();
        const auto& nbr = g.nbr();
        for (int v = 0; v < dC.rows; ++v) {
            const double denom = mean && wsum[v] > 0.0 ? wsum[v] : 1.0;
            for (std::size_t e = offsets[v]; e < offsets[static_cast<std::size_t>(v) + 1]; ++e) {
                const int u = nbr[e];
                const double scale = g.edge_weight(e) / denom;
                for (int j = 0; j < dC.cols; ++j) dH.at(u, j) += scale * dC.at(v, j);
            }
            if (include_self)
                for (int j = 0; j < dC.cols; ++j) dH.at(v, j) += dC.at(v, j) / denom;
        }
    };
    return out;
}

Tape::Id Tape::softmax_cross_entropy(Id logits, const std::vector<int>& labels,
                                     const std::vector<double>* row_weights) {
    const Mat& Z = value(logits);
    if (labels.size() != static_cast<std::size_t>(Z.rows))
        throw NumericsError("softmax_cross_entropy: label count does not match rows");
    if (row_weights && row_weights->size() != labels.size())
        throw NumericsError("softmax_cross_entropy: row weight count does not match rows");

    // Cache softmax rows for the backward pass.
    auto probs = std::make_shared<Mat>(Z.rows, Z.cols);
    double total = 0.0;
    std::size_t included = 0;
    for (int i = 0; i < Z.rows; ++i) {
        double mx = Z.at(i, 0);
        for (int j = 1; j < Z.cols; ++j) mx = std::max(mx, Z.at(i, j));
        double denom = 0.0;
        for (int j = 0; j < Z.cols; ++j) denom += std::exp(Z.at(i, j) - mx);
        for (int j = 0; j < Z.cols; ++j) probs->at(i, j) = std::exp(Z.at(i, j) - mx) / denom;
        const int y = labels[i];
        if (y == kUnknownLabel) continue;
        if (y < 0 || y >= Z.cols) throw NumericsError("softmax_cross_entropy: label out of range");
        const double w = row_weights ? (*row_weights)[i] : 1.0;
        total += w * (-(Z.at(i, y) - mx) + std::log(denom));
        ++included;
    }
    if (included == 0) throw NumericsError("softmax_cross_entropy: no labeled rows");
    Mat C(1, 1);
    C.at(0, 0) = total / static_cast<double>(included);
    check_finite(C, "softmax_cross_entropy");
    Id out = push(std::move(C), nullptr);
    nodes_[out].back = [logits, labels, row_weights_copy = row_weights ? *row_weights : std::vector<double>{},
                        has_w = row_weights != nullptr, probs, included, out](Tape& t) {
        const double g0 = t.grad(out).at(0, 0);
        Mat& dZ = t.grad_mut(logits);
        const double inv = 1.0 / static_cast<double>(included);
        for (int i = 0; i < dZ.rows; ++i) {
            const int y = labels[i];
            if (y == kUnknownLabel) continue;
            const double w = has_w ? row_weights_copy[i] : 1.0;
            for (int j = 0; j < dZ.cols; ++j) {
                const double p = probs->at(i, j);
                dZ.at(i, j) += g0 * inv * w * (p - (j == y ? 1.0 : 0.0));
            }
        }
    };
    return out;
}

Tape::Id Tape::soft_cross_entropy(Id logits, const Mat& soft_labels) {
    const Mat& Z = value(logits);
    if (soft_labels.rows != Z.rows || soft_labels.cols != Z.cols)
        throw NumericsError("soft_cross_entropy: shapes disagree");
    auto probs = std::make_shared<Mat>(Z.rows, Z.cols);
    double total = 0.0;
    for (int i = 0; i < Z.rows; ++i) {
        double mx = Z.at(i, 0);
        for (int j = 1; j < Z.cols; ++j) mx = std::max(mx, Z.at(i, j));
        double denom = 0.0;
        for (int j = 0; j < Z.cols; ++j) denom += std::exp(Z.at(i, j) - mx);
        const double logdenom = std::log(denom);
        for (int j = 0; j < Z.cols; ++j) {
            probs->at(i, j) = std::exp(Z.at(i, j) - mx) / denom;
            total += soft_labels.at(i, j) * (-(Z.at(i, j) - mx) + logdenom);
        }
    }
    if (Z.rows == 0) throw NumericsError("soft_cross_entropy: empty batch");
    Mat C(1, 1);
    C.at(0, 0) = total / static_cast<double>(Z.rows);
    check_finite(C, "soft_cross_entropy");
    Id out = push(std::move(C), nullptr);
    nodes_[out].back = [logits, soft = soft_labels, probs, out](Tape& t) {
        const double g0 = t.grad(out).at(0, 0);
        Mat& dZ = t.grad_mut(logits);
        const double inv = 1.0 / static_cast<double>(dZ.rows);
        for (int i = 0; i < dZ.rows; ++i) {
            double mass = 0.0;
            for (int j = 0; j < dZ.cols; ++j) mass += soft.at(i, j);
            for (int j = 0; j < dZ.cols; ++j)
                dZ.at(i, j) += g0 * inv * (mass * probs->at(i, j) - soft.at(i, j));
        }
    };
    return out;
}

Tape::Id Tape::binary_cross_entropy_with_logits(Id logits, const std::vector<double>& targets) {
    const Mat& Z = value(logits);
    if (Z.cols != 1) throw NumericsError("binary_cross_entropy_with_logits: logits must be n x 1");
    if (targets.size() != static_cast<std::size_t>(Z.rows))
        throw NumericsError("binary_cross_entropy_with_logits: target count does not match rows");
    if (Z.rows == 0) throw NumericsError("binary_cross_entropy_with_logits: empty batch");
    double total = 0.0;
    for (int i = 0; i < Z.rows; ++i) {
        const double z = Z.at(i, 0);
        // log(1 + exp(-|z|)) + max(z, 0) - y * z, numerically stable
        total += std::log1p(std::exp(-std::abs(z))) + std::max(z, 0.0) - targets[i] * z;
    }
    Mat C(1, 1);
    C.at(0, 0) = total / static_cast<double>(Z.rows);
    check_finite(C, "binary_cross_entropy_with_logits");
    Id out = push(std::move(C), nullptr);
    nodes_[out].back = [logits, targets, out](Tape& t) {
        const double g0 = t.grad(out).at(0, 0);
        Mat& dZ = t.grad_mut(logits);
        const Mat& Z = t.value(logits);
        const double inv = 1.0 / static_cast<double>(Z.rows);
        for (int i = 0; i < Z.rows; ++i) {
            const double sigma = 1.0 / (1.0 + std::exp(-Z.at(i, 0)));
            dZ.at(i, 0) += g0 * inv * (sigma - targets[i]);
        }
    };
    return out;
}

void Tape::backward(Id loss) {
    if (nodes_.empty()) throw NumericsError("backward: empty tape");
    const Mat& L = value(loss);
    if (L.rows != 1 || L.cols != 1) throw NumericsError("backward: loss must be scalar");
    grad_mut(loss).at(0, 0) = 1.0;
    for (std::size_t i = loss + 1; i-- > 0;)
        if (nodes_[i].back) nodes_[i].back(*this);
}

void adam_step(Mat& params, const Mat& grads, AdamState& state, const AdamConfig& cfg) {
    if (params.rows != grads.rows || params.cols != grads.cols)
        throw NumericsError("adam_step: shapes disagree");
    for (double g : grads.v)
        if (!std::isfinite(g)) throw NumericsError("adam_step: nonfinite gradient");
    if (state.step == 0) {
        state.m = Mat(params.rows, params.cols);
        state.v = Mat(params.rows, params.cols);
    }
    ++state.step;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
    for (std::size_t i = 0; i < params.size(); ++i) {
        state.m.v[i] = cfg.beta1 * state.m.v[i] + (1.0 - cfg.beta1) * grads.v[i];
        state.v.v[i] = cfg.beta2 * state.v.v[i] + (1.0 - cfg.beta2) * grads.v[i] * grads.v[i];
        const double mhat = state.m.v[i] / bc1;
        const double vhat = state.v.v[i] / bc2;
        params.v[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
    }
}

}  // namespace strurw::ad
