#include "strurw/shift_stats.hpp"

#include <cmath>
#include <limits>

#include <json.hpp>

namespace strurw {

using json = nlohmann::json;

std::string BlockMatrix::to_json() const {
    json doc;
    doc["k"] = k;
    json rows = json::array();
    for (int i = 0; i < k; ++i) {
        json row = json::array();
        for (int j = 0; j < k; ++j) row.push_back(at(i, j));
        rows.push_back(std::move(row));
    }
    doc["entries"] = std::move(rows);
    return doc.dump();
}

BlockMatrix BlockMatrix::from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("block matrix parse error: ") + e.what());
    }
    try {
        BlockMatrix B(doc.at("k").get<int>());
        const auto& rows = doc.at("entries");
        if (static_cast<int>(rows.size()) != B.k) throw ParseError("block matrix: row count does not match k");
        for (int i = 0; i < B.k; ++i) {
            if (static_cast<int>(rows[i].size()) != B.k) throw ParseError("block matrix: column count does not match k");
            for (int j = 0; j < B.k; ++j) B.at(i, j) = rows[i][j].get<double>();
        }
        return B;
    } catch (const json::exception& e) {
        throw ParseError(std::string("block matrix document invalid: ") + e.what());
    }
}

BlockEstimate estimate_block_matrix(const LabeledGraph& g, const std::vector<int>& labels) {
    const int k = g.num_classes();
    if (labels.size() != static_cast<std::size_t>(g.num_nodes()))
        throw ValidationError("labels size does not match num_nodes");
    std::vector<std::size_t> class_size(k, 0);
    for (int y : labels) {
        if (y < 0 || y >= k) throw ValidationError("estimate_block_matrix requires a label in [0,k) for every node");
        ++class_size[y];
    }

    BlockEstimate out;
    out.B = BlockMatrix(k);
    std::vector<std::size_t> counts(static_cast<std::size_t>(k) * k, 0);
    const auto& offsets = g.offsets();
    const auto& nbr = g.nbr();
    for (int v = 0; v < g.num_nodes(); ++v) {
        const int yv = labels[v];
        for (std::size_t e = offsets[v]; e < offsets[static_cast<std::size_t>(v) + 1]; ++e)
            ++counts[static_cast<std::size_t>(labels[nbr[e]]) * k + yv];  // directed pair (u, v)
    }

    out.degenerate_class.resize(k, false);
    for (int i = 0; i < k; ++i)
        if (class_size[i] == 0) {
            out.degenerate_class[i] = true;
            out.any_degenerate = true;
        }
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) {
            if (out.degenerate_class[i] || out.degenerate_class[j]) continue;
            out.B.at(i, j) = static_cast<double>(counts[static_cast<std::size_t>(i) * k + j]) /
                             (static_cast<double>(class_size[i]) * static_cast<double>(class_size[j]));
        }
    return out;
}

CssResult css_metric(const BlockMatrix& Bs, const BlockMatrix& Bt) {
    if (Bs.k != Bt.k) throw ValidationError("css_metric: class counts differ");
    const int k = Bs.k;
    CssResult out;
    out.delta.resize(static_cast<std::size_t>(k) * k, 0.0);
    double sum = 0.0;
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) {
            const double s = Bs.at(i, j), t = Bt.at(i, j);
            double d;
            if (s == 0.0 && t == 0.0) {
                d = 0.0;
            } else if (s == 0.0 || t == 0.0) {
                d = std::numeric_limits<double>::infinity();
                out.unbounded = true;
            } else {
                const double diff = std::abs(s - t);
                d = 0.5 * (diff / s + diff / t);
            }
            out.delta[static_cast<std::size_t>(i) * k + j] = d;
            sum += d;
        }
    out.value = sum / (static_cast<double>(k) * k);
    return out;
}

}  // namespace strurw
