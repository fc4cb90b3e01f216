#include "strurw/graph.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <json.hpp>

namespace strurw {

using json = nlohmann::json;

LabeledGraph LabeledGraph::build(int num_nodes, const std::vector<std::pair<int, int>>& undirected_edges,
                                 std::vector<double> attrs, int attr_dim, std::vector<int> labels,
                                 int num_classes) {
    if (num_nodes < 0) throw ValidationError("num_nodes must be nonnegative");
    if (num_classes < 1) throw ValidationError("num_classes must be >= 1");
    if (attr_dim < 0) throw ValidationError("attr_dim must be nonnegative");
    if (attrs.size() != static_cast<std::size_t>(num_nodes) * attr_dim)
        throw ValidationError("attrs size does not match num_nodes * attr_dim");
    if (labels.size() != static_cast<std::size_t>(num_nodes))
        throw ValidationError("labels size does not match num_nodes");
    for (double a : attrs)
        if (!std::isfinite(a)) throw ValidationError("attrs must be finite");
    for (int y : labels)
        if (y != kUnknownLabel && (y < 0 || y >= num_classes))
            throw ValidationError("label out of range");

    std::vector<std::size_t> degree(static_cast<std::size_t>(num_nodes) + 1, 0);
    for (auto [u, v] : undirected_edges) {
        if (u < 0 || u >= num_nodes || v < 0 || v >= num_nodes)
            throw ValidationError("edge endpoint out of range: (" + std::to_string(u) + "," + std::to_string(v) + ")");
        if (u == v) throw ValidationError("self-loops are not allowed");
        ++degree[static_cast<std::size_t>(u) + 1];
        ++degree[static_cast<std::size_t>(v) + 1];
    }

    LabeledGraph g;
    g.num_nodes_ = num_nodes;
    g.num_classes_ = num_classes;
    g.attr_dim_ = attr_dim;
    g.attrs_ = std::move(attrs);
    g.labels_ = std::move(labels);
    g.offsets_.resize(static_cast<std::size_t>(num_nodes) + 1, 0);
    for (int v = 0; v < num_nodes; ++v) g.offsets_[static_cast<std::size_t>(v) + 1] = g.offsets_[v] + degree[static_cast<std::size_t>(v) + 1];
    g.nbr_.resize(g.offsets_.back());
    std::vector<std::size_t> fill(g.offsets_.begin(), g.offsets_.end() - 1);
    for (auto [u, v] : undirected_edges) {
        g.nbr_[fill[static_cast<std::size_t>(v)]++] = u;  // directed pair (u, v): u is an in-neighbor of v
        g.nbr_[fill[static_cast<std::size_t>(u)]++] = v;
    }
    for (int v = 0; v < num_nodes; ++v) {
        auto first = g.nbr_.begin() + g.offsets_[v];
        auto last = g.nbr_.begin() + g.offsets_[static_cast<std::size_t>(v) + 1];
        std::sort(first, last);
        if (std::adjacent_find(first, last) != last)
            throw ValidationError("duplicate undirected edge at node " + std::to_string(v));
    }
    return g;
}

std::vector<NeighborRef> LabeledGraph::neighbors(int v) const {
    check_node(v);
    std::vector<NeighborRef> out;
    out.reserve(degree(v));
    for (std::size_t e = offsets_[v]; e < offsets_[static_cast<std::size_t>(v) + 1]; ++e)
        out.push_back({nbr_[e], edge_weight(e)});
    return out;
}

std::string LabeledGraph::serialize() const {
    json doc;
    doc["num_nodes"] = num_nodes_;
    doc["num_classes"] = num_classes_;
    doc["attr_dim"] = attr_dim_;

    json edges = json::array();
    for (int v = 0; v < num_nodes_; ++v)
        for (std::size_t e = offsets_[v]; e < offsets_[static_cast<std::size_t>(v) + 1]; ++e)
            if (nbr_[e] < v) edges.push_back({nbr_[e], v});
    doc["edges"] = std::move(edges);

    json attrs = json::array();
    for (int v = 0; v < num_nodes_; ++v) {
        json row = json::array();
        for (int j = 0; j < attr_dim_; ++j) row.push_back(attrs_[static_cast<std::size_t>(v) * attr_dim_ + j]);
        attrs.push_back(std::move(row));
    }
    doc["attrs"] = std::move(attrs);

    json labels = json::array();
    for (int y : labels_) {
        if (y == kUnknownLabel)
            labels.push_back(nullptr);
        else
            labels.push_back(y);
    }
    doc["labels"] = std::move(labels);

    if (!edge_weights_.empty()) {
        // [u, v, w_uv, w_vu] with u < v; w_uv is the weight of the message u -> v.
        std::map<std::pair<int, int>, std::pair<double, double>> by_pair;
        for (int v = 0; v < num_nodes_; ++v) {
            for (std::size_t e = offsets_[v]; e < offsets_[static_cast<std::size_t>(v) + 1]; ++e) {
                int u = nbr_[e];
                auto key = std::minmax(u, v);
                auto& slot = by_pair[key];
                if (u < v)
                    slot.first = edge_weights_[e];  // message u -> v with u < v
                else
                    slot.second = edge_weights_[e];
            }
        }
        json weights = json::array();
        for (const auto& [key, w] : by_pair) weights.push_back({key.first, key.second, w.first, w.second});
        doc["edge_weights"] = std::move(weights);
    }
    return doc.dump();
}

LabeledGraph LabeledGraph::deserialize(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("graph parse error: ") + e.what());
    }
    try {
        int num_nodes = doc.at("num_nodes").get<int>();
        int num_classes = doc.at("num_classes").get<int>();
        int attr_dim = doc.at("attr_dim").get<int>();

        std::vector<std::pair<int, int>> edges;
        for (const auto& e : doc.at("edges")) {
            if (!e.is_array() || e.size() != 2) throw ParseError("field 'edges': each entry must be [u, v]");
            edges.emplace_back(e[0].get<int>(), e[1].get<int>());
        }

        std::vector<double> attrs;
        attrs.reserve(static_cast<std::size_t>(num_nodes) * std::max(attr_dim, 0));
        for (const auto& row : doc.at("attrs")) {
            if (static_cast<int>(row.size()) != attr_dim) throw ParseError("field 'attrs': row width does not match attr_dim");
            for (const auto& x : row) attrs.push_back(x.get<double>());
        }

        std::vector<int> labels;
        for (const auto& y : doc.at("labels")) labels.push_back(y.is_null() ? kUnknownLabel : y.get<int>());

        LabeledGraph g = build(num_nodes, edges, std::move(attrs), attr_dim, std::move(labels), num_classes);

        if (doc.contains("edge_weights")) {
            std::map<std::pair<int, int>, double> w;  // directed (u, v) -> weight
            for (const auto& entry : doc.at("edge_weights")) {
                if (!entry.is_array() || entry.size() != 4)
                    throw ParseError("field 'edge_weights': each entry must be [u, v, w_uv, w_vu]");
                int u = entry[0].get<int>(), v = entry[1].get<int>();
                w[{u, v}] = entry[2].get<double>();
                w[{v, u}] = entry[3].get<double>();
            }
            if (w.size() != static_cast<std::size_t>(g.num_directed_edges()))
                throw ParseError("field 'edge_weights': entry count does not match edge count");
            g = g.with_edge_weights([&](int u, int v) {
                auto it = w.find({u, v});
                if (it == w.end()) throw ParseError("field 'edge_weights': weight given for a non-edge");
                return it->second;
            });
        }
        return g;
    } catch (const json::exception& e) {
        throw ParseError(std::string("graph document invalid: ") + e.what());
    }
}

}  // namespace strurw
