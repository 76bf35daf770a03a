#include "tdc/geodesic.hpp"

#include <algorithm>
#include <limits>
#include <queue>
#include <tuple>

namespace tdc {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

GeodesicGraph::GeodesicGraph(std::vector<Vec> nodes, double edge_radius)
    : nodes_(std::move(nodes)), h_(edge_radius),
      grid_(edge_radius, nodes_.empty() ? 1 : static_cast<int>(nodes_[0].size())) {
    if (nodes_.empty()) throw Error(ErrorKind::EmptyInput, "geodesic graph needs nodes");
    if (!(edge_radius > 0.0)) throw Error(ErrorKind::InvalidArgument, "edge radius must be positive");
    for (size_t i = 0; i < nodes_.size(); ++i) grid_.insert(static_cast<int>(i), nodes_[i]);
    offs_.assign(nodes_.size() + 1, 0);
    std::vector<std::pair<int, double>> nb;
    for (size_t i = 0; i < nodes_.size(); ++i) {
        nb.clear();
        grid_.for_each_within(nodes_[i], h_, [&](int j, double d) {
            if (j != static_cast<int>(i)) nb.emplace_back(j, d);
        });
        std::sort(nb.begin(), nb.end());
        for (auto& [j, d] : nb) {
            adj_.push_back(j);
            w_.push_back(d);
        }
        offs_[i + 1] = static_cast<int>(adj_.size());
    }
}

bool GeodesicGraph::connected() const {
    auto d = distances_from(0);
    return std::all_of(d.begin(), d.end(), [](double v) { return v < kInf; });
}

std::vector<double> GeodesicGraph::distances_from(int src, double cutoff) const {
    std::vector<double> dist(nodes_.size(), kInf);
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    dist[static_cast<size_t>(src)] = 0.0;
    pq.emplace(0.0, src);
    while (!pq.empty()) {
        auto [d, u] = pq.top();
        pq.pop();
        if (d > dist[static_cast<size_t>(u)]) continue;
        if (cutoff > 0.0 && d > cutoff) break;
        for (int e = offs_[static_cast<size_t>(u)]; e < offs_[static_cast<size_t>(u) + 1]; ++e) {
            int v = adj_[static_cast<size_t>(e)];
            double nd = d + w_[static_cast<size_t>(e)];
            if (nd < dist[static_cast<size_t>(v)]) {
                dist[static_cast<size_t>(v)] = nd;
                pq.emplace(nd, v);
            }
        }
    }
    if (cutoff > 0.0)
        for (auto& v : dist)
            if (v > cutoff) v = kInf;
    return dist;
}

double GeodesicGraph::shortest_path(int a, int b) const {
    std::vector<double> dist(nodes_.size(), kInf);
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    dist[static_cast<size_t>(a)] = 0.0;
    pq.emplace(0.0, a);
    while (!pq.empty()) {
        auto [d, u] = pq.top();
        pq.pop();
        if (u == b) return d;
        if (d > dist[static_cast<size_t>(u)]) continue;
        for (int e = offs_[static_cast<size_t>(u)]; e < offs_[static_cast<size_t>(u) + 1]; ++e) {
            int v = adj_[static_cast<size_t>(e)];
            double nd = d + w_[static_cast<size_t>(e)];
            if (nd < dist[static_cast<size_t>(v)]) {
                dist[static_cast<size_t>(v)] = nd;
                pq.emplace(nd, v);
            }
        }
    }
    throw Error(ErrorKind::DisconnectedGraph, "no path between graph nodes");
}

std::vector<std::vector<GeodesicGraph::Label>> GeodesicGraph::k_nearest_sources(const std::vector<int>& source_nodes,
                                                                                  int k) const {
    // Settling (node, source) pairs in distance order; a node stops
    // propagating once it holds k sources, which cannot lose any of the
    // k nearest sources of nodes downstream.
    std::vector<std::vector<Label>> lab(nodes_.size());
    using Item = std::tuple<double, int, int>; // dist, node, source
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    for (size_t s = 0; s < source_nodes.size(); ++s) pq.emplace(0.0, source_nodes[s], static_cast<int>(s));
    auto has = [&](int node, int src) {
        for (const auto& l : lab[static_cast<size_t>(node)])
            if (l.source == src) return true;
        return false;
    };
    while (!pq.empty()) {
        auto [d, u, s] = pq.top();
        pq.pop();
        auto& lu = lab[static_cast<size_t>(u)];
        if (static_cast<int>(lu.size()) >= k || has(u, s)) continue;
        lu.push_back({s, d});
        for (int e = offs_[static_cast<size_t>(u)]; e < offs_[static_cast<size_t>(u) + 1]; ++e) {
            int v = adj_[static_cast<size_t>(e)];
            const auto& lv = lab[static_cast<size_t>(v)];
            if (static_cast<int>(lv.size()) >= k || has(v, s)) continue;
            pq.emplace(d + w_[static_cast<size_t>(e)], v, s);
        }
    }
    return lab;
}

double geodesic_estimate(const GeodesicGraph& g, const Vec& x, const Vec& y) {
    return g.shortest_path(g.snap(x), g.snap(y));
}

} // namespace tdc
