#pragma once

#include <span>
#include <vector>

#include "tdc/geometry.hpp"
#include "tdc/spatial_grid.hpp"

namespace tdc {

// Dense sample of M with Euclidean-weighted edges between nodes closer than h.
class GeodesicGraph {
public:
    GeodesicGraph(std::vector<Vec> nodes, double edge_radius);

    int size() const { return static_cast<int>(nodes_.size()); }
    double edge_radius() const { return h_; }
    const Vec& node(int i) const { return nodes_[static_cast<size_t>(i)]; }
    bool connected() const;
    std::span<const int> neighbors(int u) const {
        const auto b = static_cast<size_t>(offs_[static_cast<size_t>(u)]);
        const auto e = static_cast<size_t>(offs_[static_cast<size_t>(u) + 1]);
        return {adj_.data() + b, e - b};
    }
    std::span<const double> neighbor_weights(int u) const {
        const auto b = static_cast<size_t>(offs_[static_cast<size_t>(u)]);
        const auto e = static_cast<size_t>(offs_[static_cast<size_t>(u) + 1]);
        return {w_.data() + b, e - b};
    }

    int snap(const Vec& x) const { return grid_.nearest(x).first; }
    // Single-source shortest paths; entries beyond cutoff stay infinite.
    std::vector<double> distances_from(int src, double cutoff = -1.0) const;
    double shortest_path(int a, int b) const;

    struct Label {
        int source = -1;
        double dist = 0.0;
    };
    // For every node, the k nearest sources (by graph distance), ascending.
    std::vector<std::vector<Label>> k_nearest_sources(const std::vector<int>& source_nodes, int k) const;

private:
    std::vector<Vec> nodes_;
    double h_;
    SpatialGrid grid_;
    std::vector<int> offs_;
    std::vector<int> adj_;
    std::vector<double> w_;
};

// Graph distance between the nodes nearest to x and y.
double geodesic_estimate(const GeodesicGraph& g, const Vec& x, const Vec& y);

} // namespace tdc
