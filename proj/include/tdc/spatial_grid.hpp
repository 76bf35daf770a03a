#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <unordered_map>
#include <vector>

#include "tdc/geometry.hpp"

namespace tdc {

// Uniform hash grid over points in R^N for radius and nearest queries.
class SpatialGrid {
public:
    SpatialGrid(double cell, int dim) : cell_(cell), dim_(dim) {
        if (!(cell > 0.0)) throw Error(ErrorKind::InvalidArgument, "grid cell must be positive");
    }

    void insert(int id, const Vec& p) {
        if (static_cast<size_t>(id) >= pts_.size()) pts_.resize(static_cast<size_t>(id) + 1);
        pts_[static_cast<size_t>(id)] = p;
        cells_[key(cell_of(p))].push_back(id);
        ++count_;
    }

    int count() const { return count_; }
    const Vec& point(int id) const { return pts_[static_cast<size_t>(id)]; }

    // Calls f(id, distance) for all points with distance <= r.
    template <class F>
    void for_each_within(const Vec& q, double r, F&& f) const {
        std::vector<std::int64_t> c = cell_of(q);
        const auto span = static_cast<std::int64_t>(std::ceil(r / cell_));
        double cells_to_visit = std::pow(2.0 * static_cast<double>(span) + 1.0, dim_);
        if (cells_to_visit > static_cast<double>(cells_.size())) {
            for (const auto& kv : cells_)
                for (int id : kv.second) {
                    double d = (pts_[static_cast<size_t>(id)] - q).norm();
                    if (d <= r) f(id, d);
                }
            return;
        }
        std::vector<std::int64_t> cur(c.size());
        visit(c, span, 0, cur, [&](const std::vector<std::int64_t>& cc) {
            auto it = cells_.find(key(cc));
            if (it == cells_.end()) return;
            for (int id : it->second) {
                double d = (pts_[static_cast<size_t>(id)] - q).norm();
                if (d <= r) f(id, d);
            }
        });
    }

    // Nearest point id (-1 if empty) and its distance.
    std::pair<int, double> nearest(const Vec& q) const {
        if (count_ == 0) return {-1, std::numeric_limits<double>::infinity()};
        double r = cell_;
        for (;;) {
            int best = -1;
            double bd = std::numeric_limits<double>::infinity();
            for_each_within(q, r, [&](int id, double d) {
                if (d < bd || (d == bd && id < best)) {
                    bd = d;
                    best = id;
                }
            });
            if (best >= 0) return {best, bd};
            r *= 2.0;
        }
    }

private:
    std::vector<std::int64_t> cell_of(const Vec& p) const {
        std::vector<std::int64_t> c(static_cast<size_t>(dim_));
        for (int i = 0; i < dim_; ++i) c[static_cast<size_t>(i)] = static_cast<std::int64_t>(std::floor(p[i] / cell_));
        return c;
    }

    struct KeyHash {
        size_t operator()(const std::vector<std::int64_t>& c) const {
            std::uint64_t h = 1469598103934665603ull;
            for (auto v : c) h ^= static_cast<std::uint64_t>(v) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
            return static_cast<size_t>(h);
        }
    };
    static const std::vector<std::int64_t>& key(const std::vector<std::int64_t>& c) { return c; }

    template <class G>
    void visit(const std::vector<std::int64_t>& c, std::int64_t span, size_t axis, std::vector<std::int64_t>& cur,
               G&& g) const {
        if (axis == c.size()) {
            g(cur);
            return;
        }
        for (std::int64_t d = -span; d <= span; ++d) {
            cur[axis] = c[axis] + d;
            visit(c, span, axis + 1, cur, g);
        }
    }

    double cell_;
    int dim_;
    int count_ = 0;
    std::vector<Vec> pts_;
    std::unordered_map<std::vector<std::int64_t>, std::vector<int>, KeyHash> cells_;
};

} // namespace tdc
