#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "tdc/geometry.hpp"

namespace tdc {

struct TangentChart {
    Vec base;
    AffineFrame frame;        // T_pM, m columns
    AffineFrame normal_frame; // N_pM, N-m columns
};

// Analytic submanifold of R^N. Builtins are parsed from spec strings.
class Manifold {
public:
    virtual ~Manifold() = default;

    virtual int ambient_dim() const = 0;
    virtual int intrinsic_dim() const = 0;
    virtual double reach() const = 0;
    virtual std::string spec() const = 0;

    // Distance from x to M, valid anywhere except on the medial axis.
    virtual double distance(const Vec& x) const = 0;
    // Distance from x to the medial axis component that bounds closest_point.
    virtual double medial_distance(const Vec& x) const = 0;
    Vec closest_point(const Vec& x) const;

    // Tangent basis (N x m, orthonormal) at a point of M.
    virtual Mat tangent_basis(const Vec& p) const = 0;
    TangentChart tangent_chart(const Vec& p) const;

    // psi_p. chart_radius <= 0 means reach/2; +inf disables the radius check
    // (existence of the lift is still required).
    Vec lift_from_tangent(const TangentChart& chart, const Vec& y, double chart_radius = 0.0) const;
    Vec lift_generic(const TangentChart& chart, const Vec& y) const;

    // Uniform (area measure) random sample of M; flat patches use their box.
    virtual std::vector<Vec> dense_sample(int n, std::uint64_t seed) const = 0;

    bool on_manifold(const Vec& x, double tol = 1e-9) const { return distance(x) <= tol; }
    // Region the refinement acts on. Closed manifolds: everything; flat patches: their box.
    virtual bool in_domain(const Vec&) const { return true; }

protected:
    virtual Vec foot_point(const Vec& x) const = 0;
    // Closed-form lift; returns false to fall back to lift_generic.
    virtual bool lift_closed_form(const TangentChart& chart, const Vec& y, Vec& out) const;
};

using ManifoldPtr = std::shared_ptr<const Manifold>;

// "sphere:m=2,N=3", "torus:R=2,r=0.5", "clifford:r=0.7071", "flat:m=2,N=3[,L=1]"
ManifoldPtr parse_manifold(const std::string& spec);

Vec project_to_tangent(const TangentChart& chart, const Vec& x);
Vec embed_tangent(const TangentChart& chart, const Vec& y);

struct SampleSet {
    PointSet points;
    double epsilon = 0.0;
    double sparsity = 0.0;
};

// Farthest-point selection starting at dense[start]. Every dense point ends
// within eps of the output and output points are pairwise > eps apart.
SampleSet farthest_point_net(const std::vector<Vec>& dense, double eps, int start = 0);

// Max over probes of the distance to the nearest dense point.
double estimate_covering_radius(const std::vector<Vec>& dense, const std::vector<Vec>& probes);

} // namespace tdc
