#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tdc/errors.hpp"

namespace tdc {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Sorted, duplicate-free vertex index list. Combinatorial dimension is size()-1.
using Simplex = std::vector<int>;

Simplex make_simplex(std::vector<int> v);

struct SimplexHash {
    size_t operator()(const Simplex& s) const {
        size_t h = 1469598103934665603ull;
        for (int v : s) h = (h ^ static_cast<size_t>(v)) * 1099511628211ull;
        return h;
    }
};
int simplex_dim(const Simplex& s);
std::string simplex_to_string(const Simplex& s);

// Relative tolerance for rank and degeneracy decisions.
inline constexpr double kRelTol = 1e-9;

struct PointSet {
    int dim = 0;
    std::vector<Vec> pts;

    PointSet() = default;
    explicit PointSet(int d) : dim(d) {}
    PointSet(int d, std::vector<Vec> p);

    int size() const { return static_cast<int>(pts.size()); }
    const Vec& operator[](int i) const { return pts[static_cast<size_t>(i)]; }
    int add(const Vec& p);
    double min_pairwise_distance() const;
};

using Coords = std::vector<Vec>;

Coords gather(const Simplex& s, const PointSet& pts);

struct SphereSpec {
    Vec center;
    double radius = 0.0;
};

struct AffineFrame {
    Vec origin;
    Mat basis; // N x k, orthonormal columns

    int dim() const { return static_cast<int>(basis.cols()); }
    bool is_orthonormal(double tol = 1e-12) const;
};

struct ElementaryWeight {
    int carrier = 0; // vertex index (global when used with Simplex, local with Coords)
    double weight = 0.0;
};

enum class GammaClass { Good, Flake, BadNonFlake };
const char* gamma_class_name(GammaClass c);

// Coordinate-level API: a simplex is the list of its vertex coordinates.
std::pair<double, double> edge_extremes(const Coords& v);
double altitude(const Coords& v, int local_vertex);
double thickness(const Coords& v);
// Orthonormal frame of aff(v); rank is decided at kRelTol against the diameter.
AffineFrame affine_frame(const Coords& v);
SphereSpec circumsphere(const Coords& v);
GammaClass classify_gamma(const Coords& v, double gamma0);
// Carrier is a local vertex position. Returns (C, R).
std::pair<Vec, double> weighted_center(const Coords& v, const ElementaryWeight& w);

struct WeightedRadiusMin {
    bool feasible = false;
    double radius = 0.0;
    ElementaryWeight omega; // local carrier
    Vec center;
};
// min over carriers and weights w in [0, max_weight] of R(sigma, omega). Handles
// affinely degenerate vertex sets: then C exists only when the overdetermined
// equidistance system is consistent for some admissible weight.
WeightedRadiusMin min_weighted_radius(const Coords& v, double max_weight);

double subspace_sin(const AffineFrame& u, const AffineFrame& v);
double subspace_angle(const AffineFrame& u, const AffineFrame& v);
double flake_altitude_bound(int k, double delta, double L, double gamma0);

// Index-based wrappers.
std::pair<double, double> edge_extremes(const Simplex& s, const PointSet& pts);
double altitude(int vertex, const Simplex& s, const PointSet& pts);
double thickness(const Simplex& s, const PointSet& pts);
SphereSpec circumsphere(const Simplex& s, const PointSet& pts);
GammaClass classify_gamma(const Simplex& s, double gamma0, const PointSet& pts);
std::pair<Vec, double> weighted_center(const Simplex& s, const ElementaryWeight& w, const PointSet& pts);

// Unit m-ball volume.
double unit_ball_volume(int m);

} // namespace tdc
