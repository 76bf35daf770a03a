#pragma once

#include <limits>
#include <map>
#include <set>
#include <vector>

#include "tdc/geometry.hpp"
#include "tdc/manifold.hpp"

namespace tdc {

struct WeightedSite {
    int index = -1;
    Vec tangent_coords;
    double squared_weight = 0.0; // -(normal component)^2
};

// Projected, weighted sites of P \ {p} in the chart of p.
std::vector<WeightedSite> weighted_sites(int p, const PointSet& pts, const TangentChart& chart);

struct TangentCenter {
    Vec center;  // c_p in R^N, lies on T_pM
    Vec tangent; // c_p in chart coordinates
    double radius = 0.0;
};

struct Star {
    int base = -1;
    int m = 0;
    // Maximal simplices of the star (all contain base, dimension >= m).
    std::vector<Simplex> maximal;
    // m-simplices with a well-conditioned tangent centre.
    std::map<Simplex, TangentCenter> msimplices;
    // m-simplices of degenerate cells whose own centre system is singular;
    // they carry the centre of the cell vertex they come from.
    std::map<Simplex, TangentCenter> singular_msimplices;
    // Cell vertices in chart coordinates (one per maximal simplex).
    std::vector<Vec> cell_vertices;
    bool unbounded = false;
    // Max R_p over the cell vertices; sites farther than twice this cannot touch the cell.
    double security_radius = 0.0;

    bool contains(const Simplex& s) const;
    std::vector<Simplex> simplices() const;
};

struct StarOptions {
    // Only sites within this ambient distance of p are considered (inf: exact).
    double prune_radius = std::numeric_limits<double>::infinity();
};

Star compute_star(int p, const PointSet& pts, const Manifold& M, const TangentChart& chart,
                  const StarOptions& opt = {});
Star compute_star(int p, const PointSet& pts, const Manifold& M, const StarOptions& opt = {});

// Centre of the unique point of Vor(sigma) on T_pM. Throws SingularSystem
// when the condition number exceeds 1e12.
TangentCenter tangent_center(const Simplex& sigma, int p, const PointSet& pts, const TangentChart& chart);

// True when the half-space contributed by site x cuts or touches the cell of the star.
bool star_affected_by(const Star& star, const TangentChart& chart, const Vec& base, const Vec& x);

struct CosphEntry {
    Simplex simplex;  // sigma^{m+1}
    Simplex facet;    // sigma^m in St(p)
    int apex = -1;    // p_{m+1}
    ElementaryWeight witness; // carrier = apex (global index)
    double gap = 0.0; // |c_p - apex|^2 - R_p^2
};

struct CosphStar {
    int base = -1;
    std::vector<CosphEntry> entries;
};

struct CosphParams {
    double delta0 = 0.0;
    double gamma0 = 0.0;
    double epsilon = 0.0;
};

CosphStar cosph_star(const Star& star, const PointSet& pts, const CosphParams& prm);
// Entries of the cosphericity star whose apex is the given point.
std::vector<CosphEntry> cosph_entries_for_apex(const Star& star, const PointSet& pts, int apex, const CosphParams& prm);

struct Inconsistency {
    Simplex simplex;
    std::vector<int> holders;
    std::vector<int> missing;
};

struct TangentialComplex {
    int m = 0;
    std::vector<Star> stars;
    std::set<Simplex> simplices; // face-closed union
    std::vector<Inconsistency> inconsistencies;

    bool consistent() const { return inconsistencies.empty(); }
    std::set<Simplex> of_dim(int d) const;
};

TangentialComplex assemble_from_stars(std::vector<Star> stars, int m);
TangentialComplex assemble_complex(const PointSet& pts, const Manifold& M, const StarOptions& opt = {});

} // namespace tdc
