#pragma once

#include <limits>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "tdc/geodesic.hpp"
#include "tdc/geometry.hpp"
#include "tdc/manifold.hpp"
#include "tdc/refinement.hpp"
#include "tdc/tangential.hpp"

namespace tdc {

struct AbstractComplex {
    int n_vertices = 0;
    std::set<Simplex> simplices;

    void add_with_faces(const Simplex& s);
    std::set<Simplex> of_dim(int d) const;
    std::set<Simplex> up_to_dim(int d) const;
    int max_dim() const;
    bool face_closed() const;

    static AbstractComplex from_simplices(int n_vertices, const std::vector<Simplex>& s);
};

AbstractComplex from_tangential(const TangentialComplex& tc, int n_vertices);

// Delaunay complex of P in its affine hull, degenerate cospherical cells kept as
// single abstract simplices. TooLarge for |P| > 256 or N > 4.
AbstractComplex ambient_delaunay_bruteforce(const PointSet& pts);

// Point of Vor(sigma) on M near `start` (Newton on the equidistance equations
// in the tangent chart, reprojected onto M each step).
struct RestrictedVoronoiPoint {
    bool converged = false;
    Vec point;
    double radius = 0.0;
    double margin = 0.0; // min over q outside sigma of |z - q| - radius
};
RestrictedVoronoiPoint restricted_voronoi_point(const Simplex& sigma, const PointSet& pts, const Manifold& M,
                                                const Vec& start);

struct RestrictedOracle {
    AbstractComplex complex;
    double resolution = 0.0; // estimated covering radius of the dense sample
    double band = 0.0;       // 2 * resolution
    double min_margin = std::numeric_limits<double>::infinity(); // over certified m-simplices
    int witnesses = 0;
    int candidates = 0;
    std::map<Simplex, double> margins; // certified m-simplices
};
// The dense sample must lie on M. Throws DenseSampleTooCoarse when the estimated
// covering radius exceeds max_resolution.
RestrictedOracle restricted_delaunay_oracle(const PointSet& pts, const Manifold& M, const std::vector<Vec>& dense,
                                            double max_resolution = std::numeric_limits<double>::infinity());

struct SiteGraph {
    GeodesicGraph graph;
    std::vector<int> site_nodes;
    double resolution = 0.0;
};
// Dense nodes plus the sites themselves, joined within edge_mult * covering radius.
SiteGraph build_site_graph(const PointSet& pts, const std::vector<Vec>& dense, double edge_mult = 3.0);

struct IntrinsicOracle {
    AbstractComplex complex;
    double band = 0.0; // 2 * nerve radius
    int nodes = 0;
};
// Nerve of the graph Voronoi cells: a node whose neighbours within
// nerve_radius (default: the edge radius) carry the labels of sigma witnesses sigma.
IntrinsicOracle intrinsic_delaunay_oracle(const PointSet& pts, const SiteGraph& g, int m, double nerve_radius = 0.0);

struct CompareResult {
    bool equal = true;
    std::set<Simplex> only_first;
    std::set<Simplex> only_second;
    std::map<int, int> diff_by_dim;
};
// max_dim < 0 compares everything.
CompareResult complex_compare(const AbstractComplex& a, const AbstractComplex& b, int max_dim = -1);

struct ClassifiedDiff {
    Simplex simplex;
    bool in_first = false;
    double margin = 0.0;
    bool resolved = false; // true: |margin| >= threshold, a genuine mismatch
};
struct ResolvedCompare {
    CompareResult raw;
    std::vector<ClassifiedDiff> diffs;
    int mismatches = 0;
    int unresolved = 0;
    double threshold = 0.0;
};
// Differences among simplices of dimension <= m are classified by the exact
// restricted Voronoi margin; only those with |margin| >= threshold count.
ResolvedCompare compare_at_resolution(const AbstractComplex& a, const AbstractComplex& b, const PointSet& pts,
                                      const Manifold& M, int m, double threshold);

struct ManifoldCheck {
    bool ok = false;
    std::vector<int> bad_vertices;
    std::vector<std::string> diagnostics;
};
ManifoldCheck manifold_complex_check(const AbstractComplex& k, int m);

int euler_characteristic(const AbstractComplex& k);

struct ProtectionEntry {
    Simplex simplex;
    int vertex = -1;
    double margin = 0.0;
    bool pass = false;
    std::string error;
};
struct ProtectionReport {
    double threshold = 0.0;
    std::vector<ProtectionEntry> entries;
    double min_margin = std::numeric_limits<double>::infinity();
    int failures = 0;
    bool all_pass() const { return failures == 0; }
};
// Every m-simplex of k and each of its vertices p: margin of c_p(sigma) over P \ sigma.
ProtectionReport power_protection_audit(const AbstractComplex& k, const PointSet& pts, const Manifold& M,
                                        double threshold);

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct RefinementAudit {
    std::vector<CheckResult> checks;
    AbstractComplex complex;
    ProtectionReport protection;
    RestrictedOracle restricted;
    ResolvedCompare comparison;
    ManifoldCheck manifold;
    int euler = 0;
    double min_edge = 0.0;
    double min_thickness = 0.0;
    bool all_pass() const;
};
// Output audits of a finished refinement. expected_euler is skipped when unset.
RefinementAudit audit_refinement(const RefinementState& st, const std::vector<Vec>& dense,
                                 std::optional<int> expected_euler = std::nullopt);

} // namespace tdc
