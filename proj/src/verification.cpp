#include "tdc/verification.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <queue>
#include <sstream>

#include "tdc/spatial_grid.hpp"

namespace tdc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void for_each_subset(int n, int k, const std::function<void(const std::vector<int>&)>& f) {
    if (k > n || k <= 0) return;
    std::vector<int> idx(static_cast<size_t>(k));
    std::iota(idx.begin(), idx.end(), 0);
    for (;;) {
        f(idx);
        int i = k - 1;
        while (i >= 0 && idx[static_cast<size_t>(i)] == n - k + i) --i;
        if (i < 0) return;
        ++idx[static_cast<size_t>(i)];
        for (int j = i + 1; j < k; ++j) idx[static_cast<size_t>(j)] = idx[static_cast<size_t>(j) - 1] + 1;
    }
}

double median_nn_distance(const PointSet& pts) {
    std::vector<double> nn;
    for (int i = 0; i < pts.size(); ++i) {
        double d = kInf;
        for (int j = 0; j < pts.size(); ++j)
            if (j != i) d = std::min(d, (pts[i] - pts[j]).norm());
        if (std::isfinite(d) && d > 0.0) nn.push_back(d);
    }
    if (nn.empty()) return 1.0;
    std::nth_element(nn.begin(), nn.begin() + static_cast<long>(nn.size() / 2), nn.end());
    return nn[nn.size() / 2];
}

std::string vec_list(const std::vector<int>& v, size_t max_items = 20) {
    std::ostringstream os;
    for (size_t i = 0; i < v.size() && i < max_items; ++i) os << (i ? "," : "") << v[i];
    if (v.size() > max_items) os << ",...";
    return os.str();
}

} // namespace

void AbstractComplex::add_with_faces(const Simplex& s) {
    const int k = static_cast<int>(s.size());
    if (k > 24) throw Error(ErrorKind::TooLarge, "simplex with " + std::to_string(k) + " vertices");
    for (int v : s) n_vertices = std::max(n_vertices, v + 1);
    for (unsigned long mask = 1; mask < (1ul << k); ++mask) {
        Simplex f;
        for (int i = 0; i < k; ++i)
            if (mask & (1ul << i)) f.push_back(s[static_cast<size_t>(i)]);
        simplices.insert(std::move(f));
    }
}

std::set<Simplex> AbstractComplex::of_dim(int d) const {
    std::set<Simplex> out;
    for (const auto& s : simplices)
        if (simplex_dim(s) == d) out.insert(s);
    return out;
}

std::set<Simplex> AbstractComplex::up_to_dim(int d) const {
    std::set<Simplex> out;
    for (const auto& s : simplices)
        if (simplex_dim(s) <= d) out.insert(s);
    return out;
}

int AbstractComplex::max_dim() const {
    int d = -1;
    for (const auto& s : simplices) d = std::max(d, simplex_dim(s));
    return d;
}

bool AbstractComplex::face_closed() const {
    for (const auto& s : simplices) {
        if (s.size() < 2) continue;
        for (size_t i = 0; i < s.size(); ++i) {
            Simplex f = s;
            f.erase(f.begin() + static_cast<long>(i));
            if (!simplices.count(f)) return false;
        }
    }
    return true;
}

AbstractComplex AbstractComplex::from_simplices(int n_vertices, const std::vector<Simplex>& s) {
    AbstractComplex k;
    for (const auto& x : s) k.add_with_faces(make_simplex(x));
    k.n_vertices = std::max(k.n_vertices, n_vertices);
    return k;
}

AbstractComplex from_tangential(const TangentialComplex& tc, int n_vertices) {
    AbstractComplex k;
    k.simplices = tc.simplices;
    k.n_vertices = n_vertices;
    return k;
}

AbstractComplex ambient_delaunay_bruteforce(const PointSet& pts) {
    const int n = pts.size();
    if (n > 256 || pts.dim > 4) throw Error(ErrorKind::TooLarge, "brute-force Delaunay is limited to 256 points in R^4");
    AbstractComplex k;
    k.n_vertices = n;
    if (n == 0) return k;
    AffineFrame hull = affine_frame(pts.pts);
    const int d = hull.dim();
    std::vector<Vec> loc;
    loc.reserve(static_cast<size_t>(n));
    for (const auto& p : pts.pts) loc.push_back(hull.basis.transpose() * (p - hull.origin));
    if (n <= d + 1) {
        Simplex all(static_cast<size_t>(n));
        std::iota(all.begin(), all.end(), 0);
        k.add_with_faces(all);
        return k;
    }
    std::vector<double> sq(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) sq[static_cast<size_t>(i)] = loc[static_cast<size_t>(i)].squaredNorm();
    Mat a(d, d);
    Vec b(d);
    for_each_subset(n, d + 1, [&](const std::vector<int>& s) {
        const Vec& o = loc[static_cast<size_t>(s[0])];
        for (int r = 0; r < d; ++r) {
            const Vec& v = loc[static_cast<size_t>(s[static_cast<size_t>(r) + 1])];
            a.row(r) = 2.0 * (v - o).transpose();
            b[r] = sq[static_cast<size_t>(s[static_cast<size_t>(r) + 1])] - sq[static_cast<size_t>(s[0])];
        }
        Eigen::PartialPivLU<Mat> lu(a);
        if (!(lu.rcond() >= 1e-12)) return;
        Vec c = lu.solve(b);
        const double r2 = (o - c).squaredNorm();
        const double tol = kRelTol * r2;
        Simplex boundary;
        for (int q = 0; q < n; ++q) {
            double g = (loc[static_cast<size_t>(q)] - c).squaredNorm() - r2;
            if (g < -tol) return;
            if (g <= tol) boundary.push_back(q);
        }
        k.add_with_faces(boundary);
    });
    return k;
}

RestrictedVoronoiPoint restricted_voronoi_point(const Simplex& sigma, const PointSet& pts, const Manifold& M,
                                                const Vec& start) {
    RestrictedVoronoiPoint out;
    const int m = M.intrinsic_dim();
    if (static_cast<int>(sigma.size()) != m + 1) throw Error(ErrorKind::InvalidArgument, "restricted Voronoi point needs an m-simplex");
    const Vec& p0 = pts[sigma[0]];
    double scale = 0.0;
    for (int v : sigma) scale = std::max(scale, (pts[v] - p0).norm());
    Vec z;
    try {
        z = M.closest_point(start);
        for (int it = 0; it < 60; ++it) {
            Mat t = M.tangent_basis(z);
            Mat j(m, m);
            Vec g(m);
            for (int i = 0; i < m; ++i) {
                const Vec& pi = pts[sigma[static_cast<size_t>(i) + 1]];
                g[i] = (z - pi).squaredNorm() - (z - p0).squaredNorm();
                j.row(i) = 2.0 * (p0 - pi).transpose() * t;
            }
            Eigen::FullPivLU<Mat> lu(j);
            if (!(lu.rcond() >= 1e-12)) return out;
            Vec delta = -lu.solve(g);
            z = M.closest_point(z + t * delta);
            if (delta.norm() <= 1e-13 * std::max(1.0, scale)) break;
        }
    } catch (const Error&) {
        return out;
    }
    double rmax = 0.0, rmin = kInf;
    for (int v : sigma) {
        double r = (z - pts[v]).norm();
        rmax = std::max(rmax, r);
        rmin = std::min(rmin, r);
    }
    if (rmax - rmin > 1e-9 * std::max(1.0, rmax)) return out;
    out.converged = true;
    out.point = z;
    out.radius = rmax;
    double best = kInf;
    for (int q = 0; q < pts.size(); ++q) {
        if (std::binary_search(sigma.begin(), sigma.end(), q)) continue;
        best = std::min(best, (z - pts[q]).norm());
    }
    out.margin = best - out.radius;
    return out;
}

RestrictedOracle restricted_delaunay_oracle(const PointSet& pts, const Manifold& M, const std::vector<Vec>& dense,
                                            double max_resolution) {
    RestrictedOracle out;
    const int m = M.intrinsic_dim();
    out.complex.n_vertices = pts.size();
    if (pts.size() < m + 1) throw Error(ErrorKind::EmptyInput, "need at least m+1 sites");
    if (dense.empty()) throw Error(ErrorKind::EmptyInput, "empty dense sample");
    out.resolution = estimate_covering_radius(dense, M.dense_sample(4000, 0x5eedULL));
    if (out.resolution > max_resolution)
        throw Error(ErrorKind::DenseSampleTooCoarse, "covering radius " + std::to_string(out.resolution) + " exceeds " +
                                                         std::to_string(max_resolution));
    out.band = 2.0 * out.resolution;
    SpatialGrid grid(median_nn_distance(pts), pts.dim);
    for (int i = 0; i < pts.size(); ++i) grid.insert(i, pts[i]);
    std::map<Simplex, bool> tried;
    const double cert_tol = 1e-9;
    std::vector<std::pair<double, int>> near;
    for (const auto& x : dense) {
        ++out.witnesses;
        const double d1 = grid.nearest(x).second;
        near.clear();
        grid.for_each_within(x, d1 + out.band, [&](int id, double d) { near.emplace_back(d, id); });
        if (static_cast<int>(near.size()) < m + 1) continue;
        std::sort(near.begin(), near.end());
        if (near.size() > 12) near.resize(12);
        for_each_subset(static_cast<int>(near.size()), m + 1, [&](const std::vector<int>& sub) {
            Simplex s;
            for (int i : sub) s.push_back(near[static_cast<size_t>(i)].second);
            std::sort(s.begin(), s.end());
            if (tried.count(s)) return;
            ++out.candidates;
            auto rv = restricted_voronoi_point(s, pts, M, x);
            bool ok = rv.converged && rv.margin >= -cert_tol * std::max(1.0, rv.radius);
            tried.emplace(s, ok);
            if (!ok) return;
            out.margins[s] = rv.margin;
            out.min_margin = std::min(out.min_margin, rv.margin);
            out.complex.add_with_faces(s);
        });
    }
    return out;
}

SiteGraph build_site_graph(const PointSet& pts, const std::vector<Vec>& dense, double edge_mult) {
    if (dense.empty()) throw Error(ErrorKind::EmptyInput, "empty dense sample");
    // covering radius estimated on held-out dense points and the sites
    std::vector<Vec> probes(pts.pts.begin(), pts.pts.end()), rest;
    const size_t stride = std::max<size_t>(1, dense.size() / 2000);
    for (size_t i = 0; i < dense.size(); ++i) (i % stride == 0 ? probes : rest).push_back(dense[i]);
    if (rest.empty()) rest = dense;
    const double h = estimate_covering_radius(rest, probes);
    std::vector<Vec> nodes = dense;
    std::vector<int> site_nodes;
    for (const auto& p : pts.pts) {
        site_nodes.push_back(static_cast<int>(nodes.size()));
        nodes.push_back(p);
    }
    return SiteGraph{GeodesicGraph(std::move(nodes), edge_mult * h), std::move(site_nodes), h};
}

IntrinsicOracle intrinsic_delaunay_oracle(const PointSet& pts, const SiteGraph& g, int m, double nerve_radius) {
    IntrinsicOracle out;
    out.complex.n_vertices = pts.size();
    const double rho = nerve_radius > 0.0 ? std::min(nerve_radius, g.graph.edge_radius()) : g.graph.edge_radius();
    out.band = 2.0 * rho;
    out.nodes = g.graph.size();
    if (!g.graph.connected()) throw Error(ErrorKind::DisconnectedGraph, "geodesic graph is disconnected");
    // Nerve of the graph Voronoi cells: the sites labelling a node and its
    // neighbours span a simplex. Nodes seeing more than m+1 labels sit near
    // nearly degenerate vertices and witness nothing; the simplices there are
    // picked up by nodes with exactly m+1 labels or reported as unresolved.
    auto labels = g.graph.k_nearest_sources(g.site_nodes, 1);
    std::set<std::vector<int>> seen;
    std::vector<int> ls;
    for (int u = 0; u < g.graph.size(); ++u) {
        ls.clear();
        if (!labels[static_cast<size_t>(u)].empty()) ls.push_back(labels[static_cast<size_t>(u)][0].source);
        auto nb = g.graph.neighbors(u);
        auto wt = g.graph.neighbor_weights(u);
        for (size_t e = 0; e < nb.size(); ++e)
            if (wt[e] <= rho && !labels[static_cast<size_t>(nb[e])].empty())
                ls.push_back(labels[static_cast<size_t>(nb[e])][0].source);
        std::sort(ls.begin(), ls.end());
        ls.erase(std::unique(ls.begin(), ls.end()), ls.end());
        if (static_cast<int>(ls.size()) != m + 1 || !seen.insert(ls).second) continue;
        out.complex.add_with_faces(Simplex(ls.begin(), ls.end()));
    }
    return out;
}

CompareResult complex_compare(const AbstractComplex& a, const AbstractComplex& b, int max_dim) {
    CompareResult r;
    auto keep = [&](const Simplex& s) { return max_dim < 0 || simplex_dim(s) <= max_dim; };
    for (const auto& s : a.simplices)
        if (keep(s) && !b.simplices.count(s)) r.only_first.insert(s);
    for (const auto& s : b.simplices)
        if (keep(s) && !a.simplices.count(s)) r.only_second.insert(s);
    for (const auto& s : r.only_first) ++r.diff_by_dim[simplex_dim(s)];
    for (const auto& s : r.only_second) ++r.diff_by_dim[simplex_dim(s)];
    r.equal = r.only_first.empty() && r.only_second.empty();
    return r;
}

ResolvedCompare compare_at_resolution(const AbstractComplex& a, const AbstractComplex& b, const PointSet& pts,
                                      const Manifold& M, int m, double threshold) {
    ResolvedCompare rc;
    rc.threshold = threshold;
    rc.raw = complex_compare(a, b, m);
    std::vector<Simplex> unresolved_top;
    auto classify_top = [&](const Simplex& s, bool first) {
        ClassifiedDiff d;
        d.simplex = s;
        d.in_first = first;
        Vec c = Vec::Zero(pts.dim);
        for (int v : s) c += pts[v];
        c /= static_cast<double>(s.size());
        auto rv = restricted_voronoi_point(s, pts, M, c);
        d.margin = rv.converged ? rv.margin : -kInf;
        d.resolved = !rv.converged || std::abs(d.margin) >= threshold;
        if (d.resolved) ++rc.mismatches;
        else {
            ++rc.unresolved;
            unresolved_top.push_back(s);
        }
        rc.diffs.push_back(std::move(d));
    };
    for (const auto& s : rc.raw.only_first)
        if (simplex_dim(s) == m) classify_top(s, true);
    for (const auto& s : rc.raw.only_second)
        if (simplex_dim(s) == m) classify_top(s, false);
    auto classify_face = [&](const Simplex& s, bool first) {
        ClassifiedDiff d;
        d.simplex = s;
        d.in_first = first;
        d.margin = 0.0;
        d.resolved = true;
        for (const auto& t : unresolved_top)
            if (std::includes(t.begin(), t.end(), s.begin(), s.end())) d.resolved = false;
        if (d.resolved) ++rc.mismatches;
        else ++rc.unresolved;
        rc.diffs.push_back(std::move(d));
    };
    for (const auto& s : rc.raw.only_first)
        if (simplex_dim(s) < m) classify_face(s, true);
    for (const auto& s : rc.raw.only_second)
        if (simplex_dim(s) < m) classify_face(s, false);
    return rc;
}

namespace {

using SimplexSet = std::set<Simplex>;

SimplexSet link_of(const SimplexSet& k, int v) {
    SimplexSet out;
    for (const auto& s : k) {
        if (s.size() < 2 || !std::binary_search(s.begin(), s.end(), v)) continue;
        Simplex t;
        for (int x : s)
            if (x != v) t.push_back(x);
        out.insert(std::move(t));
    }
    return out;
}

bool connected_complex(const SimplexSet& k) {
    std::map<int, std::vector<int>> adj;
    for (const auto& s : k) {
        adj[s[0]];
        for (size_t i = 1; i < s.size(); ++i) {
            adj[s[0]].push_back(s[i]);
            adj[s[i]].push_back(s[0]);
        }
    }
    if (adj.empty()) return false;
    std::set<int> seen{adj.begin()->first};
    std::queue<int> q;
    q.push(adj.begin()->first);
    while (!q.empty()) {
        int u = q.front();
        q.pop();
        for (int w : adj[u])
            if (seen.insert(w).second) q.push(w);
    }
    return seen.size() == adj.size();
}

int euler_of(const SimplexSet& k) {
    int chi = 0;
    for (const auto& s : k) chi += (s.size() % 2 == 1) ? 1 : -1;
    return chi;
}

// Combinatorial (d)-sphere test for d in {0, 1, 2}; k must be face-closed.
bool is_sphere(const SimplexSet& k, int d, std::string& why) {
    int maxd = -1;
    for (const auto& s : k) maxd = std::max(maxd, simplex_dim(s));
    if (maxd != d) {
        why = "link has dimension " + std::to_string(maxd) + ", expected " + std::to_string(d);
        return false;
    }
    if (d == 0) {
        if (k.size() != 2) why = "link has " + std::to_string(k.size()) + " points, expected 2";
        return k.size() == 2;
    }
    std::set<int> verts;
    for (const auto& s : k)
        if (s.size() == 1) verts.insert(s[0]);
    for (int v : verts) {
        std::string sub;
        if (!is_sphere(link_of(k, v), d - 1, sub)) {
            why = "at " + std::to_string(v) + ": " + sub;
            return false;
        }
    }
    if (!connected_complex(k)) {
        why = "link is disconnected";
        return false;
    }
    const int want = d % 2 == 0 ? 2 : 0;
    if (euler_of(k) != want) {
        why = "link Euler characteristic " + std::to_string(euler_of(k));
        return false;
    }
    return true;
}

} // namespace

ManifoldCheck manifold_complex_check(const AbstractComplex& k, int m) {
    if (m != 2 && m != 3) throw Error(ErrorKind::UnsupportedDim, "manifold check supports m = 2, 3");
    ManifoldCheck r;
    if (!k.face_closed()) r.diagnostics.push_back("complex is not face-closed");
    if (k.max_dim() > m) r.diagnostics.push_back("complex has simplices of dimension " + std::to_string(k.max_dim()));
    for (int v = 0; v < k.n_vertices; ++v) {
        std::string why;
        SimplexSet l = link_of(k.simplices, v);
        if (l.empty()) why = "empty link";
        else is_sphere(l, m - 1, why);
        if (!why.empty()) {
            r.bad_vertices.push_back(v);
            if (r.diagnostics.size() < 50) r.diagnostics.push_back("vertex " + std::to_string(v) + ": " + why);
        }
    }
    r.ok = r.diagnostics.empty();
    return r;
}

int euler_characteristic(const AbstractComplex& k) { return euler_of(k.simplices); }

ProtectionReport power_protection_audit(const AbstractComplex& k, const PointSet& pts, const Manifold& M,
                                        double threshold) {
    ProtectionReport rep;
    rep.threshold = threshold;
    const int m = M.intrinsic_dim();
    std::map<int, TangentChart> charts;
    for (const auto& s : k.simplices) {
        if (simplex_dim(s) != m) continue;
        for (int p : s) {
            ProtectionEntry e;
            e.simplex = s;
            e.vertex = p;
            auto it = charts.find(p);
            if (it == charts.end()) it = charts.emplace(p, M.tangent_chart(pts[p])).first;
            try {
                TangentCenter tc = tangent_center(s, p, pts, it->second);
                double r2 = tc.radius * tc.radius;
                double best = kInf;
                for (int q = 0; q < pts.size(); ++q) {
                    if (std::binary_search(s.begin(), s.end(), q)) continue;
                    best = std::min(best, (tc.center - pts[q]).squaredNorm() - r2);
                }
                e.margin = best;
                e.pass = best > threshold;
            } catch (const Error& err) {
                e.error = err.what();
                e.margin = -kInf;
                e.pass = false;
            }
            rep.min_margin = std::min(rep.min_margin, e.margin);
            if (!e.pass) ++rep.failures;
            rep.entries.push_back(std::move(e));
        }
    }
    return rep;
}

bool RefinementAudit::all_pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
}

RefinementAudit audit_refinement(const RefinementState& st, const std::vector<Vec>& dense,
                                 std::optional<int> expected_euler) {
    RefinementAudit a;
    const Manifold& M = *st.manifold;
    const int m = M.intrinsic_dim();
    const auto& prm = st.params;
    auto add = [&](std::string name, bool pass, std::string detail) {
        a.checks.push_back({std::move(name), pass, std::move(detail)});
    };

    {
        int bad = 0;
        double worst = kInf;
        for (const auto& e : st.log) {
            worst = std::min(worst, e.dist_to_p);
            if (!(e.dist_to_p > prm.epsilon / 9.0)) ++bad;
        }
        double sp = st.pts.size() > 1 ? st.pts.min_pairwise_distance() : kInf;
        std::ostringstream os;
        os << "events=" << st.log.size() << " min_event_dist=" << worst << " final_sparsity=" << sp
           << " bound=" << prm.epsilon / 9.0;
        add("sparsity", bad == 0 && sp > prm.epsilon / 9.0, os.str());
    }
    {
        int big = 0, bad = 0, total = 0;
        for (const auto& star : st.stars) {
            auto visit = [&](const Simplex& s, const TangentCenter& tc) {
                if (!M.in_domain(tc.center)) return;
                ++total;
                if (!(tc.radius < prm.epsilon)) ++big;
                if (classify_gamma(gather(s, st.pts), prm.gamma0) != GammaClass::Good) ++bad;
            };
            for (const auto& [s, tc] : star.msimplices) visit(s, tc);
            for (const auto& [s, tc] : star.singular_msimplices) visit(s, tc);
        }
        std::ostringstream os;
        os << "star_msimplices=" << total << " big=" << big << " bad=" << bad;
        add("star_quality", big == 0 && bad == 0, os.str());
    }
    {
        size_t entries = 0;
        for (const auto& c : st.cosph) entries += c.entries.size();
        add("cosph_empty", entries == 0, "entries=" + std::to_string(entries));
    }
    TangentialComplex tcx = assemble_from_stars(st.stars, m);
    a.complex = from_tangential(tcx, st.pts.size());
    add("star_agreement", tcx.consistent(), "inconsistent_msimplices=" + std::to_string(tcx.inconsistencies.size()));
    {
        const double thr = prm.delta0 * prm.delta0 * prm.epsilon * prm.epsilon / 81.0;
        a.protection = power_protection_audit(a.complex, st.pts, M, thr);
        std::ostringstream os;
        os << "pairs=" << a.protection.entries.size() << " failures=" << a.protection.failures
           << " min_margin=" << a.protection.min_margin << " threshold=" << thr;
        add("power_protection", a.protection.all_pass(), os.str());
    }
    const bool closed = std::isfinite(M.reach());
    if (closed && (m == 2 || m == 3)) {
        a.manifold = manifold_complex_check(a.complex, m);
        add("manifold_complex", a.manifold.ok,
            a.manifold.ok ? "all vertex links are spheres" : "bad vertices: " + vec_list(a.manifold.bad_vertices));
    }
    a.euler = euler_characteristic(a.complex);
    if (expected_euler)
        add("euler_characteristic", a.euler == *expected_euler,
            "chi=" + std::to_string(a.euler) + " expected=" + std::to_string(*expected_euler));
    if (!dense.empty()) {
        a.restricted = restricted_delaunay_oracle(st.pts, M, dense);
        a.comparison = compare_at_resolution(a.complex, a.restricted.complex, st.pts, M, m, 3.0 * a.restricted.band);
        std::ostringstream os;
        os << "resolution=" << a.restricted.resolution << " band=" << a.restricted.band
           << " raw_differences=" << a.comparison.diffs.size() << " mismatches=" << a.comparison.mismatches
           << " unresolved=" << a.comparison.unresolved;
        add("tangential_equals_restricted", a.comparison.mismatches == 0, os.str());
    }
    a.min_edge = kInf;
    a.min_thickness = kInf;
    for (const auto& s : a.complex.simplices) {
        if (s.size() == 2) a.min_edge = std::min(a.min_edge, (st.pts[s[0]] - st.pts[s[1]]).norm());
        if (simplex_dim(s) == m) a.min_thickness = std::min(a.min_thickness, thickness(gather(s, st.pts)));
    }
    return a;
}

} // namespace tdc
