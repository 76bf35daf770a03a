#include "tdc/tangential.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace tdc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kCondMax = 1e12;

struct HalfSpace {
    Vec a;         // normal in chart coordinates
    double b = 0;  // a . y <= b
    double s = 0;  // scale for tolerances
    int site = -1; // -1 for bounding-box constraints
};

void for_each_combination(int n, int k, const std::function<void(const std::vector<int>&)>& f) {
    if (k > n) return;
    std::vector<int> idx(static_cast<size_t>(k));
    for (int i = 0; i < k; ++i) idx[static_cast<size_t>(i)] = i;
    for (;;) {
        f(idx);
        int i = k - 1;
        while (i >= 0 && idx[static_cast<size_t>(i)] == n - k + i) --i;
        if (i < 0) return;
        ++idx[static_cast<size_t>(i)];
        for (int j = i + 1; j < k; ++j) idx[static_cast<size_t>(j)] = idx[static_cast<size_t>(j) - 1] + 1;
    }
}

bool solve_rows(const std::vector<HalfSpace>& hs, const std::vector<int>& rows, int m, Vec& y) {
    Mat a(m, m);
    Vec b(m);
    for (int i = 0; i < m; ++i) {
        a.row(i) = hs[static_cast<size_t>(rows[static_cast<size_t>(i)])].a.transpose();
        b[i] = hs[static_cast<size_t>(rows[static_cast<size_t>(i)])].b;
    }
    Eigen::PartialPivLU<Mat> lu(a);
    if (!(lu.rcond() >= 1.0 / kCondMax)) return false;
    y = lu.solve(b);
    return y.allFinite();
}

// Vertices of {y : a_i . y <= b_i}, keyed by the sorted set of tight constraints.
std::map<std::vector<int>, Vec> enumerate_vertices(const std::vector<HalfSpace>& hs, int m) {
    std::map<std::vector<int>, Vec> out;
    const int c = static_cast<int>(hs.size());
    Vec y;
    for_each_combination(c, m, [&](const std::vector<int>& rows) {
        if (!solve_rows(hs, rows, m, y)) return;
        std::vector<int> tight;
        for (int i = 0; i < c; ++i) {
            const auto& h = hs[static_cast<size_t>(i)];
            double viol = h.a.dot(y) - h.b;
            double tol = kRelTol * h.s;
            if (viol > tol) return;
            if (viol >= -tol) tight.push_back(i);
        }
        out.emplace(std::move(tight), y);
    });
    return out;
}

} // namespace

std::vector<WeightedSite> weighted_sites(int p, const PointSet& pts, const TangentChart& chart) {
    std::vector<WeightedSite> out;
    for (int i = 0; i < pts.size(); ++i) {
        if (i == p) continue;
        WeightedSite w;
        w.index = i;
        Vec d = pts[i] - chart.base;
        w.tangent_coords = chart.frame.basis.transpose() * d;
        w.squared_weight = -(d - chart.frame.basis * w.tangent_coords).squaredNorm();
        out.push_back(std::move(w));
    }
    return out;
}

bool Star::contains(const Simplex& s) const {
    if (!std::binary_search(s.begin(), s.end(), base)) return false;
    for (const auto& mx : maximal)
        if (std::includes(mx.begin(), mx.end(), s.begin(), s.end())) return true;
    return false;
}

std::vector<Simplex> Star::simplices() const {
    std::set<Simplex> all;
    for (const auto& mx : maximal) {
        std::vector<int> others;
        for (int v : mx)
            if (v != base) others.push_back(v);
        const int k = static_cast<int>(others.size());
        for (unsigned mask = 0; mask < (1u << k); ++mask) {
            Simplex s{base};
            for (int i = 0; i < k; ++i)
                if (mask & (1u << i)) s.push_back(others[static_cast<size_t>(i)]);
            std::sort(s.begin(), s.end());
            all.insert(std::move(s));
        }
    }
    return {all.begin(), all.end()};
}

Star compute_star(int p, const PointSet& pts, const Manifold& M, const StarOptions& opt) {
    if (p < 0 || p >= pts.size()) throw Error(ErrorKind::UnknownVertex, "star base");
    return compute_star(p, pts, M, M.tangent_chart(pts[p]), opt);
}

Star compute_star(int p, const PointSet& pts, const Manifold& M, const TangentChart& chart, const StarOptions& opt) {
    if (p < 0 || p >= pts.size()) throw Error(ErrorKind::UnknownVertex, "star base");
    const int m = M.intrinsic_dim();
    const Vec& bp = pts[p];
    std::vector<std::pair<double, int>> order;
    for (int q = 0; q < pts.size(); ++q) {
        if (q == p) continue;
        double d = (pts[q] - bp).norm();
        if (d <= opt.prune_radius) order.emplace_back(d, q);
    }
    if (order.empty()) throw Error(ErrorKind::NeighborhoodTooSparse, "no candidate sites near point " + std::to_string(p));
    std::sort(order.begin(), order.end());
    if (order.front().first <= 0.0) throw Error(ErrorKind::InvalidArgument, "duplicate point " + std::to_string(p));

    const double box = 1e6 * order.back().first;
    size_t k = std::min(order.size(), static_cast<size_t>(std::max(12, 4 * (m + 1))));
    std::map<std::vector<int>, Vec> verts;
    std::vector<HalfSpace> hs;
    bool unbounded = false;
    double rho = 0.0;
    for (;;) {
        hs.clear();
        for (size_t i = 0; i < k; ++i) {
            const auto [d, q] = order[i];
            HalfSpace h;
            h.a = chart.frame.basis.transpose() * (pts[q] - bp);
            if (h.a.norm() <= 1e-12 * d) continue; // site on the normal space of p: no constraint
            h.b = 0.5 * d * d;
            h.s = d * d;
            h.site = q;
            hs.push_back(std::move(h));
        }
        for (int j = 0; j < m; ++j)
            for (double sg : {1.0, -1.0}) {
                HalfSpace h;
                h.a = Vec::Zero(m);
                h.a[j] = sg;
                h.b = box;
                h.s = box;
                hs.push_back(std::move(h));
            }
        verts = enumerate_vertices(hs, m);
        unbounded = false;
        rho = 0.0;
        for (const auto& [tight, y] : verts) {
            bool boxed = false;
            for (int t : tight) boxed = boxed || hs[static_cast<size_t>(t)].site < 0;
            if (boxed) unbounded = true;
            else rho = std::max(rho, y.norm());
        }
        if (unbounded) {
            if (k == order.size()) break;
            k = std::min(order.size(), 2 * k);
            continue;
        }
        const double reach2 = 2.0 * rho * (1.0 + 1e-9);
        size_t needed = static_cast<size_t>(
            std::upper_bound(order.begin(), order.end(), std::make_pair(reach2, pts.size())) - order.begin());
        if (needed <= k) break;
        k = needed;
    }

    Star st;
    st.base = p;
    st.m = m;
    st.unbounded = unbounded;
    st.security_radius = unbounded ? kInf : rho;
    for (const auto& [tight, y] : verts) {
        bool boxed = false;
        for (int t : tight) boxed = boxed || hs[static_cast<size_t>(t)].site < 0;
        if (boxed) continue;
        Simplex mx{p};
        for (int t : tight) mx.push_back(hs[static_cast<size_t>(t)].site);
        std::sort(mx.begin(), mx.end());
        st.maximal.push_back(mx);
        st.cell_vertices.push_back(y);
        TangentCenter tc;
        tc.tangent = y;
        tc.center = embed_tangent(chart, y);
        tc.radius = y.norm();
        Vec dummy;
        for_each_combination(static_cast<int>(tight.size()), m, [&](const std::vector<int>& sub) {
            std::vector<int> rows;
            Simplex s{p};
            for (int i : sub) {
                rows.push_back(tight[static_cast<size_t>(i)]);
                s.push_back(hs[static_cast<size_t>(tight[static_cast<size_t>(i)])].site);
            }
            std::sort(s.begin(), s.end());
            if (solve_rows(hs, rows, m, dummy)) st.msimplices.emplace(s, tc);
            else st.singular_msimplices.emplace(s, tc);
        });
    }
    if (st.maximal.empty())
        throw Error(ErrorKind::NeighborhoodTooSparse, "no m-simplex in the star of point " + std::to_string(p));
    return st;
}

TangentCenter tangent_center(const Simplex& sigma, int p, const PointSet& pts, const TangentChart& chart) {
    const int m = static_cast<int>(chart.frame.basis.cols());
    if (static_cast<int>(sigma.size()) != m + 1) throw Error(ErrorKind::InvalidArgument, "tangent_center needs an m-simplex");
    if (!std::binary_search(sigma.begin(), sigma.end(), p)) throw Error(ErrorKind::UnknownVertex, "p not in simplex");
    Mat a(m, m);
    Vec b(m);
    int r = 0;
    for (int q : sigma) {
        if (q == p) continue;
        Vec d = pts[q] - pts[p];
        a.row(r) = (chart.frame.basis.transpose() * d).transpose();
        b[r] = 0.5 * d.squaredNorm();
        ++r;
    }
    Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    double cond = sv[m - 1] > 0.0 ? sv[0] / sv[m - 1] : kInf;
    if (!(cond <= kCondMax))
        throw Error(ErrorKind::SingularSystem, "condition estimate " + std::to_string(cond));
    TangentCenter tc;
    tc.tangent = svd.solve(b);
    tc.center = embed_tangent(chart, tc.tangent);
    tc.radius = tc.tangent.norm();
    return tc;
}

bool star_affected_by(const Star& star, const TangentChart& chart, const Vec& base, const Vec& x) {
    if (star.unbounded) return true;
    Vec d = x - base;
    Vec a = chart.frame.basis.transpose() * d;
    double b = 0.5 * d.squaredNorm();
    double tol = kRelTol * d.squaredNorm();
    for (const auto& y : star.cell_vertices)
        if (a.dot(y) >= b - tol) return true;
    return false;
}

namespace {

void cosph_scan(const Star& star, const PointSet& pts, const CosphParams& prm, int only_apex,
                std::vector<CosphEntry>& out) {
    for (const auto& [sigma, tc] : star.msimplices) {
        if (!(tc.radius < prm.epsilon)) continue;
        Coords cs = gather(sigma, pts);
        if (classify_gamma(cs, prm.gamma0) != GammaClass::Good) continue;
        const double lsig = edge_extremes(cs).first;
        const double r2 = tc.radius * tc.radius;
        const double reach2 = r2 + prm.delta0 * prm.delta0 * lsig * lsig;
        const double tol = kRelTol * std::max(r2, lsig * lsig);
        auto test = [&](int q) {
            if (std::binary_search(sigma.begin(), sigma.end(), q)) return;
            double gap = (tc.center - pts[q]).squaredNorm() - r2;
            if (gap > reach2 - r2 + tol || gap < -tol) return;
            double lq = lsig;
            for (const auto& v : cs) lq = std::min(lq, (v - pts[q]).norm());
            if (gap > prm.delta0 * prm.delta0 * lq * lq + tol) return;
            CosphEntry e;
            e.facet = sigma;
            e.apex = q;
            e.simplex = sigma;
            e.simplex.push_back(q);
            std::sort(e.simplex.begin(), e.simplex.end());
            e.gap = std::max(0.0, gap);
            e.witness = ElementaryWeight{q, std::sqrt(e.gap)};
            out.push_back(std::move(e));
        };
        if (only_apex >= 0) test(only_apex);
        else
            for (int q = 0; q < pts.size(); ++q) test(q);
    }
}

} // namespace

CosphStar cosph_star(const Star& star, const PointSet& pts, const CosphParams& prm) {
    CosphStar cs;
    cs.base = star.base;
    cosph_scan(star, pts, prm, -1, cs.entries);
    return cs;
}

std::vector<CosphEntry> cosph_entries_for_apex(const Star& star, const PointSet& pts, int apex, const CosphParams& prm) {
    std::vector<CosphEntry> out;
    cosph_scan(star, pts, prm, apex, out);
    return out;
}

std::set<Simplex> TangentialComplex::of_dim(int d) const {
    std::set<Simplex> out;
    for (const auto& s : simplices)
        if (simplex_dim(s) == d) out.insert(s);
    return out;
}

TangentialComplex assemble_from_stars(std::vector<Star> stars, int m) {
    TangentialComplex tc;
    tc.m = m;
    tc.stars = std::move(stars);
    std::map<int, size_t> where;
    for (size_t i = 0; i < tc.stars.size(); ++i) where[tc.stars[i].base] = i;
    std::set<Simplex> msimp;
    for (const auto& st : tc.stars)
        for (const auto& mx : st.maximal) {
            const int k = static_cast<int>(mx.size());
            for (unsigned mask = 1; mask < (1u << k); ++mask) {
                Simplex s;
                for (int i = 0; i < k; ++i)
                    if (mask & (1u << i)) s.push_back(mx[static_cast<size_t>(i)]);
                if (static_cast<int>(s.size()) == m + 1 && std::binary_search(s.begin(), s.end(), st.base))
                    msimp.insert(s);
                tc.simplices.insert(std::move(s));
            }
        }
    for (const auto& s : msimp) {
        Inconsistency inc;
        inc.simplex = s;
        for (int v : s) {
            auto it = where.find(v);
            if (it != where.end() && tc.stars[it->second].contains(s)) inc.holders.push_back(v);
            else inc.missing.push_back(v);
        }
        if (!inc.missing.empty()) tc.inconsistencies.push_back(std::move(inc));
    }
    return tc;
}

TangentialComplex assemble_complex(const PointSet& pts, const Manifold& M, const StarOptions& opt) {
    std::vector<Star> stars;
    stars.reserve(static_cast<size_t>(pts.size()));
    for (int p = 0; p < pts.size(); ++p) stars.push_back(compute_star(p, pts, M, opt));
    return assemble_from_stars(std::move(stars), M.intrinsic_dim());
}

} // namespace tdc
