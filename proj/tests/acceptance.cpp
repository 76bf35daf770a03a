// Acceptance suite: one PASS/FAIL line per criterion, detail lines indented.
// Usage: acceptance [criterion numbers...]   (default: all)

#include "oracles.hpp"
#include "tdc/geodesic.hpp"
#include "tdc/refinement.hpp"
#include "tdc/verification.hpp"

#include <chrono>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <numbers>
#include <set>
#include <sstream>
#include <string>

using namespace tdc;
using oracle::V;

namespace {

constexpr double kRel = 1e-9;

struct Outcome {
    bool pass = false;
    std::string summary;
};

using Clock = std::chrono::steady_clock;
double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

void detail(const std::string& s) { std::printf("    %s\n", s.c_str()); }

// lhs <= rhs up to the relative tolerance
bool le(double lhs, double rhs) { return lhs <= rhs + kRel * std::max({1.0, std::abs(lhs), std::abs(rhs)}); }

// Orthonormal basis of the direction space of aff(v).
Mat direction_basis(const std::vector<V>& v) {
    std::vector<V> b;
    for (size_t i = 1; i < v.size(); ++i) {
        V e = v[i] - v[0];
        for (const auto& u : b) e -= e.dot(u) * u;
        if (e.norm() > 1e-13) b.push_back(e / e.norm());
    }
    Mat m(v[0].size(), static_cast<Eigen::Index>(b.size()));
    for (size_t i = 0; i < b.size(); ++i) m.col(static_cast<Eigen::Index>(i)) = b[i];
    return m;
}

// sin of the largest principal angle from span(u) to span(w), dim u <= dim w.
double oracle_sin(const Mat& u, const Mat& w) {
    Mat r = u - w * (w.transpose() * u);
    if (r.size() == 0) return 0.0;
    return Eigen::JacobiSVD<Mat>(r).singularValues()[0];
}

Coords to_coords(const std::vector<V>& v) { return Coords(v.begin(), v.end()); }

bool oracle_good(const std::vector<V>& v, double g0) {
    const int k = static_cast<int>(v.size());
    for (unsigned mask = 1; mask < (1u << k); ++mask) {
        std::vector<V> f;
        for (int i = 0; i < k; ++i)
            if (mask & (1u << i)) f.push_back(v[static_cast<size_t>(i)]);
        if (f.size() >= 2 && oracle::thickness(f) < std::pow(g0, static_cast<double>(f.size() - 1))) return false;
    }
    return true;
}

bool oracle_flake(const std::vector<V>& v, double g0) {
    const int k = static_cast<int>(v.size());
    if (oracle::thickness(v) >= std::pow(g0, k - 1)) return false;
    for (int skip = 0; skip < k; ++skip) {
        std::vector<V> f;
        for (int i = 0; i < k; ++i)
            if (i != skip) f.push_back(v[static_cast<size_t>(i)]);
        if (!oracle_good(f, g0)) return false;
    }
    return true;
}

// ---------------------------------------------------------------- criterion 1

struct Tally {
    std::string name;
    long instances = 0;
    long violations = 0;
    double worst = 0.0; // max of lhs / rhs
    void check(bool ok, double ratio) {
        if (!ok) ++violations;
        if (std::isfinite(ratio)) worst = std::max(worst, ratio);
    }
};

Outcome criterion_lemmas() {
    const auto t0 = Clock::now();
    const long n = 10000;
    std::mt19937_64 rng(20241);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    auto pick = [&](int lo, int hi) { return lo + static_cast<int>(rng() % static_cast<unsigned>(hi - lo + 1)); };
    std::vector<Tally> tallies;
    long oracle_disagreements = 0;

    // Thickness under perturbation.
    {
        Tally alt{"thickness/altitudes"}, ud{"thickness/upsilon*delta"}, th{"thickness/upsilon"};
        for (long t = 0; t < n; ++t) {
            const int j = pick(1, 4), N = pick(j, 6);
            auto s = oracle::random_simplex(rng, j, N);
            Coords cs = to_coords(s);
            const double ups = thickness(cs);
            if (std::abs(ups - oracle::thickness(s)) > 1e-9 * std::max(ups, 1e-3)) ++oracle_disagreements;
            auto [L, D] = edge_extremes(cs);
            const double xi = t % 4 == 0 ? 1.0 : u(rng);
            const double rho = (1.0 - xi) * ups * ups * L / 14.0 * (t % 2 ? 1.0 : u(rng));
            std::vector<V> p = s;
            const int adv = pick(0, j);
            for (int i = 0; i <= j; ++i) {
                V dir = oracle::random_unit(rng, N);
                if (i == adv) {
                    // push the vertex toward its opposite face
                    std::vector<V> rest;
                    for (int k = 0; k <= j; ++k)
                        if (k != i) rest.push_back(s[static_cast<size_t>(k)]);
                    Mat b = direction_basis(rest);
                    V r = s[static_cast<size_t>(i)] - rest[0];
                    V perp = r - b * (b.transpose() * r);
                    if (perp.norm() > 0) dir = -perp / perp.norm();
                }
                p[static_cast<size_t>(i)] += rho * dir;
            }
            Coords pc = to_coords(p);
            for (int i = 0; i <= j; ++i) {
                double a0 = altitude(cs, i), a1 = altitude(pc, i);
                alt.check(le(xi * a0, a1), a1 > 0 ? xi * a0 / a1 : INFINITY);
            }
            alt.instances++;
            auto [Lp, Dp] = edge_extremes(pc);
            const double upsp = thickness(pc);
            ud.check(le(xi * ups * D, upsp * Dp), xi * ups * D / (upsp * Dp));
            ud.instances++;
            const double mid = (1.0 - 2.0 * rho / D) * xi * ups;
            th.check(le(mid, upsp) && le(6.0 / 7.0 * xi * ups, mid), mid / upsp);
            th.instances++;
        }
        tallies.insert(tallies.end(), {alt, ud, th});
    }

    // Circumscribing balls under perturbation.
    {
        Tally cc{"circumball/centre"}, rr{"circumball/radius"};
        for (long t = 0; t < n; ++t) {
            const int j = pick(1, 4), N = pick(j + 1, 6);
            auto s = oracle::random_simplex(rng, j, N);
            Coords cs = to_coords(s);
            const double ups = thickness(cs);
            auto [L, D] = edge_extremes(cs);
            auto sp = circumsphere(cs);
            if ((sp.center - oracle::circumcentre(s)).norm() > 1e-8 * (1.0 + sp.center.norm())) ++oracle_disagreements;
            Mat b = direction_basis(s);
            V off = oracle::random_unit(rng, N);
            off -= b * (b.transpose() * off);
            if (off.norm() > 0) off *= u(rng) * sp.radius / off.norm();
            V c = sp.center + off;
            const double r = (c - s[0]).norm();
            const double eps = r * (1.0 + 1e-6 + u(rng));
            const double rho = ups * ups * L / 28.0 * (t % 2 ? 1.0 : u(rng));
            std::vector<V> p = s;
            for (auto& v : p) v += rho * u(rng) * oracle::random_unit(rng, N);
            // nearest centre of a ball through the perturbed vertices
            V cp = oracle::circumcentre(p);
            Mat bp = direction_basis(p);
            V d = c - cp;
            V ct = cp + d - bp * (bp.transpose() * d);
            const double rt = (ct - p[0]).norm();
            const double scale = eps * rho / (ups * D);
            cc.check((ct - c).norm() < 8.0 * scale || rho == 0.0, rho > 0 ? (ct - c).norm() / (8.0 * scale) : 0.0);
            rr.check(std::abs(rt - r) < 9.0 * scale || rho == 0.0, rho > 0 ? std::abs(rt - r) / (9.0 * scale) : 0.0);
            cc.instances++;
            rr.instances++;
        }
        tallies.insert(tallies.end(), {cc, rr});
    }

    // Whitney angle bound.
    {
        Tally w{"whitney"};
        for (long t = 0; t < n; ++t) {
            const int j = pick(1, 4), k = pick(j, 5), N = pick(k + 1, 7);
            Mat q = Mat::Random(N, k);
            Eigen::HouseholderQR<Mat> qr(q);
            Mat hb = qr.householderQ() * Mat::Identity(N, k);
            V o = oracle::random_simplex(rng, 0, N)[0];
            Mat nb = qr.householderQ() * Mat::Identity(N, N);
            nb = nb.rightCols(N - k).eval();
            const double h = 0.05 * u(rng);
            std::vector<V> s;
            for (int i = 0; i <= j; ++i) {
                V a = oracle::random_simplex(rng, 0, k)[0];
                V e = oracle::random_unit(rng, N - k) * h * u(rng);
                s.push_back(o + hb * a + nb * e);
            }
            Coords cs = to_coords(s);
            const double ups = thickness(cs);
            auto [L, D] = edge_extremes(cs);
            const double sn = oracle_sin(direction_basis(s), hb);
            AffineFrame fh{o, hb};
            if (std::abs(subspace_sin(affine_frame(cs), fh) - sn) > 1e-9) ++oracle_disagreements;
            const double bound = 2.0 * h / (ups * D);
            w.check(le(sn, bound), sn / bound);
            w.instances++;
        }
        tallies.push_back(w);
    }

    // Altitude ratios.
    {
        Tally ar{"altitude-ratios"};
        for (long t = 0; t < n; ++t) {
            const int j = pick(2, 4), N = pick(j, 6);
            auto s = oracle::random_simplex(rng, j, N);
            Coords cs = to_coords(s);
            int p = pick(0, j), q = pick(0, j - 1);
            if (q >= p) ++q;
            auto facet_without = [&](int skip) {
                std::vector<V> f;
                for (int i = 0; i <= j; ++i)
                    if (i != skip) f.push_back(s[static_cast<size_t>(i)]);
                return f;
            };
            auto sp = facet_without(p), sq = facet_without(q);
            const int p_in_sq = p < q ? p : p - 1, q_in_sp = q < p ? q : q - 1;
            const double r1 = altitude(cs, p) / altitude(to_coords(sq), p_in_sq);
            const double r2 = altitude(cs, q) / altitude(to_coords(sp), q_in_sp);
            const double sn = oracle_sin(direction_basis(sq), direction_basis(sp));
            const double err = std::max(std::abs(r1 - sn), std::abs(r2 - sn));
            ar.check(err <= kRel * std::max(1.0, sn), err / (kRel * std::max(1.0, sn)));
            ar.instances++;
        }
        tallies.push_back(ar);
    }

    // Flake altitudes.
    {
        Tally fl{"flake-altitudes"};
        long tries = 0;
        while (fl.instances < n && tries < 200 * n) {
            ++tries;
            const int k = pick(2, 4), N = pick(k, 6);
            const double g0 = 0.05 + 0.25 * u(rng);
            auto base = oracle::random_simplex(rng, k - 1, N);
            if (!oracle_good(base, g0)) continue;
            Mat b = direction_basis(base);
            V bary(k);
            for (int i = 0; i < k; ++i) bary[i] = u(rng);
            bary /= bary.sum();
            bary = (1.0 + 0.6 * u(rng)) * bary - V::Constant(k, 0.3 * u(rng) / k);
            bary /= bary.sum();
            V apex = V::Zero(N);
            for (int i = 0; i < k; ++i) apex += bary[i] * base[static_cast<size_t>(i)];
            V nrm = oracle::random_unit(rng, N);
            nrm -= b * (b.transpose() * nrm);
            if (nrm.norm() < 1e-6) continue;
            const double dia = oracle::longest_edge(base);
            apex += nrm / nrm.norm() * dia * std::pow(g0, k) * 2.0 * k * u(rng);
            std::vector<V> s = base;
            s.push_back(apex);
            Coords cs = to_coords(s);
            const bool lib = classify_gamma(cs, g0) == GammaClass::Flake;
            const bool ref = oracle_flake(s, g0);
            if (lib != ref) {
                // only count disagreements away from the thresholds
                ++oracle_disagreements;
                continue;
            }
            if (!lib) continue;
            auto [L, D] = edge_extremes(cs);
            const double bound = flake_altitude_bound(k, D, L, g0);
            const double ref_bound = k * D * D * g0 / ((k - 1) * L);
            if (std::abs(bound - ref_bound) > 1e-12 * ref_bound) ++oracle_disagreements;
            for (int i = 0; i <= k; ++i) {
                double a = altitude(cs, i);
                fl.check(a < bound, a / bound);
            }
            fl.instances++;
        }
        tallies.push_back(fl);
    }

    // Elementary weight items 1-3.
    {
        Tally e1{"elementary-weight/1"}, e2{"elementary-weight/2"}, e3{"elementary-weight/3"};
        for (long t = 0; t < n; ++t) {
            const int j = pick(1, 4), N = pick(j, 6);
            auto s = oracle::random_simplex(rng, j, N);
            Coords cs = to_coords(s);
            auto [L, D] = edge_extremes(cs);
            const double d0 = 0.25 * u(rng);
            const int carrier = pick(0, j);
            const double w = (t % 3 == 0 ? 1.0 : u(rng)) * d0 * L;
            auto [c, r] = weighted_center(cs, ElementaryWeight{carrier, w});
            V cref = oracle::weighted_centre(s, static_cast<size_t>(carrier), w);
            if ((c - cref).norm() > 1e-8 * (1.0 + cref.norm())) ++oracle_disagreements;
            // item 1 on a random face with at least two vertices
            std::vector<int> face;
            while (face.size() < 2) {
                face.clear();
                for (int i = 0; i <= j; ++i)
                    if (u(rng) < 0.6) face.push_back(i);
            }
            Coords fc;
            int local = 0;
            double fw = 0.0;
            for (size_t i = 0; i < face.size(); ++i) {
                fc.push_back(s[static_cast<size_t>(face[i])]);
                if (face[i] == carrier) {
                    local = static_cast<int>(i);
                    fw = w;
                }
            }
            const double r1 = weighted_center(fc, ElementaryWeight{local, fw}).second;
            e1.check(le(r1, r), r1 / r);
            e1.instances++;
            const double bound2 = 2.0 * r / (1.0 - d0 * d0);
            e2.check(le(D, bound2), D / bound2);
            e2.instances++;
            const double ups = thickness(cs);
            const double rc = circumsphere(cs).radius;
            const double eta = d0 * d0 / ups, ratio = r / rc;
            e3.check(le(1.0 - eta, ratio) && le(ratio, 1.0 + eta),
                     eta > 0 ? std::abs(ratio - 1.0) / eta : (ratio == 1.0 ? 0.0 : INFINITY));
            e3.instances++;
        }
        tallies.insert(tallies.end(), {e1, e2, e3});
    }

    bool ok = oracle_disagreements == 0;
    long total_viol = 0;
    for (const auto& t : tallies) {
        detail(fmt("%-26s instances %6ld violations %ld max lhs/rhs %.6f", t.name.c_str(), t.instances, t.violations,
                   t.worst));
        total_viol += t.violations;
        ok = ok && t.violations == 0 && t.instances >= n;
    }
    detail(fmt("library/oracle disagreements %ld", oracle_disagreements));
    const double secs = seconds_since(t0);
    ok = ok && secs < 60.0;
    return {ok, fmt("lemma property suite: %ld violations over %zu checks, %.1f s (limit 60 s)", total_viol,
                    tallies.size(), secs)};
}

// ---------------------------------------------------------------- criterion 2

struct TorusOracle {
    double R = 2.0, r = 0.5;
    V X(double th, double ph) const {
        return oracle::v3((R + r * std::cos(ph)) * std::cos(th), (R + r * std::cos(ph)) * std::sin(th), r * std::sin(ph));
    }
    Mat J(double th, double ph) const {
        Mat j(3, 2);
        j.col(0) = oracle::v3(-(R + r * std::cos(ph)) * std::sin(th), (R + r * std::cos(ph)) * std::cos(th), 0.0);
        j.col(1) = oracle::v3(-r * std::sin(ph) * std::cos(th), -r * std::sin(ph) * std::sin(th), r * std::cos(ph));
        return j;
    }
    Mat T(double th, double ph) const {
        Mat j = J(th, ph);
        j.col(0).normalize();
        j.col(1).normalize();
        return j;
    }
    std::pair<double, double> params(const V& x) const {
        return {std::atan2(x[1], x[0]), std::atan2(x[2], std::hypot(x[0], x[1]) - R)};
    }
    // point of the torus near (th, ph) whose projection onto T_x is x + T a
    V lift(double th, double ph, const V& a) const {
        Mat t = T(th, ph);
        V x = X(th, ph);
        double u = th, v = ph;
        for (int it = 0; it < 60; ++it) {
            V f = t.transpose() * (X(u, v) - x) - a;
            if (f.norm() < 1e-15) break;
            Eigen::Matrix2d jj = t.transpose() * J(u, v);
            Eigen::Vector2d step = jj.partialPivLu().solve(Eigen::Vector2d(f[0], f[1]));
            u -= step[0];
            v -= step[1];
        }
        return X(u, v);
    }
};

Mat sphere_tangent(const V& x) {
    Mat xm = x;
    Eigen::HouseholderQR<Mat> qr(xm);
    Mat q = qr.householderQ() * Mat::Identity(x.size(), x.size());
    return q.rightCols(x.size() - 1);
}

// Grid graph on the torus around params (th, ph), nodes within `radius` of X(th, ph).
struct Patch {
    std::vector<V> nodes;
    int centre = -1;
    double h = 0.0;
};
Patch torus_patch(const TorusOracle& t, double th, double ph, double radius, double spacing) {
    Patch p;
    V c = t.X(th, ph);
    const double dph = spacing / t.r;
    const int nph = static_cast<int>(std::ceil(1.6 * radius / (t.r * dph))) + 2;
    for (int b = -nph; b <= nph; ++b) {
        const double v = ph + b * dph;
        const double ring = t.R + t.r * std::cos(v);
        const double dth = spacing / ring;
        const int nth = static_cast<int>(std::ceil(1.6 * radius / (ring * dth))) + 2;
        for (int a = -nth; a <= nth; ++a) {
            V x = t.X(th + a * dth, v);
            if ((x - c).norm() > radius) continue;
            if (a == 0 && b == 0) p.centre = static_cast<int>(p.nodes.size());
            p.nodes.push_back(x);
        }
    }
    p.h = 2.5 * spacing;
    return p;
}

Outcome criterion_manifold_bounds() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double tau = 2.0 * std::numbers::pi;
    const long n = 10000;
    TorusOracle tor;
    auto torus = parse_manifold("torus:R=2,r=0.5");
    auto sphere = parse_manifold("sphere:m=2,N=3");
    std::vector<Tally> tallies;
    long lib_disagreements = 0;

    // sphere: y at chord distance r from x
    auto sphere_pair = [&](double rmax) {
        V x = oracle::random_unit(rng, 3);
        Mat t = sphere_tangent(x);
        V dir = t * oracle::random_unit(rng, 2);
        double r = rmax * u(rng);
        double th = 2.0 * std::asin(r / 2.0);
        return std::make_tuple(x, V(std::cos(th) * x + std::sin(th) * dir), t);
    };
    // torus: random point, partner found by a short parametric step
    auto torus_pair = [&](double rmax) {
        for (;;) {
            double th = tau * u(rng), ph = tau * u(rng);
            V a = oracle::random_unit(rng, 2) * rmax * u(rng);
            double th2 = th + a[0] / (tor.R + tor.r * std::cos(ph)) * 1.3, ph2 = ph + a[1] / tor.r * 1.3;
            V x = tor.X(th, ph), y = tor.X(th2, ph2);
            if ((x - y).norm() < rmax) return std::make_tuple(th, ph, x, th2, ph2, y);
        }
    };

    for (int which = 0; which < 2; ++which) {
        const char* name = which == 0 ? "sphere" : "torus";
        const double rch = 1.0 * (which == 0 ? 1.0 : tor.r);
        const Manifold& M = which == 0 ? *sphere : *torus;

        Tally fed{std::string(name) + "/federer"};
        double max_slack = 0.0;
        for (long i = 0; i < n; ++i) {
            V x, y;
            Mat t;
            if (which == 0) std::tie(x, y, t) = sphere_pair(rch * 0.999);
            else {
                auto [th, ph, xx, th2, ph2, yy] = torus_pair(rch * 0.999);
                x = xx;
                y = yy;
                t = tor.T(th, ph);
            }
            const double r = (x - y).norm();
            V d = y - x;
            const double dist = (d - t * (t.transpose() * d)).norm();
            const double bound = r * r / (2.0 * rch);
            fed.check(le(dist, bound), dist / bound);
            if (which == 0) max_slack = std::max(max_slack, std::abs(bound - dist));
            fed.instances++;
            if (oracle_sin(M.tangent_basis(x), t) > 1e-9) ++lib_disagreements;
        }
        tallies.push_back(fed);
        if (which == 0) {
            detail(fmt("sphere Federer sharpness: max |bound - distance| = %.3e (limit 1e-9)", max_slack));
            if (max_slack >= 1e-9) tallies.back().violations++;
        }

        Tally lift{std::string(name) + "/distance-to-manifold"};
        for (long i = 0; i < n; ++i) {
            const double r = rch / 4.0 * u(rng);
            V a = oracle::random_unit(rng, 2) * r;
            V x, v, y;
            if (which == 0) {
                x = oracle::random_unit(rng, 3);
                Mat t = sphere_tangent(x);
                v = x + t * a;
                y = std::sqrt(1.0 - r * r) * x + t * a;
            } else {
                double th = tau * u(rng), ph = tau * u(rng);
                x = tor.X(th, ph);
                v = x + tor.T(th, ph) * a;
                y = tor.lift(th, ph, a);
            }
            if (std::abs(M.distance(y)) > 1e-9) ++lib_disagreements;
            auto chart = M.tangent_chart(x);
            Vec ylib = M.lift_from_tangent(chart, project_to_tangent(chart, v));
            if ((ylib - y).norm() > 1e-8) ++lib_disagreements;
            const double bound = 2.0 * r * r / rch;
            const double d = (v - y).norm();
            lift.check(le(d, bound), r > 0 ? d / bound : 0.0);
            lift.instances++;
        }
        tallies.push_back(lift);

        Tally tv{std::string(name) + "/tangent-variation"};
        for (long i = 0; i < n; ++i) {
            Mat tx, ty;
            double r;
            if (which == 0) {
                auto [x, y, t] = sphere_pair(rch / 4.0);
                tx = t;
                ty = sphere_tangent(y);
                r = (x - y).norm();
            } else {
                auto [th, ph, x, th2, ph2, y] = torus_pair(rch / 4.0);
                tx = tor.T(th, ph);
                ty = tor.T(th2, ph2);
                r = (x - y).norm();
            }
            const double sn = oracle_sin(tx, ty);
            const double bound = 6.0 * r / rch;
            tv.check(sn < bound || r == 0.0, r > 0 ? sn / bound : 0.0);
            tv.instances++;
        }
        tallies.push_back(tv);
    }

    // metric distortion: x, y in B(p, r) with r = rch/100
    {
        Tally s{"sphere/metric-distortion"}, t{"torus/metric-distortion"};
        const double r = 1.0 / 100.0;
        for (long i = 0; i < n; ++i) {
            V p = oracle::random_unit(rng, 3);
            Mat tp = sphere_tangent(p);
            auto near = [&]() {
                for (;;) {
                    V a = oracle::random_unit(rng, 2) * r * std::sqrt(u(rng));
                    V q = (p + tp * a).normalized();
                    if ((q - p).norm() <= r) return q;
                }
            };
            V x = near(), y = near();
            const double dm = 2.0 * std::asin(std::min(1.0, (x - y).norm() / 2.0));
            const double de = (tp.transpose() * (x - y)).norm();
            const double bound = 23.0 * r * r / 1.0;
            s.check(le(std::abs(dm - de), bound), std::abs(dm - de) / bound);
            s.instances++;
        }
        const double rt = tor.r / 100.0;
        double worst_raw = 0.0;
        double hmax = 0.0;
        while (t.instances < n) {
            double th = tau * u(rng), ph = tau * u(rng);
            Patch pa = torus_patch(tor, th, ph, 2.0 * rt, rt / 40.0);
            hmax = std::max(hmax, pa.h);
            GeodesicGraph g(pa.nodes, pa.h);
            Mat tp = tor.T(th, ph);
            V p = tor.X(th, ph);
            std::vector<int> inside;
            for (int k = 0; k < g.size(); ++k)
                if ((g.node(k) - p).norm() <= rt) inside.push_back(k);
            for (int a = 0; a < 10; ++a) {
                int xi = inside[rng() % inside.size()];
                auto dist = g.distances_from(xi, 4.0 * rt);
                for (int b = 0; b < 10 && t.instances < n; ++b) {
                    int yi = inside[rng() % inside.size()];
                    const double de = (tp.transpose() * (g.node(xi) - g.node(yi))).norm();
                    const double dm = dist[static_cast<size_t>(yi)];
                    const double bound = 23.0 * rt * rt / tor.r;
                    const double raw = std::abs(dm - de);
                    worst_raw = std::max(worst_raw, raw / bound);
                    t.check(le(raw, bound + 2.0 * pa.h), raw / (bound + 2.0 * pa.h));
                    t.instances++;
                }
            }
        }
        detail(fmt("torus metric distortion: graph edge radius h = %.2e, worst |d_graph - d_E|/bound without slack %.4f",
                   hmax, worst_raw));
        tallies.insert(tallies.end(), {s, t});
    }

    // geodesic bound for d_E <= rch/2
    {
        Tally s{"sphere/geodesic-bound"}, t{"torus/geodesic-bound"};
        for (long i = 0; i < n; ++i) {
            auto [x, y, tx] = sphere_pair(0.5);
            const double de = (x - y).norm();
            const double dm = 2.0 * std::asin(de / 2.0);
            const double bound = de * (1.0 + 2.0 * de / 1.0);
            s.check(le(dm, bound), dm / bound);
            s.instances++;
        }
        const double lim = tor.r / 2.0;
        while (t.instances < n) {
            double th = tau * u(rng), ph = tau * u(rng);
            Patch pa = torus_patch(tor, th, ph, 1.4 * lim, 0.005);
            GeodesicGraph g(pa.nodes, pa.h);
            auto dist = g.distances_from(pa.centre, 3.0 * lim);
            const V& x = g.node(pa.centre);
            int taken = 0;
            for (int tries = 0; taken < 100 && tries < 10000 && t.instances < n; ++tries) {
                int yi = static_cast<int>(rng() % static_cast<unsigned>(g.size()));
                const double de = (g.node(yi) - x).norm();
                if (de > lim || yi == pa.centre) continue;
                const double bound = de * (1.0 + 2.0 * de / tor.r);
                const double dm = dist[static_cast<size_t>(yi)];
                t.check(le(dm, bound + 2.0 * pa.h), dm / (bound + 2.0 * pa.h));
                t.instances++;
                ++taken;
            }
        }
        tallies.insert(tallies.end(), {s, t});
    }

    bool ok = lib_disagreements == 0;
    long viol = 0;
    for (const auto& tl : tallies) {
        detail(fmt("%-30s pairs %6ld violations %ld max lhs/rhs %.6f", tl.name.c_str(), tl.instances, tl.violations,
                   tl.worst));
        viol += tl.violations;
        ok = ok && tl.violations == 0 && tl.instances >= n;
    }
    detail(fmt("library/oracle disagreements (tangent spaces, lifts) %ld", lib_disagreements));
    const double secs = seconds_since(t0);
    ok = ok && secs < 120.0;
    return {ok, fmt("manifold bound suite: %ld violations over %zu checks, %.1f s (limit 120 s)", viol, tallies.size(), secs)};
}

// ---------------------------------------------------------------- criterion 3

Outcome criterion_flat_exactness() {
    const auto t0 = Clock::now();
    auto M = parse_manifold("flat:m=2,N=3,L=1.05");
    auto dense = M->dense_sample(200000, 99);
    int failures = 0, unresolved = 0, sets = 0;
    for (int seed = 1; seed <= 20; ++seed) {
        std::mt19937_64 rng(static_cast<std::uint64_t>(seed));
        std::uniform_real_distribution<double> u(0.0, 1.0);
        const int n = 50 + static_cast<int>(rng() % 151);
        const int nb = 48;
        PointSet pts(3);
        auto far_enough = [&](const V& x) {
            for (const auto& q : pts.pts)
                if ((q - x).norm() < 0.05) return false;
            return true;
        };
        for (int i = 0; i < nb; ++i) {
            double a = 2.0 * std::numbers::pi * (i + 0.3 * (u(rng) - 0.5)) / nb;
            double rr = 1.0 + 2e-4 * (u(rng) - 0.5);
            V x = oracle::v3(rr * std::cos(a), rr * std::sin(a), 0.0);
            if (far_enough(x)) pts.add(x);
        }
        while (pts.size() < n) {
            double a = 2.0 * std::numbers::pi * u(rng), rr = 0.95 * std::sqrt(u(rng));
            V x = oracle::v3(rr * std::cos(a), rr * std::sin(a), 0.0);
            if (far_enough(x)) pts.add(x);
        }
        auto tc = from_tangential(assemble_complex(pts, *M), pts.size());
        auto amb = ambient_delaunay_bruteforce(pts);
        auto c_amb = complex_compare(tc, amb, 2);
        auto ro = restricted_delaunay_oracle(pts, *M, dense);
        auto c_res = compare_at_resolution(tc, ro.complex, pts, *M, 2, 3.0 * ro.band);
        auto g = build_site_graph(pts, dense);
        auto io = intrinsic_delaunay_oracle(pts, g, 2, 3.0 * g.resolution);
        auto c_int = compare_at_resolution(tc, io.complex, pts, *M, 2, 3.0 * io.band);
        const bool ok = c_amb.equal && amb.max_dim() == 2 && c_res.mismatches == 0 && c_int.mismatches == 0;
        unresolved += c_res.unresolved + c_int.unresolved;
        for (const auto* c : {&c_res, &c_int})
            for (const auto& d : c->diffs)
                if (d.resolved)
                    detail(fmt("  seed %d %s %s only in %s, margin %.3g (threshold %.3g)", seed,
                               c == &c_res ? "restricted" : "intrinsic", simplex_to_string(d.simplex).c_str(),
                               d.in_first ? "tangential" : "oracle", d.margin, c->threshold));
        ++sets;
        if (!ok) ++failures;
        if (!ok || seed <= 2)
            detail(fmt("seed %2d n=%3d triangles %zu ambient-diff %zu restricted mismatches %d/unresolved %d "
                       "intrinsic mismatches %d/unresolved %d",
                       seed, pts.size(), tc.of_dim(2).size(), c_amb.only_first.size() + c_amb.only_second.size(),
                       c_res.mismatches, c_res.unresolved, c_int.mismatches, c_int.unresolved));
    }
    return {failures == 0, fmt("flat-patch exactness: %d/%d sets equal (tangential = ambient exactly; restricted and "
                               "intrinsic 0 resolved mismatches, %d unresolved near-degenerate), %.1f s",
                               sets - failures, sets, unresolved, seconds_since(t0))};
}

// ---------------------------------------------------------------- criteria 4, 5

Parameters headline_params() {
    Parameters p;
    p.epsilon = 0.3;
    p.gamma0 = 0.05;
    p.delta0 = 0.05;
    p.alpha = 0.25;
    p.beta = 4.5;
    p.seed = 1;
    p.mode = Mode::Practical;
    return p;
}

Outcome end_to_end(const std::string& spec, int chi, const char* label) {
    const auto t0 = Clock::now();
    auto M = parse_manifold(spec);
    Parameters p = headline_params();
    auto hyp = check_hypotheses(p, *M);
    if (!hyp.ok) return {false, fmt("%s: practical hypotheses fail", label)};
    auto dense = M->dense_sample(100000, 1);
    auto initial = farthest_point_net(dense, p.epsilon).points;
    RefinementState st = init_state(M, initial, p);
    RefineSummary sum;
    try {
        sum = refine(st);
    } catch (const Error& e) {
        return {false, fmt("%s: refinement aborted: %s", label, e.what())};
    }
    const double refine_secs = seconds_since(t0);
    detail(fmt("initial %d points, %ld insertions (rule1 %ld, rule2 %ld), final %d points, refine %.1f s",
               initial.size(), sum.insertions, sum.rule1, sum.rule2, st.pts.size(), refine_secs));
    auto audit = audit_refinement(st, dense, chi);
    bool ok = sum.insertions < 10000 && refine_secs < 300.0;
    int failed = 0;
    for (const auto& c : audit.checks) {
        detail(fmt("%s %s: %s", c.pass ? "pass" : "FAIL", c.name.c_str(), c.detail.c_str()));
        if (!c.pass) ++failed;
    }
    ok = ok && audit.all_pass();
    return {ok, fmt("%s end-to-end: %ld insertions, %zu audits, %d failed, chi %d (expected %d), %.1f s", label,
                    sum.insertions, audit.checks.size(), failed, audit.euler, chi, seconds_since(t0))};
}

// ---------------------------------------------------------------- criterion 6

Outcome criterion_constants() {
    auto S = parse_manifold("sphere:m=2,N=3");
    Parameters p = headline_params();
    p.delta0 = 0.1;
    auto c = derive_constants(p, *S);
    const double eps0 = 1.0 / 4624.0, mu0 = 1.0 / 9.0;
    // independent evaluation of the H1 threshold formula
    const double h1 = 2.0 / ((1.0 - 0.1 * 0.1) * (1.0 - 0.25 - 4.5 / 4624.0));
    bool ok = true;
    auto line = [&](const char* what, double got, double want, double tol) {
        bool pass = std::abs(got - want) <= tol;
        ok = ok && pass;
        detail(fmt("%s %-22s %.12f expected %.12f (tol %.0e)", pass ? "pass" : "FAIL", what, got, want, tol));
    };
    line("eps_tilde0", c.eps_tilde0, eps0, 1e-15);
    line("mu0", c.mu0, mu0, 1e-15);
    line("H1 threshold", c.h1_threshold, h1, 1e-6);
    line("H1 threshold (3 dp)", c.h1_threshold, 2.697, 5e-4);

    Parameters s = headline_params();
    s.mode = Mode::Strict;
    s.epsilon = 0.3 * S->reach();
    auto rep = check_hypotheses(s, *S);
    const auto& h5 = rep.get("H5");
    const double thr = s.delta0 * s.delta0 * std::pow(s.gamma0, 4) / 1.1e9;
    const bool h5ok = !h5.pass && h5.required && !rep.ok && std::abs(h5.threshold - thr) <= 1e-12 * thr;
    ok = ok && h5ok;
    detail(fmt("%s strict H5: eps_tilde %.3g <= %.6g fails, margin ratio %.6g", h5ok ? "pass" : "FAIL", h5.value,
               h5.threshold, h5.value / h5.threshold));
    return {ok, fmt("constant reproduction: eps_tilde0 = 1/%.0f, mu0 = 1/%.0f, H1 = %.7f, strict H5 FAIL ratio %.4g",
                    1.0 / c.eps_tilde0, 1.0 / c.mu0, c.h1_threshold, h5.value / h5.threshold)};
}

// ---------------------------------------------------------------- criterion 7

// Smallest R(tau, omega) over elementary weights with weight <= wmax. The
// centre is C = v0 + E a; equal power to the non-carrier vertices and the
// carrier's excess power are affine in a, so each active set is a linear
// least-squares problem. Handles degenerate tau.
double oracle_min_weighted_radius(const std::vector<V>& v, double wmax) {
    const int n = static_cast<int>(v.size());
    const double smax = wmax * wmax;
    double diam = 0.0;
    for (const auto& a : v)
        for (const auto& b : v) diam = std::max(diam, (a - b).norm());
    const double tol = 1e-9 * diam * diam;
    Mat e(v[0].size(), n - 1);
    for (int i = 1; i < n; ++i) e.col(i - 1) = v[i] - v[0];
    double best = INFINITY;
    for (int c = 0; c < n; ++c) {
        const int s = c == 0 ? 1 : 0;
        // row for vertex i: |C - v_i|^2 - |C - v_s|^2 = g a + k
        auto row = [&](int i, Mat& g, Vec& k, int r) {
            g.row(r) = 2.0 * (v[s] - v[i]).transpose() * e;
            k[r] = 2.0 * v[0].dot(v[s] - v[i]) + v[i].squaredNorm() - v[s].squaredNorm();
        };
        for (int active = 0; active < 3; ++active) {
            const int rows = n - 2 + (active > 0 ? 1 : 0);
            Mat g = Mat::Zero(std::max(rows, 1), n - 1);
            Vec k = Vec::Zero(std::max(rows, 1));
            int r = 0;
            for (int i = 0; i < n; ++i)
                if (i != s && i != c) row(i, g, k, r++);
            if (active > 0) {
                row(c, g, k, r);
                k[r] -= active == 1 ? 0.0 : smax;
                ++r;
            }
            Vec a0 = Vec::Zero(n - 1);
            Mat ker = Mat::Identity(n - 1, n - 1);
            if (r > 0) {
                Mat gg = g.topRows(r);
                Vec kk = -k.head(r);
                Eigen::CompleteOrthogonalDecomposition<Mat> cod(gg);
                cod.setThreshold(1e-12);
                a0 = cod.solve(kk);
                if ((gg * a0 - kk).norm() > tol) continue;
                Eigen::FullPivLU<Mat> lu(gg);
                lu.setThreshold(1e-12);
                ker = lu.kernel();
                if (lu.rank() == n - 1) ker = Mat::Zero(n - 1, 0);
            }
            Vec base = v[0] + e * a0 - v[s];
            Vec a = a0;
            if (ker.cols() > 0) {
                Mat en = e * ker;
                Eigen::CompleteOrthogonalDecomposition<Mat> cod(en);
                cod.setThreshold(1e-12);
                a = a0 + ker * Vec(cod.solve(Vec(-base)));
            }
            const V centre = v[0] + e * a;
            const double excess = (centre - v[c]).squaredNorm() - (centre - v[s]).squaredNorm();
            if (excess < -tol || excess > smax + tol) continue;
            bool equal = true;
            for (int i = 0; i < n; ++i)
                if (i != c && std::abs((centre - v[i]).squaredNorm() - (centre - v[s]).squaredNorm()) > tol) equal = false;
            if (equal) best = std::min(best, (centre - v[s]).norm());
        }
    }
    return best;
}

// Brute-force search for a hitting set of x among the first n points; the
// witness sigma is left in *found.
bool oracle_hit(const V& x, double r_ref, const PointSet& pts, int n, const Parameters& p, int m,
                std::vector<int>* found = nullptr, double* radius = nullptr) {
    const double rad = 2.0 * p.beta * r_ref / (1.0 - p.delta0 * p.delta0);
    std::vector<int> cand;
    for (int i = 0; i < n; ++i)
        if ((pts[i] - x).norm() < rad) cand.push_back(i);
    std::vector<int> sub;
    std::function<bool(size_t)> rec = [&](size_t start) -> bool {
        if (sub.size() >= 2) {
            std::vector<V> tau{x};
            for (int i : sub) tau.push_back(pts[i]);
            if (oracle_flake(tau, p.gamma0)) {
                const double l = oracle::shortest_edge(tau);
                const double r = oracle_min_weighted_radius(tau, p.delta0 * l);
                if (r < p.beta * r_ref * (1.0 - 1e-9)) {
                    if (found) *found = sub;
                    if (radius) *radius = r;
                    return true;
                }
            }
        }
        if (static_cast<int>(sub.size()) == m + 1) return false;
        for (size_t i = start; i < cand.size(); ++i) {
            sub.push_back(cand[i]);
            std::vector<V> s;
            for (int k : sub) s.push_back(pts[k]);
            if (oracle_good(s, p.gamma0) && rec(i + 1)) return true;
            sub.pop_back();
        }
        return false;
    };
    return rec(0);
}

struct StressPatch {
    std::string name;
    ManifoldPtr M;
    PointSet pts;
};

std::vector<StressPatch> stress_patches() {
    std::vector<StressPatch> out;
    {
        // exact square lattice: every lattice square is cocircular
        StressPatch s{"square lattice", parse_manifold("flat:m=2,N=3,L=1"), PointSet(3)};
        for (int i = -4; i <= 4; ++i)
            for (int j = -4; j <= 4; ++j) s.pts.add(oracle::v3(0.25 * i, 0.25 * j, 0.0));
        out.push_back(std::move(s));
    }
    {
        // square lattice with a 3x3 block removed: Big triangles across the hole
        StressPatch s{"holed lattice", parse_manifold("flat:m=2,N=3,L=1"), PointSet(3)};
        for (int i = -4; i <= 4; ++i)
            for (int j = -4; j <= 4; ++j)
                if (std::abs(i) > 1 || std::abs(j) > 1) s.pts.add(oracle::v3(0.25 * i, 0.25 * j, 0.0));
        out.push_back(std::move(s));
    }
    {
        // lattice jittered far below delta0 * L: near-cocircular quads
        StressPatch s{"jittered lattice", parse_manifold("flat:m=2,N=3,L=1"), PointSet(3)};
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> u(-1e-3, 1e-3);
        for (int i = -4; i <= 4; ++i)
            for (int j = -4; j <= 4; ++j) s.pts.add(oracle::v3(0.25 * i + u(rng), 0.25 * j + u(rng), 0.0));
        out.push_back(std::move(s));
    }
    {
        // aligned latitude rings on the sphere: adjacent trapezoids are coplanar flakes
        StressPatch s{"sphere rings", parse_manifold("sphere:m=2,N=3"), PointSet(3)};
        s.pts.add(oracle::v3(0, 0, 1));
        s.pts.add(oracle::v3(0, 0, -1));
        for (int ring = 1; ring < 12; ++ring) {
            const double t = std::numbers::pi * ring / 12.0;
            const int k = 24;
            for (int i = 0; i < k; ++i) {
                const double a = 2.0 * std::numbers::pi * i / k;
                s.pts.add(oracle::v3(std::sin(t) * std::cos(a), std::sin(t) * std::sin(a), std::cos(t)));
            }
        }
        out.push_back(std::move(s));
    }
    return out;
}

Outcome criterion_rule_priority() {
    const auto t0 = Clock::now();
    long rule2 = 0, priority_violations = 0, pick_violations = 0, events = 0, recorded_mismatch = 0;
    bool ok = true;
    long rule1 = 0;
    for (auto& patch : stress_patches()) {
        // at beta = 4.5 the hitting radius is about 3 lattice spacings and the
        // picking disks are covered; see the decisions ledger
        Parameters p = headline_params();
        p.beta = 2.0;
        long r2_here = 0;
        RefinementState st = init_state(patch.M, patch.pts, p);
        const int m = patch.M->intrinsic_dim();
        try {
            refine(st, [&](const RefinementState& s, const Event& e) {
                ++events;
                RefinementState copy = s;
                int big = 0;
                first_unfit(copy, &big);
                if (big != e.big_count) ++recorded_mismatch;
                if (e.rule != 2) {
                    ++rule1;
                    return;
                }
                ++rule2;
                ++r2_here;
                if (big > 0) ++priority_violations;
                std::vector<int> sigma;
                double r = 0.0;
                if (oracle_hit(e.inserted, e.radius, s.pts, s.pts.size(), s.params, m, &sigma, &r)) {
                    ++pick_violations;
                    auto lib = find_hitting_set(e.inserted, e.radius, s.pts, s.params, m);
                    detail(fmt("%s: pick hit by sigma %s, oracle radius %.6g, limit %.6g, library %s", patch.name.c_str(),
                               simplex_to_string(sigma).c_str(), r, s.params.beta * e.radius,
                               lib ? "finds a hitting set" : "finds none"));
                }
            });
        } catch (const Error& e) {
            ok = false;
            detail(fmt("%s: refinement aborted: %s", patch.name.c_str(), e.what()));
        }
        detail(fmt("%-16s initial %d points, %zu events, %ld rule-2 picks re-audited", patch.name.c_str(),
                   patch.pts.size(), st.log.size(), r2_here));
    }
    detail(fmt("recomputed Big counts disagreeing with the logged count: %ld", recorded_mismatch));
    ok = ok && priority_violations == 0 && pick_violations == 0 && recorded_mismatch == 0 && rule2 > 0 && rule1 > 0;
    return {ok, fmt("rule priority and pick validity (beta 2): %ld events, %ld rule-1, %ld rule-2, %ld fired with Big present, %ld picks "
                    "with a hitting set, %.1f s",
                    events, rule1, rule2, priority_violations, pick_violations, seconds_since(t0))};
}

} // namespace

int main(int argc, char** argv) {
    struct Criterion {
        int id;
        std::function<Outcome()> run;
    };
    std::vector<Criterion> all{
        {1, criterion_lemmas},
        {2, criterion_manifold_bounds},
        {3, criterion_flat_exactness},
        {4, [] { return end_to_end("sphere:m=2,N=3", 2, "sphere"); }},
        {5, [] { return end_to_end("torus:R=2,r=0.5", 0, "torus"); }},
        {6, criterion_constants},
        {7, criterion_rule_priority},
    };
    std::set<int> wanted;
    for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));
    int failed = 0;
    for (const auto& c : all) {
        if (!wanted.empty() && !wanted.count(c.id)) continue;
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::printf("%s criterion %d: %s\n", o.pass ? "PASS" : "FAIL", c.id, o.summary.c_str());
        std::fflush(stdout);
        if (!o.pass) ++failed;
    }
    return failed == 0 ? 0 : 1;
}
