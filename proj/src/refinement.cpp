#include "tdc/refinement.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace tdc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

double parse_double(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw Error(ErrorKind::ParseError, "bad number for " + key + ": '" + v + "'");
    }
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        unsigned long long d = std::stoull(v, &pos);
        if (pos != v.size() || v.front() == '-') throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw Error(ErrorKind::ParseError, "bad integer for " + key + ": '" + v + "'");
    }
}

} // namespace

const char* mode_name(Mode m) { return m == Mode::Strict ? "strict" : "practical"; }

const char* config_kind_name(ConfigKind k) {
    switch (k) {
    case ConfigKind::Big: return "Big";
    case ConfigKind::BadStar: return "BadStar";
    case ConfigKind::BadCosph: return "BadCosph";
    }
    return "?";
}

Parameters parse_parameters(const std::string& text, Parameters p) {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw Error(ErrorKind::ParseError, "line " + std::to_string(lineno) + ": expected key=value");
        std::string k = trim(line.substr(0, eq)), v = trim(line.substr(eq + 1));
        if (v.empty()) throw Error(ErrorKind::ParseError, "line " + std::to_string(lineno) + ": empty value");
        if (k == "epsilon") p.epsilon = parse_double(k, v);
        else if (k == "gamma0") p.gamma0 = parse_double(k, v);
        else if (k == "alpha") p.alpha = parse_double(k, v);
        else if (k == "beta") p.beta = parse_double(k, v);
        else if (k == "delta0") p.delta0 = parse_double(k, v);
        else if (k == "seed") p.seed = parse_u64(k, v);
        else if (k == "pick_attempt_budget") p.pick_attempt_budget = static_cast<int>(parse_u64(k, v));
        else if (k == "iteration_cap") p.iteration_cap = static_cast<long>(parse_u64(k, v));
        else if (k == "update_radius_mult") p.update_radius_mult = parse_double(k, v);
        else if (k == "refine_all_cosph") {
            if (v == "true" || v == "1") p.refine_all_cosph = true;
            else if (v == "false" || v == "0") p.refine_all_cosph = false;
            else throw Error(ErrorKind::ParseError, "refine_all_cosph must be true or false");
        }
        else if (k == "xi") p.xi = parse_double(k, v);
        else if (k == "A" || k == "a_vol") p.a_vol = parse_double(k, v);
        else if (k == "mode") {
            std::string s = v;
            std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
            if (s == "strict") p.mode = Mode::Strict;
            else if (s == "practical") p.mode = Mode::Practical;
            else throw Error(ErrorKind::ParseError, "mode must be strict or practical, got '" + v + "'");
        } else throw Error(ErrorKind::ParseError, "unknown parameter '" + k + "'");
    }
    return p;
}

Parameters load_parameters(const std::string& path, Parameters base) {
    std::ifstream f(path);
    if (!f) throw Error(ErrorKind::ParseError, "cannot read " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_parameters(ss.str(), base);
}

void validate_parameters(const Parameters& p) {
    auto open01 = [](const char* name, double v) {
        if (!(v > 0.0 && v < 1.0)) throw Error(ErrorKind::InvalidArgument, std::string(name) + " must lie in (0,1)");
    };
    if (!(p.epsilon > 0.0) || !std::isfinite(p.epsilon)) throw Error(ErrorKind::InvalidArgument, "epsilon must be positive");
    open01("gamma0", p.gamma0);
    open01("alpha", p.alpha);
    if (!(p.beta > 1.0) || !std::isfinite(p.beta)) throw Error(ErrorKind::InvalidArgument, "beta must exceed 1");
    if (!(p.delta0 >= 0.0 && p.delta0 < 0.25)) throw Error(ErrorKind::InvalidArgument, "delta0 must lie in [0,1/4)");
    if (p.pick_attempt_budget < 1) throw Error(ErrorKind::InvalidArgument, "pick_attempt_budget must be >= 1");
    if (p.iteration_cap < 0) throw Error(ErrorKind::InvalidArgument, "iteration_cap must be >= 0");
    if (p.update_radius_mult < 0.0) throw Error(ErrorKind::InvalidArgument, "update_radius_mult must be >= 0");
}

DerivedConstants derive_constants(const Parameters& p, const Manifold& M) {
    DerivedConstants c;
    const int m = M.intrinsic_dim();
    const double rch = M.reach();
    c.mu0 = 1.0 / 9.0;
    c.eps_tilde0 = 1.0 / (16.0 * 17.0 * 17.0);
    c.beta_prime = p.beta / (1.0 - 16.0 * c.eps_tilde0);
    const double q = 1.0 + 1152.0 * p.beta * p.beta;
    c.b_hyp = 4.0 + 2.0 * q * q;
    c.b_lemma = 4.0 + 96.0 * p.beta * q;
    c.b = std::max(c.b_hyp, c.b_lemma);
    c.xi_heuristic = !p.xi.has_value();
    c.a_heuristic = !p.a_vol.has_value();
    c.xi = p.xi ? *p.xi : (std::isfinite(rch) ? rch / 16.0 : 1.0 / 16.0);
    c.a_vol = p.a_vol ? *p.a_vol : std::pow(2.0, m);
    const double ax = c.a_vol * c.xi;
    c.e = ax < 1.0 ? 2.0 * ((1.0 + ax) / (1.0 - ax)) *
                         std::pow(18.0 * (p.alpha + 2.0 * c.beta_prime + 6.5 * c.eps_tilde0) + 1.0, m)
                   : kInf;
    c.nu_m = unit_ball_volume(m);
    c.d_vol = c.nu_m * ((c.b + 1.0) * std::pow(2.0, m) + c.a_vol * (std::pow(2.0, m + 1) + 1.0));
    c.eps_tilde = std::isfinite(rch) ? p.epsilon / rch : 0.0;
    c.h1_threshold = 2.0 / ((1.0 - p.delta0 * p.delta0) * (1.0 - p.alpha - 4.5 * c.eps_tilde0));
    return c;
}

const HypothesisResult& HypothesisReport::get(const std::string& name) const {
    for (const auto& h : items)
        if (h.name == name) return h;
    throw Error(ErrorKind::InvalidArgument, "no hypothesis named " + name);
}

HypothesisReport check_hypotheses(const Parameters& p, const Manifold& M) {
    HypothesisReport r;
    r.mode = p.mode;
    r.constants = derive_constants(p, M);
    const auto& c = r.constants;
    const int m = M.intrinsic_dim();
    const double rch = M.reach();
    const bool strict = p.mode == Mode::Strict;
    auto add = [&](const std::string& name, double value, const std::string& rel, double thr, bool required) {
        HypothesisResult h;
        h.name = name;
        h.value = value;
        h.threshold = thr;
        h.relation = rel;
        h.required = required;
        if (rel == "<") h.pass = value < thr;
        else if (rel == "<=") h.pass = value <= thr;
        else h.pass = value >= thr;
        r.items.push_back(h);
    };
    add("H0", p.alpha, "<", 0.5, true);
    add("H1", p.beta, ">=", c.h1_threshold, true);
    const double h2a = c.nu_m * std::pow(p.alpha, m) / (std::pow(c.e, m + 1) * std::pow(p.beta, m) * c.d_vol);
    add("H2", p.gamma0, "<", std::min(h2a, 1.0 / (c.b + 1.0)), strict);
    add("H3", p.delta0 * p.delta0, "<=", std::pow(p.gamma0, m + 1), strict);
    const double h4a = std::isfinite(rch) ? c.xi / (2.0 * (p.beta + c.beta_prime) * rch) : kInf;
    add("H4", c.eps_tilde, "<=", std::min(h4a, std::pow(p.gamma0, m + 1) / (8.0 * p.beta)), strict);
    add("H5", c.eps_tilde, "<=", p.delta0 * p.delta0 * std::pow(p.gamma0, 2 * m) / 1.1e9, strict);
    add("delta0", p.delta0, "<", 0.25, true);
    r.ok = true;
    for (const auto& h : r.items)
        if (h.required && !h.pass) r.ok = false;
    return r;
}

std::string format_event(const Event& e) {
    std::ostringstream os;
    os << "RULE" << e.rule << " base=" << e.base << " simplex=" << simplex_to_string(e.simplex) << " inserted=";
    char buf[64];
    for (Eigen::Index i = 0; i < e.inserted.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", e.inserted[i]);
        if (i) os << ',';
        os << buf;
    }
    std::snprintf(buf, sizeof buf, "%.17g", e.dist_to_p);
    os << " dist_to_P=" << buf;
    return os.str();
}

GammaClass RefinementState::gamma(const Simplex& s) {
    auto it = gamma_cache.find(s);
    if (it != gamma_cache.end()) return it->second;
    GammaClass g = classify_gamma(gather(s, pts), params.gamma0);
    gamma_cache.emplace(s, g);
    return g;
}

double RefinementState::chart_radius() const {
    return params.mode == Mode::Strict ? 0.0 : kInf;
}

RefinementState init_state(ManifoldPtr M, const PointSet& initial, const Parameters& p) {
    if (!M) throw Error(ErrorKind::InvalidArgument, "no manifold");
    validate_parameters(p);
    if (initial.size() == 0) throw Error(ErrorKind::EmptyInput, "initial sample is empty");
    if (initial.dim != M->ambient_dim()) throw Error(ErrorKind::DimensionMismatch, "sample dimension differs from ambient");
    RefinementState st;
    st.manifold = M;
    st.params = p;
    st.pts = initial;
    for (int i = 0; i < initial.size(); ++i)
        if (!M->on_manifold(initial[i], 1e-8))
            throw Error(ErrorKind::PointNotOnManifold, "initial point " + std::to_string(i));
    if (initial.size() > 1) {
        double sp = initial.min_pairwise_distance();
        if (!(sp > p.epsilon / 9.0))
            throw Error(ErrorKind::SparsityViolation, "initial sparsity " + std::to_string(sp) + " <= epsilon/9");
    }
    const auto cp = st.cosph_params();
    for (int i = 0; i < initial.size(); ++i) st.charts.push_back(M->tangent_chart(initial[i]));
    for (int i = 0; i < initial.size(); ++i) {
        st.stars.push_back(compute_star(i, st.pts, *M, st.charts[static_cast<size_t>(i)]));
        st.cosph.push_back(cosph_star(st.stars.back(), st.pts, cp));
    }
    return st;
}

std::vector<UnfitConfiguration> classify_configurations(RefinementState& st) {
    std::vector<UnfitConfiguration> big, bad_star, bad_cosph;
    const Manifold& M = *st.manifold;
    for (const auto& star : st.stars) {
        std::vector<std::pair<Simplex, const TangentCenter*>> ms;
        for (const auto& [s, tc] : star.msimplices) ms.emplace_back(s, &tc);
        for (const auto& [s, tc] : star.singular_msimplices) ms.emplace_back(s, &tc);
        std::sort(ms.begin(), ms.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
        for (const auto& [s, tc] : ms) {
            if (!M.in_domain(tc->center)) continue;
            UnfitConfiguration u;
            u.simplex = s;
            u.facet = s;
            u.base = star.base;
            u.center = *tc;
            if (tc->radius >= st.params.epsilon) {
                u.kind = ConfigKind::Big;
                big.push_back(std::move(u));
            } else if (st.gamma(s) != GammaClass::Good) {
                u.kind = ConfigKind::BadStar;
                bad_star.push_back(std::move(u));
            }
        }
        const auto& cs = st.cosph[static_cast<size_t>(star.base)];
        std::vector<const CosphEntry*> es;
        for (const auto& e : cs.entries) es.push_back(&e);
        std::stable_sort(es.begin(), es.end(), [](const auto* a, const auto* b) { return a->simplex < b->simplex; });
        const Simplex* last = nullptr;
        for (const auto* e : es) {
            if (last && *last == e->simplex) continue;
            last = &e->simplex;
            auto it = star.msimplices.find(e->facet);
            if (it == star.msimplices.end() || !M.in_domain(it->second.center)) continue;
            if (!st.params.refine_all_cosph && st.gamma(e->simplex) == GammaClass::Good) continue;
            UnfitConfiguration u;
            u.kind = ConfigKind::BadCosph;
            u.simplex = e->simplex;
            u.facet = e->facet;
            u.base = star.base;
            u.center = it->second;
            bad_cosph.push_back(std::move(u));
        }
    }
    std::vector<UnfitConfiguration> out = std::move(big);
    out.insert(out.end(), bad_star.begin(), bad_star.end());
    out.insert(out.end(), bad_cosph.begin(), bad_cosph.end());
    return out;
}

std::optional<UnfitConfiguration> first_unfit(RefinementState& st, int* big_count) {
    auto all = classify_configurations(st);
    if (big_count)
        *big_count = static_cast<int>(std::count_if(all.begin(), all.end(),
                                                    [](const auto& u) { return u.kind == ConfigKind::Big; }));
    if (all.empty()) return std::nullopt;
    return all.front();
}

double PickingRegion::volume() const { return unit_ball_volume(m) * std::pow(radius, m); }

PickingRegion picking_region(const UnfitConfiguration& c, double alpha, int m) {
    PickingRegion r;
    r.center = c.center.center;
    r.center_tangent = c.center.tangent;
    r.radius = alpha * c.center.radius;
    r.m = m;
    return r;
}

namespace {

using SmallMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 8, 8>;

// Thickness from Gram determinants: the altitude of vertex i is sqrt(det G / det G_i).
double gram_thickness(const std::vector<const Vec*>& v) {
    const int k = static_cast<int>(v.size()) - 1;
    if (k == 0) return 1.0;
    auto gram_det = [&](int skip) {
        int base = skip == 0 ? 1 : 0;
        std::vector<const Vec*> e;
        for (int i = 0; i <= k; ++i)
            if (i != skip && i != base) e.push_back(v[static_cast<size_t>(i)]);
        const Vec& o = *v[static_cast<size_t>(base)];
        const int n = static_cast<int>(e.size());
        if (n == 0) return 1.0;
        SmallMat g(n, n);
        for (int a = 0; a < n; ++a)
            for (int b = a; b < n; ++b) g(a, b) = g(b, a) = (*e[static_cast<size_t>(a)] - o).dot(*e[static_cast<size_t>(b)] - o);
        return g.determinant();
    };
    double delta = 0.0;
    for (int i = 0; i <= k; ++i)
        for (int j = i + 1; j <= k; ++j) delta = std::max(delta, (*v[static_cast<size_t>(i)] - *v[static_cast<size_t>(j)]).norm());
    if (delta <= 0.0) return 0.0;
    std::vector<const Vec*> e(v.begin() + 1, v.end());
    SmallMat g(k, k);
    for (int a = 0; a < k; ++a)
        for (int b = a; b < k; ++b) g(a, b) = g(b, a) = (*e[static_cast<size_t>(a)] - *v[0]).dot(*e[static_cast<size_t>(b)] - *v[0]);
    const double full = std::max(0.0, g.determinant());
    double alt = kInf;
    for (int i = 0; i <= k; ++i) {
        double f = gram_det(i);
        alt = std::min(alt, f > 0.0 ? std::sqrt(full / f) : 0.0);
    }
    return alt / (k * delta);
}

// Lower bound for R(tau, omega) over elementary weights with omega^2 <= w2max.
// With carrier c and S = tau \ c, the centre is C_S + t u for u normal to aff(S)
// inside aff(tau), and omega^2 = pi0 - 2 t h is linear in t. The weight
// interval is widened by tol, so the bound never exceeds the true minimum.
double weighted_radius_lower_bound(const std::vector<const Vec*>& v, double w2max, double tol) {
    const int n = static_cast<int>(v.size());
    double best = kInf;
    for (int c = 0; c < n; ++c) {
        std::vector<const Vec*> sv;
        for (int i = 0; i < n; ++i)
            if (i != c) sv.push_back(v[static_cast<size_t>(i)]);
        const Vec& o = *sv[0];
        const int k = static_cast<int>(sv.size()) - 1;
        Vec cs = o;
        Vec co = *v[static_cast<size_t>(c)] - o;
        double h2 = co.squaredNorm();
        if (k > 0) {
            SmallMat e(o.size(), k);
            for (int i = 0; i < k; ++i) e.col(i) = *sv[static_cast<size_t>(i + 1)] - o;
            SmallMat g = e.transpose() * e;
            Eigen::FullPivLU<SmallMat> lu(g);
            if (!lu.isInvertible()) return 0.0;
            Vec rhs(k);
            for (int i = 0; i < k; ++i) rhs[i] = 0.5 * g(i, i);
            cs = o + e * lu.solve(rhs);
            Vec b = lu.solve(Vec(e.transpose() * co));
            h2 = std::max(0.0, h2 - co.dot(e * b));
        }
        const double rs2 = (cs - o).squaredNorm();
        const double pi0 = (cs - *v[static_cast<size_t>(c)]).squaredNorm() - rs2;
        const double gap = std::max({0.0, -tol - pi0, pi0 - w2max - tol});
        double r2 = rs2;
        if (gap > 0.0) {
            if (h2 <= 0.0) continue;
            const double t = gap / (2.0 * std::sqrt(h2));
            r2 += t * t;
        }
        best = std::min(best, std::sqrt(r2));
    }
    return best;
}

} // namespace

std::optional<HittingSet> find_hitting_set(const Vec& x, double r_ref, const PointSet& pts, const Parameters& p, int m,
                                           int count) {
    const int n = count < 0 ? pts.size() : std::min(count, pts.size());
    const double rad = 2.0 * p.beta * r_ref / (1.0 - p.delta0 * p.delta0);
    const double slack = 1e-9 * std::max(1.0, rad);
    const double limit = p.beta * r_ref;
    std::vector<int> cand;
    // any two vertices of a hitting tau are within this distance
    const double pair_limit = limit * (1.0 + std::sqrt(1.0 + 4.0 * p.delta0 * p.delta0)) + slack;
    for (int i = 0; i < n; ++i)
        if ((pts[i] - x).norm() < std::min(rad, pair_limit) + slack) cand.push_back(i);
    const int c = static_cast<int>(cand.size());
    if (c < 2) return std::nullopt;

    // A tau of dimension 1 is always good, so tau = x * sigma needs |sigma| >= 2.
    std::vector<int> sub;
    std::optional<HittingSet> hit;
    std::vector<const Vec*> verts;
    auto test = [&]() {
        const int k = static_cast<int>(sub.size());
        verts.assign(1, &x);
        for (int i : sub) verts.push_back(&pts[cand[static_cast<size_t>(i)]]);
        if (gram_thickness(verts) >= std::pow(p.gamma0, k) * (1.0 + 1e-6)) return false;
        double lmin = kInf, dmax = 0.0;
        for (size_t a = 0; a < verts.size(); ++a)
            for (size_t b = a + 1; b < verts.size(); ++b) {
                const double d = (*verts[a] - *verts[b]).norm();
                lmin = std::min(lmin, d);
                dmax = std::max(dmax, d);
            }
        const double wmax = p.delta0 * lmin;
        if (weighted_radius_lower_bound(verts, wmax * wmax, 1e-9 * dmax * dmax) >= limit * (1.0 + 1e-9)) return false;
        Coords cs;
        cs.reserve(verts.size());
        for (const Vec* v : verts) cs.push_back(*v);
        if (classify_gamma(cs, p.gamma0) != GammaClass::Flake) return false;
        const double l = edge_extremes(cs).first;
        WeightedRadiusMin w = min_weighted_radius(cs, p.delta0 * l);
        if (!w.feasible || !(w.radius < limit)) return false;
        HittingSet h;
        for (int i : sub) h.sigma.push_back(cand[static_cast<size_t>(i)]);
        std::sort(h.sigma.begin(), h.sigma.end());
        h.omega = w.omega;
        // local carrier 0 is x, local i >= 1 is sub[i - 1]
        h.omega.carrier = w.omega.carrier == 0 ? -1 : cand[static_cast<size_t>(sub[static_cast<size_t>(w.omega.carrier - 1)])];
        h.radius = w.radius;
        h.tau_class = GammaClass::Flake;
        hit = std::move(h);
        return true;
    };
    // sigma is a proper face of a flake, so it and all its faces must be good
    std::function<bool(int)> extend = [&](int start) -> bool {
        const int k = static_cast<int>(sub.size());
        if (k >= 2 && test()) return true;
        if (k == m + 1) return false;
        for (int i = start; i < c; ++i) {
            const Vec& y = pts[cand[static_cast<size_t>(i)]];
            bool near = true;
            for (int j : sub) near = near && (pts[cand[static_cast<size_t>(j)]] - y).norm() < pair_limit;
            if (!near) continue;
            sub.push_back(i);
            verts.clear();
            for (int j : sub) verts.push_back(&pts[cand[static_cast<size_t>(j)]]);
            const int kk = static_cast<int>(verts.size()) - 1;
            bool prune = kk >= 2 && gram_thickness(verts) < std::pow(p.gamma0, kk) * (1.0 - 1e-6);
            if (!prune && extend(i + 1)) return true;
            sub.pop_back();
        }
        return false;
    };
    extend(0);
    return hit;
}

PickResult pick_valid(const UnfitConfiguration& c, RefinementState& st) {
    const int m = st.m();
    const auto& chart = st.charts[static_cast<size_t>(c.base)];
    PickingRegion reg = picking_region(c, st.params.alpha, m);
    std::seed_seq seq{static_cast<std::uint32_t>(st.params.seed), static_cast<std::uint32_t>(st.params.seed >> 32),
                      static_cast<std::uint32_t>(st.pick_calls), static_cast<std::uint32_t>(st.pick_calls >> 32)};
    ++st.pick_calls;
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int attempt = 1; attempt <= st.params.pick_attempt_budget; ++attempt) {
        Vec g(m);
        for (int i = 0; i < m; ++i) g[i] = gauss(rng);
        double gn = g.norm();
        double u = unif(rng);
        if (gn == 0.0) continue;
        Vec y = reg.center_tangent + g * (reg.radius * std::pow(u, 1.0 / m) / gn);
        Vec x;
        try {
            x = st.manifold->lift_from_tangent(chart, y, st.chart_radius());
        } catch (const Error& e) {
            if (e.kind() == ErrorKind::OutOfChart || e.kind() == ErrorKind::NoConvergence ||
                e.kind() == ErrorKind::MedialAxisProximity)
                continue;
            throw;
        }
        if (find_hitting_set(x, c.radius(), st.pts, st.params, m)) continue;
        return {x, y, attempt};
    }
    throw Error(ErrorKind::AttemptBudgetExhausted,
                std::to_string(st.params.pick_attempt_budget) + " picks rejected for " + config_kind_name(c.kind) +
                    " simplex " + simplex_to_string(c.simplex) + " at base " + std::to_string(c.base) +
                    " (R_p=" + std::to_string(c.radius()) + ")");
}

void insert(const Vec& x, RefinementState& st) {
    const Manifold& M = *st.manifold;
    double d = kInf;
    for (int i = 0; i < st.pts.size(); ++i) d = std::min(d, (st.pts[i] - x).norm());
    if (!(d > st.params.epsilon / 9.0))
        throw Error(ErrorKind::SparsityViolation,
                    "new point at distance " + std::to_string(d) + " <= epsilon/9 = " + std::to_string(st.params.epsilon / 9.0));
    const int n0 = st.pts.size();
    const int xi = st.pts.add(x);
    st.charts.push_back(M.tangent_chart(x));
    const auto cp = st.cosph_params();
    const double near = st.params.update_radius_mult * st.params.epsilon;
    std::vector<char> redo(static_cast<size_t>(n0), 0);
    for (int q = 0; q < n0; ++q) {
        const auto& ch = st.charts[static_cast<size_t>(q)];
        redo[static_cast<size_t>(q)] =
            star_affected_by(st.stars[static_cast<size_t>(q)], ch, st.pts[q], x) || (near > 0.0 && (st.pts[q] - x).norm() <= near);
    }
    for (int q = 0; q < n0; ++q) {
        auto& star = st.stars[static_cast<size_t>(q)];
        auto& cs = st.cosph[static_cast<size_t>(q)];
        if (redo[static_cast<size_t>(q)]) {
            star = compute_star(q, st.pts, M, st.charts[static_cast<size_t>(q)]);
            cs = cosph_star(star, st.pts, cp);
        } else {
            auto extra = cosph_entries_for_apex(star, st.pts, xi, cp);
            cs.entries.insert(cs.entries.end(), extra.begin(), extra.end());
        }
    }
    st.stars.push_back(compute_star(xi, st.pts, M, st.charts.back()));
    st.cosph.push_back(cosph_star(st.stars.back(), st.pts, cp));
}

RefineSummary refine(RefinementState& st, const std::function<void(const RefinementState&, const Event&)>& before_insert) {
    RefineSummary sum;
    const auto t0 = std::chrono::steady_clock::now();
    for (;;) {
        int big = 0;
        auto cfg = first_unfit(st, &big);
        if (!cfg) break;
        if (sum.insertions >= st.params.iteration_cap)
            throw Error(ErrorKind::IterationCap, std::to_string(st.params.iteration_cap) + " insertions without termination");
        Event e;
        e.kind = cfg->kind;
        e.base = cfg->base;
        e.simplex = cfg->simplex;
        e.radius = cfg->radius();
        e.n_before = st.pts.size();
        e.big_count = big;
        if (cfg->kind == ConfigKind::Big) {
            e.rule = 1;
            e.inserted = st.manifold->lift_from_tangent(st.charts[static_cast<size_t>(cfg->base)], cfg->center.tangent,
                                                        st.chart_radius());
        } else {
            e.rule = 2;
            PickResult pr = pick_valid(*cfg, st);
            e.inserted = pr.point;
            e.attempts = pr.attempts;
        }
        e.dist_center = (e.inserted - cfg->center.center).norm();
        double d = kInf;
        for (int i = 0; i < st.pts.size(); ++i) d = std::min(d, (st.pts[i] - e.inserted).norm());
        e.dist_to_p = d;
        if (before_insert) before_insert(st, e);
        insert(e.inserted, st);
        st.log.push_back(e);
        ++sum.insertions;
        (e.rule == 1 ? sum.rule1 : sum.rule2) += 1;
    }
    sum.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return sum;
}

} // namespace tdc
