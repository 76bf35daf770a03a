#include "tdc/manifold.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>

#include "tdc/spatial_grid.hpp"

namespace tdc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Orthonormal complement of the columns of t in R^n.
Mat orthogonal_complement(const Mat& t) {
    const Eigen::Index n = t.rows();
    Eigen::HouseholderQR<Mat> qr(t);
    Mat q = qr.householderQ() * Mat::Identity(n, n);
    return q.rightCols(n - t.cols());
}

class UnitSphere final : public Manifold {
public:
    UnitSphere(int m, int n) : m_(m), n_(n) {
        if (m < 1 || n < m + 1) throw Error(ErrorKind::InvalidArgument, "sphere needs 1 <= m and N >= m+1");
    }
    int ambient_dim() const override { return n_; }
    int intrinsic_dim() const override { return m_; }
    double reach() const override { return 1.0; }
    std::string spec() const override {
        return "sphere:m=" + std::to_string(m_) + ",N=" + std::to_string(n_);
    }
    double distance(const Vec& x) const override {
        double a = x.head(m_ + 1).norm();
        double b = x.tail(n_ - m_ - 1).norm();
        return std::hypot(a - 1.0, b);
    }
    double medial_distance(const Vec& x) const override { return x.head(m_ + 1).norm(); }
    Mat tangent_basis(const Vec& p) const override {
        Mat t = Mat::Zero(n_, m_);
        Vec h = p.head(m_ + 1).normalized();
        t.topRows(m_ + 1) = orthogonal_complement(h);
        return t;
    }
    std::vector<Vec> dense_sample(int n, std::uint64_t seed) const override {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> g(0.0, 1.0);
        std::vector<Vec> out;
        out.reserve(static_cast<size_t>(n));
        while (static_cast<int>(out.size()) < n) {
            Vec v = Vec::Zero(n_);
            for (int i = 0; i <= m_; ++i) v[i] = g(rng);
            double r = v.norm();
            if (r < 1e-12) continue;
            out.push_back(v / r);
        }
        return out;
    }

protected:
    Vec foot_point(const Vec& x) const override {
        Vec f = Vec::Zero(n_);
        f.head(m_ + 1) = x.head(m_ + 1).normalized();
        return f;
    }
    bool lift_closed_form(const TangentChart& c, const Vec& y, Vec& out) const override {
        double r2 = y.squaredNorm();
        if (r2 >= 1.0) throw Error(ErrorKind::OutOfChart, "tangent vector leaves the hemisphere chart");
        out = std::sqrt(1.0 - r2) * c.base + c.frame.basis * y;
        return true;
    }

private:
    int m_, n_;
};

class TorusOfRevolution final : public Manifold {
public:
    TorusOfRevolution(double big, double small) : R_(big), r_(small) {
        if (!(small > 0.0 && big > small)) throw Error(ErrorKind::InvalidArgument, "torus needs R > r > 0");
    }
    int ambient_dim() const override { return 3; }
    int intrinsic_dim() const override { return 2; }
    double reach() const override { return std::min(r_, R_ - r_); }
    std::string spec() const override {
        std::ostringstream os;
        os.precision(17);
        os << "torus:R=" << R_ << ",r=" << r_;
        return os.str();
    }
    double core_distance(const Vec& x) const { return std::hypot(std::hypot(x[0], x[1]) - R_, x[2]); }
    double distance(const Vec& x) const override { return std::abs(core_distance(x) - r_); }
    double medial_distance(const Vec& x) const override {
        return std::min(core_distance(x), std::hypot(x[0], x[1]));
    }
    Mat tangent_basis(const Vec& p) const override {
        double phi = std::atan2(p[1], p[0]);
        double rho = std::hypot(p[0], p[1]);
        double th = std::atan2(p[2], rho - R_);
        Mat t(3, 2);
        t.col(0) << -std::sin(phi), std::cos(phi), 0.0;
        t.col(1) << -std::sin(th) * std::cos(phi), -std::sin(th) * std::sin(phi), std::cos(th);
        return t;
    }
    std::vector<Vec> dense_sample(int n, std::uint64_t seed) const override {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        std::vector<Vec> out;
        out.reserve(static_cast<size_t>(n));
        while (static_cast<int>(out.size()) < n) {
            double phi = 2.0 * std::numbers::pi * u(rng);
            double th = 2.0 * std::numbers::pi * u(rng);
            // area element is proportional to R + r cos(theta)
            if (u(rng) * (R_ + r_) > R_ + r_ * std::cos(th)) continue;
            Vec v(3);
            v << (R_ + r_ * std::cos(th)) * std::cos(phi), (R_ + r_ * std::cos(th)) * std::sin(phi), r_ * std::sin(th);
            out.push_back(v);
        }
        return out;
    }

protected:
    Vec foot_point(const Vec& x) const override {
        double rho = std::hypot(x[0], x[1]);
        Vec c(3);
        c << R_ * x[0] / rho, R_ * x[1] / rho, 0.0;
        Vec d = x - c;
        return c + r_ * d / d.norm();
    }
    bool lift_closed_form(const TangentChart& c, const Vec& y, Vec& out) const override {
        // root of the signed tube distance along the normal line through the
        // embedded tangent point, nearest to the tangent plane
        const Vec v = embed_tangent(c, y);
        const Vec nrm = c.normal_frame.basis.col(0);
        auto g = [&](double t) { return core_distance(v + t * nrm) - r_; };
        const double step = r_ / 64.0;
        const double tmax = 2.0 * r_;
        double best = kInf;
        auto refine = [&](double a, double b) {
            double ga = g(a);
            for (int it = 0; it < 200 && std::abs(b - a) > 1e-15 * (1.0 + std::abs(a)); ++it) {
                double mid = 0.5 * (a + b);
                double gm = g(mid);
                if ((gm <= 0.0) == (ga <= 0.0)) {
                    a = mid;
                    ga = gm;
                } else {
                    b = mid;
                }
            }
            return 0.5 * (a + b);
        };
        if (g(0.0) == 0.0) best = 0.0;
        for (int side : {1, -1}) {
            double a = 0.0, ga = g(0.0);
            for (double t = step; t <= tmax + 1e-15; t += step) {
                double b = side * t, gb = g(b);
                if ((ga <= 0.0) != (gb <= 0.0)) {
                    double root = refine(a, b);
                    if (std::abs(root) < std::abs(best)) best = root;
                    break;
                }
                a = b;
                ga = gb;
            }
        }
        if (!std::isfinite(best)) throw Error(ErrorKind::OutOfChart, "normal line misses the torus near the chart");
        out = foot_point(v + best * nrm);
        return true;
    }

private:
    double R_, r_;
};

class CliffordTorus final : public Manifold {
public:
    explicit CliffordTorus(double r) : r_(r) {
        if (!(r > 0.0)) throw Error(ErrorKind::InvalidArgument, "clifford torus needs r > 0");
    }
    int ambient_dim() const override { return 4; }
    int intrinsic_dim() const override { return 2; }
    double reach() const override { return r_; }
    std::string spec() const override {
        std::ostringstream os;
        os.precision(17);
        os << "clifford:r=" << r_;
        return os.str();
    }
    double distance(const Vec& x) const override {
        return std::hypot(std::hypot(x[0], x[1]) - r_, std::hypot(x[2], x[3]) - r_);
    }
    double medial_distance(const Vec& x) const override {
        return std::min(std::hypot(x[0], x[1]), std::hypot(x[2], x[3]));
    }
    Mat tangent_basis(const Vec& p) const override {
        double a = std::atan2(p[1], p[0]), b = std::atan2(p[3], p[2]);
        Mat t = Mat::Zero(4, 2);
        t(0, 0) = -std::sin(a);
        t(1, 0) = std::cos(a);
        t(2, 1) = -std::sin(b);
        t(3, 1) = std::cos(b);
        return t;
    }
    std::vector<Vec> dense_sample(int n, std::uint64_t seed) const override {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> u(0.0, 2.0 * std::numbers::pi);
        std::vector<Vec> out;
        out.reserve(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i) {
            double a = u(rng), b = u(rng);
            Vec v(4);
            v << r_ * std::cos(a), r_ * std::sin(a), r_ * std::cos(b), r_ * std::sin(b);
            out.push_back(v);
        }
        return out;
    }

protected:
    Vec foot_point(const Vec& x) const override {
        Vec f(4);
        double na = std::hypot(x[0], x[1]), nb = std::hypot(x[2], x[3]);
        f << r_ * x[0] / na, r_ * x[1] / na, r_ * x[2] / nb, r_ * x[3] / nb;
        return f;
    }
    bool lift_closed_form(const TangentChart& c, const Vec& y, Vec& out) const override {
        if (std::abs(y[0]) >= r_ || std::abs(y[1]) >= r_)
            throw Error(ErrorKind::OutOfChart, "tangent coordinate exceeds circle radius");
        double a0 = std::atan2(c.base[1], c.base[0]), b0 = std::atan2(c.base[3], c.base[2]);
        double a = a0 + std::asin(y[0] / r_), b = b0 + std::asin(y[1] / r_);
        out.resize(4);
        out << r_ * std::cos(a), r_ * std::sin(a), r_ * std::cos(b), r_ * std::sin(b);
        return true;
    }

private:
    double r_;
};

class FlatPatch final : public Manifold {
public:
    FlatPatch(int m, int n, double half) : m_(m), n_(n), half_(half) {
        if (m < 1 || n <= m) throw Error(ErrorKind::InvalidArgument, "flat patch needs 1 <= m < N");
        if (!(half > 0.0)) throw Error(ErrorKind::InvalidArgument, "flat patch needs L > 0");
    }
    int ambient_dim() const override { return n_; }
    int intrinsic_dim() const override { return m_; }
    double reach() const override { return kInf; }
    std::string spec() const override {
        std::ostringstream os;
        os.precision(17);
        os << "flat:m=" << m_ << ",N=" << n_ << ",L=" << half_;
        return os.str();
    }
    double distance(const Vec& x) const override { return x.tail(n_ - m_).norm(); }
    double medial_distance(const Vec&) const override { return kInf; }
    Mat tangent_basis(const Vec&) const override { return Mat::Identity(n_, m_); }
    bool in_domain(const Vec& x) const override { return x.head(m_).cwiseAbs().maxCoeff() <= half_; }
    std::vector<Vec> dense_sample(int n, std::uint64_t seed) const override {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> u(-half_, half_);
        std::vector<Vec> out;
        out.reserve(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i) {
            Vec v = Vec::Zero(n_);
            for (int k = 0; k < m_; ++k) v[k] = u(rng);
            out.push_back(v);
        }
        return out;
    }

protected:
    Vec foot_point(const Vec& x) const override {
        Vec f = x;
        f.tail(n_ - m_).setZero();
        return f;
    }
    bool lift_closed_form(const TangentChart& c, const Vec& y, Vec& out) const override {
        out = embed_tangent(c, y);
        return true;
    }

private:
    int m_, n_;
    double half_;
};

std::map<std::string, double> parse_kv(const std::string& body) {
    std::map<std::string, double> kv;
    std::stringstream ss(body);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        auto eq = item.find('=');
        if (eq == std::string::npos) throw Error(ErrorKind::ParseError, "expected key=value in '" + item + "'");
        std::string k = item.substr(0, eq), v = item.substr(eq + 1);
        try {
            size_t used = 0;
            double d = std::stod(v, &used);
            if (used != v.size()) throw std::invalid_argument(v);
            kv[k] = d;
        } catch (const std::exception&) {
            throw Error(ErrorKind::ParseError, "bad number '" + v + "'");
        }
    }
    return kv;
}

double need(const std::map<std::string, double>& kv, const std::string& k, double def, bool has_def) {
    auto it = kv.find(k);
    if (it != kv.end()) return it->second;
    if (!has_def) throw Error(ErrorKind::ParseError, "missing key '" + k + "'");
    return def;
}

int as_int(double d, const std::string& k) {
    if (d != std::floor(d)) throw Error(ErrorKind::ParseError, k + " must be an integer");
    return static_cast<int>(d);
}

} // namespace

Vec Manifold::closest_point(const Vec& x) const {
    if (x.size() != ambient_dim()) throw Error(ErrorKind::DimensionMismatch, "point dimension");
    double d = distance(x);
    if (d >= reach() * (1.0 - 1e-6) || medial_distance(x) <= 1e-12)
        throw Error(ErrorKind::MedialAxisProximity, "point too close to the medial axis");
    return foot_point(x);
}

TangentChart Manifold::tangent_chart(const Vec& p) const {
    if (p.size() != ambient_dim()) throw Error(ErrorKind::DimensionMismatch, "point dimension");
    if (!on_manifold(p, 1e-8)) throw Error(ErrorKind::PointNotOnManifold, "distance " + std::to_string(distance(p)));
    TangentChart c;
    c.base = p;
    c.frame.origin = p;
    c.frame.basis = tangent_basis(p);
    c.normal_frame.origin = p;
    c.normal_frame.basis = orthogonal_complement(c.frame.basis);
    return c;
}

bool Manifold::lift_closed_form(const TangentChart&, const Vec&, Vec&) const { return false; }

Vec Manifold::lift_generic(const TangentChart& c, const Vec& y) const {
    Vec x = closest_point(embed_tangent(c, y));
    const double scale = std::max(1.0, y.norm());
    double damping = 1.0;
    double res = (project_to_tangent(c, x) - y).norm();
    for (int it = 0; it < 100; ++it) {
        if (res < 1e-12 * scale) return x;
        Vec step = c.frame.basis * (y - project_to_tangent(c, x));
        Vec cand = closest_point(x + damping * step);
        double r2 = (project_to_tangent(c, cand) - y).norm();
        if (r2 < res) {
            x = cand;
            res = r2;
            damping = std::min(1.0, damping * 2.0);
        } else {
            damping *= 0.5;
            if (damping < 1e-6) break;
        }
    }
    if (res < 1e-10 * scale) return x;
    throw Error(ErrorKind::NoConvergence, "generic lift residual " + std::to_string(res));
}

Vec Manifold::lift_from_tangent(const TangentChart& c, const Vec& y, double chart_radius) const {
    if (y.size() != intrinsic_dim()) throw Error(ErrorKind::DimensionMismatch, "tangent coordinates");
    const double lim = chart_radius > 0.0 ? chart_radius : reach() / 2.0;
    if (y.norm() >= lim) throw Error(ErrorKind::OutOfChart, "|y| = " + std::to_string(y.norm()));
    Vec out;
    if (lift_closed_form(c, y, out)) return out;
    return lift_generic(c, y);
}

Vec project_to_tangent(const TangentChart& c, const Vec& x) { return c.frame.basis.transpose() * (x - c.base); }

Vec embed_tangent(const TangentChart& c, const Vec& y) { return c.base + c.frame.basis * y; }

ManifoldPtr parse_manifold(const std::string& spec) {
    auto colon = spec.find(':');
    std::string kind = spec.substr(0, colon);
    std::string body = colon == std::string::npos ? "" : spec.substr(colon + 1);
    auto kv = parse_kv(body);
    auto check_keys = [&](std::initializer_list<const char*> allowed) {
        for (const auto& [k, v] : kv) {
            bool ok = false;
            for (const char* a : allowed) ok = ok || k == a;
            if (!ok) throw Error(ErrorKind::ParseError, "unknown key '" + k + "' for " + kind);
        }
    };
    if (kind == "sphere") {
        check_keys({"m", "N"});
        int m = as_int(need(kv, "m", 2, true), "m");
        int n = as_int(need(kv, "N", m + 1, true), "N");
        return std::make_shared<UnitSphere>(m, n);
    }
    if (kind == "torus") {
        check_keys({"R", "r"});
        return std::make_shared<TorusOfRevolution>(need(kv, "R", 0, false), need(kv, "r", 0, false));
    }
    if (kind == "clifford") {
        check_keys({"r"});
        return std::make_shared<CliffordTorus>(need(kv, "r", 1.0 / std::sqrt(2.0), true));
    }
    if (kind == "flat") {
        check_keys({"m", "N", "L"});
        int m = as_int(need(kv, "m", 2, true), "m");
        int n = as_int(need(kv, "N", m + 1, true), "N");
        return std::make_shared<FlatPatch>(m, n, need(kv, "L", 1.0, true));
    }
    throw Error(ErrorKind::ParseError, "unknown manifold kind '" + kind + "'");
}

SampleSet farthest_point_net(const std::vector<Vec>& dense, double eps, int start) {
    if (dense.empty()) throw Error(ErrorKind::EmptyInput, "dense sample is empty");
    if (!(eps > 0.0)) throw Error(ErrorKind::InvalidArgument, "epsilon must be positive");
    const size_t n = dense.size();
    if (start < 0 || static_cast<size_t>(start) >= n) throw Error(ErrorKind::InvalidArgument, "start index");
    std::vector<double> dist(n, kInf);
    SampleSet out;
    out.epsilon = eps;
    out.points = PointSet(static_cast<int>(dense[0].size()));
    size_t cur = static_cast<size_t>(start);
    for (;;) {
        out.points.add(dense[cur]);
        size_t far = 0;
        double fd = -1.0;
        for (size_t i = 0; i < n; ++i) {
            dist[i] = std::min(dist[i], (dense[i] - dense[cur]).norm());
            if (dist[i] > fd) {
                fd = dist[i];
                far = i;
            }
        }
        if (fd <= eps) break;
        cur = far;
    }
    out.sparsity = out.points.size() > 1 ? out.points.min_pairwise_distance() : kInf;
    return out;
}

double estimate_covering_radius(const std::vector<Vec>& dense, const std::vector<Vec>& probes) {
    if (dense.empty()) throw Error(ErrorKind::EmptyInput, "dense sample is empty");
    // cell size from the bounding box and point count
    const int dim = static_cast<int>(dense[0].size());
    Vec lo = dense[0], hi = dense[0];
    for (const auto& p : dense) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    double ext = (hi - lo).maxCoeff();
    double cell = std::max(ext / std::max(1.0, std::sqrt(static_cast<double>(dense.size()))), 1e-9);
    SpatialGrid grid(cell, dim);
    for (size_t i = 0; i < dense.size(); ++i) grid.insert(static_cast<int>(i), dense[i]);
    double worst = 0.0;
    for (const auto& q : probes) worst = std::max(worst, grid.nearest(q).second);
    return worst;
}

} // namespace tdc
