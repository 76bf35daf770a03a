#include "tdc/geometry.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace tdc {

Simplex make_simplex(std::vector<int> v) {
    std::sort(v.begin(), v.end());
    if (std::adjacent_find(v.begin(), v.end()) != v.end())
        throw Error(ErrorKind::InvalidArgument, "simplex has repeated vertex");
    return v;
}

int simplex_dim(const Simplex& s) { return static_cast<int>(s.size()) - 1; }

std::string simplex_to_string(const Simplex& s) {
    std::ostringstream os;
    for (size_t i = 0; i < s.size(); ++i) {
        if (i) os << ',';
        os << s[i];
    }
    return os.str();
}

PointSet::PointSet(int d, std::vector<Vec> p) : dim(d), pts(std::move(p)) {
    for (const auto& q : pts)
        if (q.size() != dim) throw Error(ErrorKind::DimensionMismatch, "point dimension differs from set dimension");
}

int PointSet::add(const Vec& p) {
    if (dim == 0) dim = static_cast<int>(p.size());
    if (p.size() != dim) throw Error(ErrorKind::DimensionMismatch, "point dimension differs from set dimension");
    if (!p.allFinite()) throw Error(ErrorKind::InvalidArgument, "non-finite coordinate");
    pts.push_back(p);
    return size() - 1;
}

double PointSet::min_pairwise_distance() const {
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < size(); ++i)
        for (int j = i + 1; j < size(); ++j) best = std::min(best, (pts[i] - pts[j]).norm());
    return best;
}

Coords gather(const Simplex& s, const PointSet& pts) {
    Coords c;
    c.reserve(s.size());
    for (int i : s) {
        if (i < 0 || i >= pts.size()) throw Error(ErrorKind::UnknownVertex, "vertex index " + std::to_string(i));
        c.push_back(pts[i]);
    }
    return c;
}

bool AffineFrame::is_orthonormal(double tol) const {
    if (basis.cols() == 0) return true;
    Mat g = basis.transpose() * basis;
    return (g - Mat::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff() <= tol;
}

const char* gamma_class_name(GammaClass c) {
    switch (c) {
    case GammaClass::Good: return "Good";
    case GammaClass::Flake: return "Flake";
    case GammaClass::BadNonFlake: return "BadNonFlake";
    }
    return "?";
}

std::pair<double, double> edge_extremes(const Coords& v) {
    if (v.empty()) throw Error(ErrorKind::InvalidArgument, "empty simplex");
    if (v.size() == 1) return {0.0, 0.0};
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (size_t i = 0; i < v.size(); ++i)
        for (size_t j = i + 1; j < v.size(); ++j) {
            double d = (v[i] - v[j]).norm();
            lo = std::min(lo, d);
            hi = std::max(hi, d);
        }
    return {lo, hi};
}

namespace {

double diameter(const Coords& v) { return edge_extremes(v).second; }

// Orthonormal basis of span of the columns of e, rank decided against scale.
Mat span_basis(const Mat& e, double scale) {
    if (e.cols() == 0 || scale <= 0.0) return Mat(e.rows(), 0);
    Eigen::JacobiSVD<Mat> svd(e, Eigen::ComputeThinU);
    const auto& sv = svd.singularValues();
    int r = 0;
    for (int i = 0; i < sv.size(); ++i)
        if (sv[i] > kRelTol * scale) ++r;
    return svd.matrixU().leftCols(r);
}

Mat edge_matrix(const Coords& v, size_t ref) {
    Mat e(v[0].size(), static_cast<Eigen::Index>(v.size()) - 1);
    int c = 0;
    for (size_t i = 0; i < v.size(); ++i)
        if (i != ref) e.col(c++) = v[i] - v[ref];
    return e;
}

} // namespace

AffineFrame affine_frame(const Coords& v) {
    if (v.empty()) throw Error(ErrorKind::InvalidArgument, "empty simplex");
    AffineFrame f;
    f.origin = v[0];
    f.basis = span_basis(edge_matrix(v, 0), diameter(v));
    return f;
}

double altitude(const Coords& v, int local_vertex) {
    if (local_vertex < 0 || local_vertex >= static_cast<int>(v.size()))
        throw Error(ErrorKind::UnknownVertex, "altitude vertex not in simplex");
    if (v.size() < 2) throw Error(ErrorKind::InvalidArgument, "altitude needs dimension >= 1");
    Coords opp;
    for (size_t i = 0; i < v.size(); ++i)
        if (static_cast<int>(i) != local_vertex) opp.push_back(v[i]);
    Vec d = v[local_vertex] - opp[0];
    if (opp.size() > 1) {
        // scale the rank decision by the whole simplex, not the face
        Mat q = span_basis(edge_matrix(opp, 0), diameter(v));
        d -= q * (q.transpose() * d);
    }
    return d.norm();
}

double thickness(const Coords& v) {
    if (v.empty()) throw Error(ErrorKind::InvalidArgument, "empty simplex");
    if (v.size() == 1) return 1.0;
    const double delta = diameter(v);
    if (delta <= 0.0) return 0.0;
    const double j = static_cast<double>(v.size() - 1);
    double best = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < v.size(); ++i) best = std::min(best, altitude(v, static_cast<int>(i)));
    return std::clamp(best / (j * delta), 0.0, 1.0);
}

namespace {

// Solve the equidistance system in an orthonormal basis of aff(v) with
// reference vertex ref. rhs_shift[i] is subtracted from |y_i|^2.
// Returns z with C = v[ref] + Q z.
struct AffSolve {
    Mat q;
    Vec z;
};

AffSolve solve_equidistance(const Coords& v, size_t ref, const Vec& rhs_shift) {
    const double delta = diameter(v);
    Mat e = edge_matrix(v, ref);
    Mat q = span_basis(e, delta);
    const Eigen::Index j = e.cols();
    if (q.cols() != j || thickness(v) < kRelTol)
        throw Error(ErrorKind::DegenerateSimplex, "affinely dependent vertices");
    Mat y = q.transpose() * e; // j x j
    Mat a = 2.0 * y.transpose();
    Vec b(j);
    for (Eigen::Index i = 0; i < j; ++i) b[i] = y.col(i).squaredNorm() - rhs_shift[i];
    Eigen::ColPivHouseholderQR<Mat> qr(a);
    AffSolve out;
    out.q = q;
    out.z = qr.solve(b);
    return out;
}

} // namespace

SphereSpec circumsphere(const Coords& v) {
    if (v.empty()) throw Error(ErrorKind::InvalidArgument, "empty simplex");
    if (v.size() == 1) return {v[0], 0.0};
    Vec shift = Vec::Zero(static_cast<Eigen::Index>(v.size()) - 1);
    AffSolve s = solve_equidistance(v, 0, shift);
    SphereSpec out;
    out.center = v[0] + s.q * s.z;
    out.radius = s.z.norm();
    return out;
}

std::pair<Vec, double> weighted_center(const Coords& v, const ElementaryWeight& w) {
    if (w.carrier < 0 || w.carrier >= static_cast<int>(v.size()))
        throw Error(ErrorKind::UnknownVertex, "carrier not in simplex");
    if (w.weight < 0.0) throw Error(ErrorKind::InvalidArgument, "negative weight");
    if (v.size() == 1) {
        double r2 = -w.weight * w.weight;
        if (r2 < 0.0) throw Error(ErrorKind::NegativeSquaredRadius, "0-simplex with positive weight");
        return {v[0], 0.0};
    }
    const double w2 = w.weight * w.weight;
    const double w0sq = (w.carrier == 0) ? w2 : 0.0;
    Vec shift(static_cast<Eigen::Index>(v.size()) - 1);
    for (Eigen::Index i = 0; i < shift.size(); ++i) {
        double wi = (w.carrier == static_cast<int>(i) + 1) ? w2 : 0.0;
        shift[i] = wi - w0sq;
    }
    AffSolve s = solve_equidistance(v, 0, shift);
    Vec c = v[0] + s.q * s.z;
    double r2 = (v[0] - c).squaredNorm() - w0sq;
    const double delta = diameter(v);
    if (r2 < -kRelTol * delta * delta)
        throw Error(ErrorKind::NegativeSquaredRadius, "R^2 = " + std::to_string(r2));
    return {c, std::sqrt(std::max(0.0, r2))};
}

namespace {

struct QpCandidate {
    bool ok = false;
    double obj = 0.0;
    Vec t;
};

// Pseudo-inverse solve with relative rank cut.
Vec pinv_solve(const Mat& a, const Vec& b) {
    Eigen::CompleteOrthogonalDecomposition<Mat> cod(a);
    cod.setThreshold(1e-12);
    return cod.solve(b);
}

} // namespace

WeightedRadiusMin min_weighted_radius(const Coords& v, double max_weight) {
    WeightedRadiusMin best;
    if (v.size() < 2) throw Error(ErrorKind::InvalidArgument, "weighted radius needs dimension >= 1");
    const double delta = diameter(v);
    if (delta <= 0.0) return best;
    const double s_hi = max_weight * max_weight / delta; // scaled weight s' = w^2 / delta
    const int n = static_cast<int>(v.size());
    for (int c = 0; c < n; ++c) {
        const size_t ref = (c == 0) ? 1 : 0;
        Mat e = edge_matrix(v, ref);
        Mat q = span_basis(e, delta);
        const Eigen::Index d = q.cols();
        Mat y = q.transpose() * e; // d x k
        const Eigen::Index k = e.cols();
        // rows: 2 y_i . z + delta * s' [i == c] = |y_i|^2
        Mat mm = Mat::Zero(k, d + 1);
        Vec b(k);
        int row = 0;
        for (int i = 0; i < n; ++i) {
            if (static_cast<size_t>(i) == ref) continue;
            mm.block(row, 0, 1, d) = 2.0 * y.col(row).transpose();
            mm(row, d) = (i == c) ? delta : 0.0;
            b[row] = y.col(row).squaredNorm();
            ++row;
        }
        Eigen::JacobiSVD<Mat> svd(mm, Eigen::ComputeFullU | Eigen::ComputeFullV);
        const auto& sv = svd.singularValues();
        const double smax = sv.size() ? sv[0] : 0.0;
        int rank = 0;
        for (int i = 0; i < sv.size(); ++i)
            if (sv[i] > kRelTol * std::max(smax, delta)) ++rank;
        Vec u0 = Vec::Zero(d + 1);
        for (int i = 0; i < rank; ++i) u0 += svd.matrixV().col(i) * (svd.matrixU().col(i).dot(b) / sv[i]);
        if ((mm * u0 - b).norm() > kRelTol * delta * delta * std::sqrt(static_cast<double>(k)) + 1e-300) continue;
        Mat nb = svd.matrixV().rightCols(d + 1 - rank);
        Vec z0 = u0.head(d);
        double s0 = u0[d];
        Mat nz = nb.topRows(d);
        Vec ns = nb.row(d).transpose();
        const double stol = kRelTol * std::max(1.0, s_hi);

        auto objective = [&](const Vec& t) { return (z0 + nz * t).squaredNorm(); };
        auto sval = [&](const Vec& t) { return s0 + (t.size() ? ns.dot(t) : 0.0); };
        auto in_range = [&](double s) { return s >= -stol && s <= s_hi + stol; };

        std::vector<QpCandidate> cands;
        if (nb.cols() == 0) {
            QpCandidate qc;
            qc.t = Vec();
            qc.ok = in_range(s0);
            qc.obj = z0.squaredNorm();
            cands.push_back(qc);
        } else {
            Mat h = nz.transpose() * nz;
            Vec g = nz.transpose() * z0;
            QpCandidate un;
            un.t = pinv_solve(h, -g);
            un.ok = in_range(sval(un.t));
            un.obj = objective(un.t);
            cands.push_back(un);
            for (double target : {0.0, s_hi}) {
                const Eigen::Index p = nb.cols();
                Mat kkt = Mat::Zero(p + 1, p + 1);
                kkt.topLeftCorner(p, p) = 2.0 * h;
                kkt.block(0, p, p, 1) = ns;
                kkt.block(p, 0, 1, p) = ns.transpose();
                Vec rhs(p + 1);
                rhs.head(p) = -2.0 * g;
                rhs[p] = target - s0;
                Vec sol = pinv_solve(kkt, rhs);
                QpCandidate bc;
                bc.t = sol.head(p);
                bc.ok = std::abs(sval(bc.t) - target) <= stol && in_range(sval(bc.t));
                bc.obj = objective(bc.t);
                cands.push_back(bc);
            }
        }
        for (const auto& qc : cands) {
            if (!qc.ok) continue;
            double r = std::sqrt(std::max(0.0, qc.obj));
            if (!best.feasible || r < best.radius) {
                best.feasible = true;
                best.radius = r;
                double s = std::clamp(sval(qc.t), 0.0, s_hi) * delta;
                best.omega = ElementaryWeight{c, std::sqrt(s)};
                Vec z = z0 + (qc.t.size() ? Vec(nz * qc.t) : Vec::Zero(d));
                best.center = v[ref] + q * z;
            }
        }
    }
    return best;
}

GammaClass classify_gamma(const Coords& v, double gamma0) {
    if (!(gamma0 > 0.0 && gamma0 < 1.0)) throw Error(ErrorKind::InvalidArgument, "gamma0 must lie in (0,1)");
    const int n = static_cast<int>(v.size());
    if (n > 20) throw Error(ErrorKind::TooLarge, "simplex too large for face enumeration");
    if (n <= 2) return GammaClass::Good;
    const unsigned full = (1u << n) - 1u;
    bool self_bad = false, proper_bad = false;
    for (unsigned mask = 1; mask <= full; ++mask) {
        int j = std::popcount(mask) - 1;
        if (j < 2) continue;
        Coords f;
        for (int i = 0; i < n; ++i)
            if (mask & (1u << i)) f.push_back(v[i]);
        bool good = thickness(f) >= std::pow(gamma0, j);
        if (!good) {
            if (mask == full) self_bad = true;
            else proper_bad = true;
        }
    }
    if (!self_bad && !proper_bad) return GammaClass::Good;
    if (self_bad && !proper_bad) return GammaClass::Flake;
    return GammaClass::BadNonFlake;
}

double subspace_sin(const AffineFrame& u, const AffineFrame& v) {
    if (u.dim() > v.dim()) throw Error(ErrorKind::DimensionMismatch, "dim U > dim V");
    if (u.dim() == 0) return 0.0;
    Mat r = u.basis - v.basis * (v.basis.transpose() * u.basis);
    Eigen::JacobiSVD<Mat> svd(r);
    return std::clamp(svd.singularValues()[0], 0.0, 1.0);
}

double subspace_angle(const AffineFrame& u, const AffineFrame& v) { return std::asin(subspace_sin(u, v)); }

double flake_altitude_bound(int k, double delta, double L, double gamma0) {
    if (k < 2) throw Error(ErrorKind::InvalidArgument, "flake bound needs k >= 2");
    if (!(L > 0.0)) throw Error(ErrorKind::InvalidArgument, "flake bound needs L > 0");
    return k * delta * delta * gamma0 / ((k - 1) * L);
}

std::pair<double, double> edge_extremes(const Simplex& s, const PointSet& pts) { return edge_extremes(gather(s, pts)); }

double altitude(int vertex, const Simplex& s, const PointSet& pts) {
    auto it = std::find(s.begin(), s.end(), vertex);
    if (it == s.end()) throw Error(ErrorKind::UnknownVertex, "vertex not in simplex");
    return altitude(gather(s, pts), static_cast<int>(it - s.begin()));
}

double thickness(const Simplex& s, const PointSet& pts) { return thickness(gather(s, pts)); }
SphereSpec circumsphere(const Simplex& s, const PointSet& pts) { return circumsphere(gather(s, pts)); }
GammaClass classify_gamma(const Simplex& s, double gamma0, const PointSet& pts) {
    return classify_gamma(gather(s, pts), gamma0);
}

std::pair<Vec, double> weighted_center(const Simplex& s, const ElementaryWeight& w, const PointSet& pts) {
    auto it = std::find(s.begin(), s.end(), w.carrier);
    if (it == s.end()) throw Error(ErrorKind::UnknownVertex, "carrier not in simplex");
    return weighted_center(gather(s, pts), ElementaryWeight{static_cast<int>(it - s.begin()), w.weight});
}

double unit_ball_volume(int m) {
    return std::pow(std::numbers::pi, m / 2.0) / std::tgamma(m / 2.0 + 1.0);
}

} // namespace tdc
