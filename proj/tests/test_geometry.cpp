#include <doctest.h>

#include "oracles.hpp"
#include "tdc/geometry.hpp"

#include <cmath>
#include <random>

using namespace tdc;
using oracle::v2;
using oracle::v3;

TEST_CASE("edge extremes") {
    auto [l, d] = edge_extremes(Coords{v2(0, 0), v2(3, 0), v2(0, 4)});
    CHECK(l == doctest::Approx(3.0));
    CHECK(d == doctest::Approx(5.0));
    auto [l2, d2] = edge_extremes(Coords{v2(0, 0), v2(1, 0), v2(1, 1), v2(0, 1)});
    CHECK(l2 == doctest::Approx(1.0));
    CHECK(d2 == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("altitude and thickness of small simplices") {
    Coords right{v2(0, 0), v2(1, 0), v2(0, 1)};
    CHECK(altitude(right, 0) == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK(altitude(right, 1) == doctest::Approx(1.0));
    Coords eq{v2(0, 0), v2(1, 0), v2(0.5, std::sqrt(3.0) / 2)};
    CHECK(altitude(eq, 2) == doctest::Approx(std::sqrt(3.0) / 2));
    CHECK(thickness(eq) == doctest::Approx(std::sqrt(3.0) / 4));
    CHECK(thickness(Coords{v2(0, 0)}) == 1.0);
    CHECK(thickness(Coords{v2(0, 0), v2(2, 0)}) == doctest::Approx(1.0));
}

TEST_CASE("altitude and thickness agree with the Gram-Schmidt oracle") {
    std::mt19937_64 rng(11);
    for (int t = 0; t < 200; ++t) {
        int k = 1 + t % 4;
        auto s = oracle::random_simplex(rng, k, 5);
        Coords c(s.begin(), s.end());
        for (int i = 0; i <= k; ++i)
            CHECK(altitude(c, i) == doctest::Approx(oracle::altitude(s, static_cast<size_t>(i))).epsilon(1e-9));
        CHECK(thickness(c) == doctest::Approx(oracle::thickness(s)).epsilon(1e-9));
    }
}

TEST_CASE("circumsphere") {
    auto sq = circumsphere(Coords{v2(0, 0), v2(1, 0), v2(0, 1)});
    CHECK(sq.center[0] == doctest::Approx(0.5));
    CHECK(sq.center[1] == doctest::Approx(0.5));
    CHECK(sq.radius == doctest::Approx(std::sqrt(2.0) / 2));
    auto seg = circumsphere(Coords{v3(-1, 0, 0), v3(1, 0, 0)});
    CHECK(seg.radius == doctest::Approx(1.0));
    CHECK(seg.center.norm() == doctest::Approx(0.0));
    // Regular tetrahedron with unit edge.
    Coords tet{v3(0, 0, 0), v3(1, 0, 0), v3(0.5, std::sqrt(3.0) / 2, 0),
               v3(0.5, std::sqrt(3.0) / 6, std::sqrt(2.0 / 3.0))};
    CHECK(circumsphere(tet).radius == doctest::Approx(std::sqrt(3.0 / 8.0)));
}

TEST_CASE("circumcentre lies in the affine hull and matches the oracle") {
    std::mt19937_64 rng(12);
    for (int t = 0; t < 200; ++t) {
        int k = 1 + t % 3;
        auto s = oracle::random_simplex(rng, k, 4);
        Coords c(s.begin(), s.end());
        auto sp = circumsphere(c);
        auto ref = oracle::circumcentre(s);
        CHECK((sp.center - ref).norm() < 1e-8 * (1 + ref.norm()));
        CHECK(oracle::dist_to_hull(sp.center, s) < 1e-8 * (1 + ref.norm()));
        for (const auto& v : s) CHECK((v - sp.center).norm() == doctest::Approx(sp.radius).epsilon(1e-9));
    }
}

TEST_CASE("degenerate simplex is rejected") {
    Coords col{v2(0, 0), v2(1, 0), v2(2, 0)};
    CHECK_THROWS_AS(circumsphere(col), Error);
    CHECK(affine_frame(col).dim() == 1);
}

TEST_CASE("affine frame and subspace angles") {
    auto f = affine_frame(Coords{v3(0, 0, 0), v3(1, 0, 0), v3(0, 1, 0)});
    CHECK(f.dim() == 2);
    CHECK(f.is_orthonormal());
    auto g = affine_frame(Coords{v3(0, 0, 0), v3(1, 0, 1)});
    auto h = affine_frame(Coords{v3(5, 5, 5), v3(6, 5, 5)});
    CHECK(subspace_sin(g, h) == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK(subspace_angle(g, h) == doctest::Approx(M_PI / 4));
    // A line inside a plane has angle zero against it.
    CHECK(subspace_sin(h, f) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("Gamma0 classification: flakes and non-flakes") {
    const double g0 = 0.1;
    Coords tri{v2(0, 0), v2(1, 0), v2(0.5, 0.004)};
    CHECK(classify_gamma(tri, g0) == GammaClass::Flake);
    Coords eq{v2(0, 0), v2(1, 0), v2(0.5, std::sqrt(3.0) / 2)};
    CHECK(classify_gamma(eq, g0) == GammaClass::Good);
    Coords tet{v3(0, 0, 0), v3(1, 0, 0), v3(0.5, 0.004, 0), v3(0.5, 0.3, 0.8)};
    CHECK(classify_gamma(tet, g0) == GammaClass::BadNonFlake);
    CHECK(std::string(gamma_class_name(GammaClass::Flake)) == "Flake");
}

TEST_CASE("weighted centre of an edge") {
    auto [c, r] = weighted_center(Coords{v2(0, 0), v2(2, 0)}, ElementaryWeight{1, 1.0});
    CHECK(c[0] == doctest::Approx(0.75));
    CHECK(c[1] == doctest::Approx(0.0));
    CHECK(r == doctest::Approx(0.75));
}

TEST_CASE("weighted centre matches the oracle") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 200; ++t) {
        int k = 1 + t % 3;
        auto s = oracle::random_simplex(rng, k, 4);
        Coords c(s.begin(), s.end());
        int carrier = static_cast<int>(u(rng) * (k + 1)) % (k + 1);
        auto [l, d] = edge_extremes(c);
        double w = 0.2 * l * u(rng);
        auto [cc, r] = weighted_center(c, ElementaryWeight{carrier, w});
        auto ref = oracle::weighted_centre(s, static_cast<size_t>(carrier), w);
        CHECK((cc - ref).norm() < 1e-8 * (1 + ref.norm()));
        double r2 = (s[0] - ref).squaredNorm() - (carrier == 0 ? w * w : 0.0);
        CHECK(r == doctest::Approx(std::sqrt(r2)).epsilon(1e-8));
    }
}

TEST_CASE("min weighted radius never exceeds the circumradius") {
    std::mt19937_64 rng(14);
    for (int t = 0; t < 100; ++t) {
        auto s = oracle::random_simplex(rng, 2, 3);
        Coords c(s.begin(), s.end());
        auto [l, d] = edge_extremes(c);
        auto mw = min_weighted_radius(c, 0.1 * l);
        REQUIRE(mw.feasible);
        CHECK(mw.radius <= circumsphere(c).radius + 1e-12);
        auto [cc, r] = weighted_center(c, mw.omega);
        CHECK(r == doctest::Approx(mw.radius).epsilon(1e-9));
    }
}

TEST_CASE("flake altitude bound") {
    CHECK(flake_altitude_bound(2, 1.0, 0.5, 0.1) == doctest::Approx(0.4));
    CHECK(flake_altitude_bound(3, 0.5, 0.25, 0.05) == doctest::Approx(0.075));
}

TEST_CASE("unit ball volumes") {
    CHECK(unit_ball_volume(1) == doctest::Approx(2.0));
    CHECK(unit_ball_volume(2) == doctest::Approx(M_PI));
    CHECK(unit_ball_volume(3) == doctest::Approx(4.0 * M_PI / 3.0));
}

TEST_CASE("point set bookkeeping") {
    PointSet p(2);
    CHECK(p.add(v2(0, 0)) == 0);
    CHECK(p.add(v2(3, 4)) == 1);
    CHECK(p.min_pairwise_distance() == doctest::Approx(5.0));
    CHECK(make_simplex({3, 1, 2}) == Simplex{1, 2, 3});
    CHECK(simplex_dim(Simplex{1, 2, 3}) == 2);
    CHECK_THROWS_AS(altitude(5, Simplex{0, 5}, p), Error);
}
