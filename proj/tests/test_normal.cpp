#include "annulus/errors.hpp"
#include "annulus/flight.hpp"
#include "annulus/normal.hpp"
#include "annulus/roots.hpp"
#include "doctest.h"

#include <algorithm>

using namespace annulus;

namespace {

bool contains(const std::vector<NormalPoint>& v, double omega, int m, double tol = 1e-8) {
    return std::any_of(v.begin(), v.end(),
                       [&](const NormalPoint& x) { return x.m == m && circular_distance(x.omega, omega) < tol; });
}

} // namespace

TEST_CASE("rational tangent family") {
    const double d0 = std::sin(pi / 3);
    const auto hex = normal_from_rational({1, 3}, 5, d0);
    REQUIRE(hex);
    CHECK(hex->omega == doctest::Approx(-pi / 2));
    CHECK(hex->theta == doctest::Approx(-pi / 3));
    CHECK(hex->kind == NormalKind::tangent);
    CHECK(std::abs(normal_system_residuals(*hex).second) < 1e-10);

    // The even return time does not close at this angle.
    CHECK_FALSE(normal_from_rational({1, 3}, 2, d0));
    CHECK(normal_residual(-pi / 2, 2, d0) == doctest::Approx(-2 * d0));

    const auto square = normal_from_rational({1, 4}, 3, std::sin(pi / 4));
    REQUIRE(square);
    CHECK(square->omega == doctest::Approx(-pi / 2));
    CHECK(square->kind == NormalKind::tangent);
    CHECK_THROWS_AS(normal_from_rational({3, 2}, 1, 0.5), PreconditionError);
}

TEST_CASE("period-2 normals exist for every delta") {
    for (double d : {0.2, 0.5, 0.8}) {
        const auto v = find_normals(d, 0);
        CHECK(contains(v, 0.0, 0));
        CHECK(contains(v, pi, 0));
    }
}

TEST_CASE("find_normals at delta = 0.8") {
    const double delta = 0.8;
    const auto v = find_normals(delta, 6);
    CHECK(contains(v, 0.0, 0));
    CHECK(contains(v, pi, 0));
    for (const NormalPoint& x : v) {
        const NormalResiduals res = normal_system_residuals(x);
        CHECK(std::abs(res.first) < 1e-10);
        CHECK(std::abs(res.second) < 1e-10);
        // Mirror symmetry y -> -y maps normal orbits to normal orbits.
        CHECK(contains(v, -x.omega, x.m));
        CHECK(contains(v, x.omega_hat, x.m));
        CHECK(std::abs(std::sin(x.omega_hat) + std::sin(x.omega)) < 1e-9);
        const bool classified = x.kind == NormalKind::tangent ? x.tangency_margin <= kTangencyThreshold
                                                              : x.tangency_margin > kTangencyThreshold;
        CHECK(classified);
    }
    CHECK(std::is_sorted(v.begin(), v.end(), [](const NormalPoint& a, const NormalPoint& b) {
        return a.m < b.m || (a.m == b.m && a.omega < b.omega);
    }));
}

TEST_CASE("normal points are independent of r") {
    const double delta = 0.8;
    for (const NormalPoint& x : find_normals(delta, 4)) {
        for (double r : {1e-3, 1e-4, 1e-5}) {
            if (r >= 0.5 * x.clearance || r + delta >= 1.0) continue;
            const auto step = g_step(InnerState{x.omega, 0.0}, {delta, r});
            REQUIRE(step);
            CHECK(step->m == x.m);
            CHECK(std::abs(step->end.beta) < 1e-7);
            // Re-derive the launch angle from trajectories: beta of the image vanishes there.
            auto beta_end = [&](double w) { return g_step(InnerState{w, 0.0}, {delta, r})->end.beta; };
            const double w = bisect_root(beta_end, x.omega - 1e-6, x.omega + 1e-6, 1e-15);
            CHECK(std::abs(w - x.omega) < 1e-8);
            CHECK(circular_distance(g_step(InnerState{w, 0.0}, {delta, r})->end.omega, x.omega_hat) < 1e-8);
        }
    }
}

TEST_CASE("tangent point at delta = sin(pi/3)") {
    const auto v = find_normals(std::sin(pi / 3), 5);
    const auto it = std::find_if(v.begin(), v.end(), [](const NormalPoint& x) {
        return x.m == 5 && circular_distance(x.omega, -pi / 2) < 1e-6;
    });
    REQUIRE(it != v.end());
    CHECK(it->kind == NormalKind::tangent);
    CHECK(std::abs(normal_system_residuals(*it).second) < 1e-10);
}

TEST_CASE("X family at delta = 0.8") {
    const NormalFamily fam = build_X(0.8, 12);
    CHECK(fam.gap_bound == doctest::Approx(1.287).epsilon(1e-3));
    CHECK(fam.d < fam.gap_bound);
    CHECK(fam.n == static_cast<int>(fam.points.size()));
    CHECK(fam.n >= 5);
    for (const NormalPoint& x : fam.points) {
        CHECK(x.kind == NormalKind::transverse);
        CHECK(std::abs(std::sin(x.omega)) < 0.8);
        CHECK(contains(fam.points, x.omega_hat, x.m));
    }
    CHECK(family_gap(fam.points, 0.8) == fam.d);
    CHECK_THROWS_AS(build_X(0.8, 0), ConstructionError);
}

TEST_CASE("X family refines as delta grows") {
    const NormalFamily a = build_X(0.8, 16);
    const NormalFamily b = build_X(0.95, 40);
    CHECK(b.n > a.n);
    CHECK(b.d < a.d);
}

TEST_CASE("cubic unfolding root counts") {
    const Rational third{1, 3};
    const double d0 = std::sin(pi / 3);
    CHECK(cubic_unfolding_roots(third, 2, -0.01).size() == 1);
    const auto three = cubic_unfolding_roots(third, 2, 0.01);
    REQUIRE(three.size() == 3);
    const double predicted = std::sqrt(2 * 0.01 / d0);
    CHECK(std::abs(three.front().dphi + predicted) <= 0.15 * predicted);
    CHECK(std::abs(three.back().dphi - predicted) <= 0.15 * predicted);
    CHECK_THROWS_AS(cubic_unfolding_roots(third, 3, 0.01), PreconditionError);
    CHECK_THROWS_AS(cubic_unfolding_roots(third, 2, 0.1), PreconditionError);
}

TEST_CASE("cubic degeneracy at delta0") {
    const double d0 = std::sin(pi / 3);
    const double h = 1e-4;
    auto g = [&](double phi) { return unfolding_residual(phi, 2, d0); };
    const double c = pi / 2;
    CHECK(std::abs(g(c)) < 1e-14);
    const double first = (g(c + h) - g(c - h)) / (2 * h);
    const double second = (g(c + h) - 2 * g(c) + g(c - h)) / (h * h);
    const double third = (g(c + 2 * h) - 2 * g(c + h) + 2 * g(c - h) - g(c - 2 * h)) / (2 * h * h * h);
    CHECK(std::abs(first) < 1e-5);
    CHECK(std::abs(second) < 1e-5);
    CHECK(std::abs(third) > 1e-2);
    const auto at0 = cubic_unfolding_roots({1, 3}, 2, 0.0);
    REQUIRE(at0.size() == 1);
    CHECK(std::abs(at0.front().dphi) < 1e-4);
}
