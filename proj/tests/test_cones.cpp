#include "annulus/cones.hpp"
#include "annulus/errors.hpp"
#include "doctest.h"

using namespace annulus;

TEST_CASE("zeta bounds") {
    CHECK(zeta_min_bound(0.8) == doctest::Approx(0.5410).epsilon(1e-4));
    CHECK(zeta_max_bound(0.8) == doctest::Approx(0.8944).epsilon(1e-4));
    for (double d : {0.71, 0.8, 0.9, 0.99}) {
        CHECK(zeta_min_bound(d) > 0.5);
        CHECK(zeta_max_bound(d) < 1.0);
        CHECK(cone_constant(d) > 0.0);
    }
    const ZetaReport a = zeta_bounds_check({0.8, 0.01}, {100000, 3, 1});
    CHECK(a.pass);
    CHECK(a.observed_min > a.bound_min);
    CHECK(a.observed_max < a.bound_max);
    CHECK(zeta_bounds_check({0.75, 0.04}, {20000, 4, 1}).pass);
    CHECK_THROWS_AS(zeta_bounds_check({0.6, 0.01}, {10, 1, 1}), PreconditionError);
}

TEST_CASE("a21 lower bound on H-") {
    const Params p{0.8, 0.005};
    const A21Report rep = a21_bound_check(p, {10000, 5, 1});
    CHECK(rep.pass);
    CHECK(rep.worst_margin >= 1.0);
    const JacobianTerms t = dg_analytic(g_map({0.0, 0.0}, p), p);
    CHECK(std::abs(t.a21) == doctest::Approx(576.0));
    CHECK(std::abs(t.a21) >= rep.bound);
}

TEST_CASE("cone gate") {
    CHECK_THROWS_AS(cone_preservation_check({0.8, 3e-3}, {10, 1, 1}), PreconditionError);
    CHECK_THROWS_AS(cone_preservation_check({0.6, 1e-4}, {10, 1, 1}, Gate::relaxed), PreconditionError);
    CHECK_NOTHROW(cone_preservation_check({0.8, 5e-4}, {10, 1, 1}));
}

TEST_CASE("cone preservation and expansion trend") {
    double previous_rho = 0.0;
    double previous_spread = 1e9;
    for (double r : {1e-2, 3e-3, 1e-3}) {
        const ConeReport rep = cone_preservation_check({0.8, r}, {4000, 6, 1}, Gate::relaxed);
        CHECK(rep.pass);
        CHECK(rep.violations == 0);
        CHECK(rep.forward_margin >= kConeMargin);
        CHECK(rep.backward_margin >= kConeMargin);
        CHECK(rep.rho_observed > previous_rho);
        CHECK(rep.rho_observed >= rep.rho_bound * (2.0 - rep.measured_k * std::sqrt(r)));
        CHECK(rep.c1 <= 1.0);
        CHECK(rep.c2 >= 1.0);
        CHECK(rep.c1 > 0.0);
        CHECK(rep.slope_min >= rep.c1);
        CHECK(rep.slope_max <= rep.c2);
        const double spread = std::max(1.0 - rep.c1, rep.c2 - 1.0);
        CHECK(spread < previous_spread);
        previous_rho = rep.rho_observed;
        previous_spread = spread;
    }
}

TEST_CASE("slope bounds near one for small r") {
    const SlopeBounds b = slope_bounds({0.8, 1e-3}, {3000, 7, 1}, Gate::relaxed);
    CHECK(b.c1 > 0.9);
    CHECK(b.c2 < 1.1);
    CHECK(in_stable_band(-1.0, b));
    CHECK(in_unstable_band(1.0, b));
    CHECK_FALSE(in_stable_band(1.0, b));
}

TEST_CASE("reports are deterministic across worker counts") {
    const ConeReport a = cone_preservation_check({0.8, 5e-4}, {500, 9, 1});
    const ConeReport b = cone_preservation_check({0.8, 5e-4}, {500, 9, 3});
    CHECK(a.rho_observed == b.rho_observed);
    CHECK(a.measured_k == b.measured_k);
    CHECK(a.c1 == b.c1);
    CHECK(a.skipped == b.skipped);
}
