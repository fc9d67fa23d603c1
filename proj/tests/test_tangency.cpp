#include "annulus/errors.hpp"
#include "annulus/flight.hpp"
#include "annulus/linearize.hpp"
#include "annulus/tangency.hpp"
#include "doctest.h"

#include <cmath>

using namespace annulus;

namespace {

const double kDelta0 = std::sin(pi / 3);
const double kDeltaTan = kDelta0 + 0.01;

NormalPoint far_point(double delta) {
    return classify_normal(pi, 0.0, 0, delta);
}

NormalPoint centre_point(double delta) {
    return classify_normal(0.0, 0.0, 0, delta);
}

NormalPoint hexagon() {
    return *normal_from_rational({1, 3}, 5, kDelta0);
}

const ManifoldCurve& far_stable() {
    static const ManifoldCurve c =
        local_manifold(symmetric_point_from_normal(far_point(0.8), {0.8, 1e-3}), ManifoldSide::stable);
    return c;
}

const ManifoldCurve& far_unstable() {
    static const ManifoldCurve c =
        local_manifold(symmetric_point_from_normal(far_point(0.8), {0.8, 1e-3}), ManifoldSide::unstable);
    return c;
}

const TangencyReport& hexagon_report() {
    static const TangencyReport rep =
        find_tangency_r({kDeltaTan, centre_point(kDeltaTan), hexagon(), {1, 3}, 0.02, 0.03});
    return rep;
}

} // namespace

TEST_CASE("normal orbits close and carry the squared centre trace") {
    const Params p{0.8, 1e-3};
    const auto z = symmetric_point_from_normal(centre_point(0.8), p);
    CHECK(z.period == 2);
    CHECK(z.closure < kSymmetricClosure);
    const double t = center_trace_closed_form(0.8, 1e-3);
    CHECK(z.trace == doctest::Approx(t * t - 2).epsilon(1e-8));
    const auto f = symmetric_point_from_normal(far_point(0.8), p);
    CHECK(f.orbit[1].omega == doctest::Approx(pi).epsilon(1e-12));
}

TEST_CASE("stable manifold of the far fixed point spans the strip") {
    const ManifoldCurve& c = far_stable();
    CHECK(c.reaches_boundary);
    CHECK_FALSE(c.truncated);
    CHECK(std::abs(c.eigenvalue) < 1);
    CHECK(c.slope_min > -1.01);
    CHECK(c.slope_max < -0.99);
    CHECK(distance_to(c.polyline, {pi, 0.0}) < 1e-12);
    const SlopeBounds b = slope_bounds({0.8, 1e-3}, SamplingOptions{}, Gate::relaxed);
    CHECK(slope_violations(c, b) == 0);
    CHECK(slope_violations(far_unstable(), b) == 0);
}

TEST_CASE("eigendirection is invariant under the period product") {
    const ManifoldCurve& c = far_stable();
    const Params p{0.8, 1e-3};
    const auto z = symmetric_point_from_normal(far_point(0.8), p);
    Eigen::Matrix2d m = Eigen::Matrix2d::Identity();
    for (const InnerState& x : z.orbit) m = dg_analytic(g_map(x, p), p).matrix() * m;
    const Eigen::Vector2d image = m * c.eigenvector;
    CHECK((image - c.eigenvalue * c.eigenvector).norm() < 1e-9 * m.norm());
}

TEST_CASE("stable manifold is forward invariant") {
    const ManifoldCurve& c = far_stable();
    const Params p{0.8, 1e-3};
    int checked = 0;
    for (std::size_t i = 0; i < c.polyline.size(); i += 7) {
        const InnerState& x = c.polyline.points[i];
        if (std::abs(x.beta) > 1.4) continue;
        const auto y = g_step(x, p);
        REQUIRE(y);
        CHECK(distance_to(c.polyline, y->end) < 1e-7);
        ++checked;
    }
    CHECK(checked > 20);
}

TEST_CASE("involution of the stable manifold is the unstable manifold") {
    CHECK(far_unstable().reaches_boundary);
    CHECK(hausdorff(involution(far_stable().polyline), far_unstable().polyline) < kReversibilityTolerance);
}

TEST_CASE("stable manifold approaches its limit line as r shrinks") {
    double last = 1;
    for (double r : {1e-3, 1e-4, 1e-5}) {
        const Params p{0.8, r};
        const auto c = local_manifold(symmetric_point_from_normal(far_point(0.8), p), ManifoldSide::stable);
        const double d = limit_line_distance(c, pi);
        CHECK(c.reaches_boundary);
        CHECK(c.polyline.length() > 4);
        CHECK(d < last);
        last = d;
    }
    CHECK(last < 1e-4);
}

TEST_CASE("elliptic points have no manifolds") {
    const Params p{0.3, 0.5};
    const auto z = symmetric_point_from_normal(centre_point(0.3), p);
    CHECK_THROWS_AS(local_manifold(z, ManifoldSide::stable), PreconditionError);
}

TEST_CASE("tangency curve coefficients") {
    const auto c = gamma_curve({1, 3}, 2, 0.0, {-0.1, -0.05, 0.05, 0.1});
    CHECK(c.d0 == doctest::Approx(std::sin(pi / 4)).epsilon(1e-14));
    CHECK(c.delta0 == doctest::Approx(kDelta0).epsilon(1e-15));
    REQUIRE(c.samples.size() == 2);
    for (const auto& s : c.samples) {
        CHECK(s.t < 0);
        CHECK(s.r > 0);
        CHECK(s.delta == doctest::Approx(kDelta0 * (1 + 1.5 * s.t * s.t)).epsilon(1e-14));
        CHECK(s.r == doctest::Approx(-6 * std::tan(pi / 3) / c.d0 * s.t * s.t * s.t).epsilon(1e-14));
    }
    const double t = std::sqrt(0.01 / (1.5 * kDelta0));
    CHECK(gamma_prediction({1, 3}, 5, 0.0, 0.01) ==
          doctest::Approx(12 * std::tan(pi / 3) / std::sin(pi / 4) * t * t * t).epsilon(1e-13));
    CHECK_THROWS_AS(gamma_curve({1, 3}, 2, -pi / 2, {0.1}), DegenerateError);
    CHECK_THROWS_AS(gamma_curve({1, 3}, 3, 0.0, {0.1}), PreconditionError);
}

TEST_CASE("tilde neighbourhood isolates the unfolded cluster") {
    const Params p{kDeltaTan, 0.028};
    const auto n = tilde_neighbourhood(hexagon(), p);
    CHECK(n.m == 5);
    CHECK(n.psi == doctest::Approx(-pi / 2).epsilon(1e-12));
    CHECK(n.window > kTildeCluster);
    CHECK(n.window < 0.8);
}

TEST_CASE("branch minimum increases with r") {
    double last = -1e9;
    for (double r : {0.02, 0.025, 0.03}) {
        const auto b = tangency_branch(centre_point(kDeltaTan), hexagon(), {kDeltaTan, r});
        CHECK(b.gate_ok);
        CHECK(b.min_beta > last);
        CHECK(b.l0_crossings == (b.min_beta < 0 ? 2 : 0));
        last = b.min_beta;
    }
}

TEST_CASE("quadratic tangency of the hexagon family") {
    const TangencyReport& rep = hexagon_report();
    CHECK(rep.g_lo < 0);
    CHECK(rep.g_hi > 0);
    CHECK(rep.r_star > 0.02);
    CHECK(rep.r_star < 0.03);
    CHECK(rep.contact.quadratic);
    CHECK(rep.crossings_below + rep.crossings_above == 2);
    CHECK(rep.crossings_below * rep.crossings_above == 0);
    CHECK(rep.ws_rws_distance < kTangencyDistance);
    CHECK(rep.in_tilde);
    CHECK(rep.gate_ok);
    CHECK(rep.relative_error < 0.5);
}

TEST_CASE("bracket without a sign change is reported") {
    CHECK_THROWS_AS(find_tangency_r({kDeltaTan, centre_point(kDeltaTan), hexagon(), {1, 3}, 0.02, 0.025}),
                    ConstructionError);
    CHECK_THROWS_AS(find_tangency_r({kDeltaTan, centre_point(kDeltaTan), hexagon(), {1, 3}, 0.03, 0.02}),
                    PreconditionError);
}

TEST_CASE("contact certificate separates quadratic from cubic contact") {
    auto parabola = [](double u) -> std::optional<InnerState> { return InnerState{u, 0.5 * u * u}; };
    auto cubic = [](double u) -> std::optional<InnerState> { return InnerState{u, u * u * u}; };
    const auto q = contact_certificate(parabola, 0.0, 1e-3, 1.0);
    CHECK(q.second_derivative == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(q.quadratic);
    CHECK_FALSE(contact_certificate(cubic, 0.0, 1e-3, 1.0).quadratic);
}
