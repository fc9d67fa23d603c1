#include "annulus/core.hpp"
#include "annulus/errors.hpp"
#include "doctest.h"
#include "support.hpp"

#include <queue>
#include <vector>

using namespace annulus;

TEST_CASE("wrap_angle maps into (-pi, pi]") {
    CHECK(wrap_angle(pi) == doctest::Approx(pi));
    CHECK(wrap_angle(-pi) == doctest::Approx(pi));
    CHECK(wrap_angle(3 * pi / 2) == doctest::Approx(-pi / 2));
    CHECK(wrap_angle(0.0) == 0.0);
    CHECK(wrap_angle(-7.0) == doctest::Approx(-7.0 + 2 * pi));
}

TEST_CASE("involution flips the angle and squares to the identity") {
    const OuterState a = involution(OuterState{0.3, 0.2});
    CHECK(a.s == 0.3);
    CHECK(a.theta == -0.2);
    const InnerState b = involution(InnerState{pi, 0.0});
    CHECK(b.omega == pi);
    CHECK(b.beta == 0.0);
    std::mt19937_64 rng(1);
    for (int i = 0; i < 1000; ++i) {
        const InnerState x = testing::random_inner(rng);
        const InnerState y = involution(involution(x));
        CHECK(y.omega == x.omega);
        CHECK(y.beta == x.beta);
    }
}

TEST_CASE("parameter domains") {
    CHECK(in_omega({0.5, 0.2}));
    CHECK_FALSE(in_omega({0.5, 0.5}));
    CHECK_FALSE(in_omega({0.5, 0.0}));
    CHECK(cone_constant(0.8) == doctest::Approx(0.0944).epsilon(1e-3));
    CHECK(omega_star_radius(0.8) == doctest::Approx(6.08e-4).epsilon(1e-2));
    CHECK(in_omega_star({0.8, 1e-4}));
    CHECK_FALSE(in_omega_star({0.8, 1e-3}));
    CHECK(in_omega_star({0.9, 1e-5}));
    CHECK(in_omega_star({0.95, 1e-5}));
    CHECK_FALSE(in_omega_star({0.6, 1e-6}));
    CHECK_THROWS_AS(require_omega({0.9, 0.2}), PreconditionError);
    CHECK_NOTHROW(require_omega_star({0.8, 1e-4}));
}

TEST_CASE("cartesian realization") {
    const Params p{0.3, 0.1};
    const Ray a = to_cartesian(InnerState{0.0, 0.0}, p);
    CHECK(a.point.x() == doctest::Approx(-0.2));
    CHECK(a.point.y() == doctest::Approx(0.0));
    CHECK(a.direction.x() == doctest::Approx(1.0));
    CHECK(a.direction.y() == doctest::Approx(0.0));
    const Ray b = to_cartesian(OuterState{0.0, 0.0}, p);
    CHECK(b.point.x() == doctest::Approx(1.0));
    CHECK(b.direction.x() == doctest::Approx(-1.0));
    CHECK(b.direction.y() == doctest::Approx(0.0).epsilon(1e-15));

    std::mt19937_64 rng(2);
    for (int i = 0; i < 1000; ++i) {
        const InnerState x = testing::random_inner(rng, pi / 2);
        const InnerState xi = inner_from_cartesian(to_cartesian(x, p), p);
        CHECK(circular_distance(xi.omega, x.omega) < 1e-12);
        CHECK(std::abs(xi.beta - x.beta) < 1e-12);
        const OuterState y = testing::random_outer(rng);
        const OuterState yi = outer_from_cartesian(to_cartesian(y, p));
        CHECK(circular_distance(yi.s, y.s) < 1e-12);
        CHECK(std::abs(yi.theta - y.theta) < 1e-12);
    }
}

namespace {

// Connected components of the H- set on a periodic-in-omega grid of the closed cylinder.
int count_h_minus_components(const Params& p, int nw, int nb) {
    const RegionSet regions(p);
    std::vector<int> label(static_cast<std::size_t>(nw * nb), -1);
    auto inside = [&](int i, int j) {
        return regions.in_h_minus({-pi + 2 * pi * i / nw, -pi / 2 + pi * j / (nb - 1)});
    };
    int count = 0;
    for (int i = 0; i < nw; ++i)
        for (int j = 0; j < nb; ++j) {
            if (label[i * nb + j] >= 0 || !inside(i, j)) continue;
            std::queue<std::pair<int, int>> q;
            q.push({i, j});
            label[i * nb + j] = count;
            while (!q.empty()) {
                auto [a, b] = q.front();
                q.pop();
                const int da[] = {1, -1, 0, 0};
                const int db[] = {0, 0, 1, -1};
                for (int k = 0; k < 4; ++k) {
                    const int na = (a + da[k] + nw) % nw;
                    const int nb2 = b + db[k];
                    if (nb2 < 0 || nb2 >= nb) continue;
                    if (label[na * nb + nb2] >= 0 || !inside(na, nb2)) continue;
                    label[na * nb + nb2] = count;
                    q.push({na, nb2});
                }
            }
            ++count;
        }
    return count;
}

} // namespace

TEST_CASE("H- has two components, around (0,0) and (pi,0)") {
    for (const Params p : {Params{0.8, 0.01}, Params{0.5, 0.05}, Params{0.3, 0.02}}) {
        CHECK(count_h_minus_components(p, 400, 200) == 2);
        const RegionSet regions(p);
        CHECK(regions.in_h_minus({0.0, 0.0}));
        CHECK(regions.in_h_minus({pi, 0.0}));
    }
}

TEST_CASE("R maps H- onto H+") {
    std::mt19937_64 rng(3);
    const RegionSet regions({0.8, 0.01});
    for (int i = 0; i < 10000; ++i) {
        const InnerState x = testing::random_inner(rng, pi / 2);
        CHECK(regions.in_h_minus(x) == regions.in_h_plus(involution(x)));
    }
}

TEST_CASE("region predicates match their defining inequalities") {
    const Params p{0.6, 0.1};
    const RegionSet regions(p);
    const CurveSet curves(p);
    std::mt19937_64 rng(4);
    for (int i = 0; i < 1000; ++i) {
        const OuterState x = testing::random_outer(rng);
        CHECK(regions.in_inner_plus(x) == (std::abs(curves.l_plus(x)) <= p.r));
        CHECK(regions.in_inner_minus(x) == (std::abs(curves.l_minus(x)) <= p.r));
        CHECK(regions.in_whispering(x) == (std::abs(std::sin(x.theta)) > p.delta + p.r));
    }
}

TEST_CASE("boundaries of M_inn+- approach L+-delta within r") {
    const double delta = 0.7;
    for (double r : {0.1, 0.01, 0.001}) {
        const CurveSet curves({delta, r});
        double worst = 0.0;
        for (int k = 0; k < 200; ++k) {
            const double s = -pi + 2 * pi * (k + 0.5) / 200;
            for (int sign : {1, -1})
                for (double level : {r, -r}) {
                    const double theta = curves.theta_at_level(s, sign, level);
                    REQUIRE(std::isfinite(theta));
                    const OuterState x{s, theta};
                    const double residual = sign > 0 ? curves.l_plus(x) : curves.l_minus(x);
                    CHECK(residual == doctest::Approx(level).epsilon(1e-12));
                    worst = std::max(worst, std::abs(residual));
                }
            const double on_curve = curves.theta_at_level(s, 1, 0.0);
            CHECK(curves.on_l_plus({s, on_curve}));
        }
        CHECK(worst <= r * (1 + 1e-12));
    }
}
