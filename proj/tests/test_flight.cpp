#include "annulus/errors.hpp"
#include "annulus/flight.hpp"
#include "annulus/quad.hpp"
#include "doctest.h"
#include "support.hpp"

#include <Eigen/Dense>

using namespace annulus;

TEST_CASE("launch along the line of centres") {
    for (const Params p : {Params{0.5, 0.2}, Params{0.8, 0.01}, Params{0.0, 0.5}}) {
        const OuterState a = map_inner_to_outer(InnerState{0.0, 0.0}, p);
        CHECK(std::abs(a.s) < 1e-15);
        CHECK(std::abs(a.theta) < 1e-15);
        const OuterState b = map_inner_to_outer(InnerState{pi, 0.0}, p);
        CHECK(circular_distance(b.s, pi) < 1e-15);
        CHECK(std::abs(b.theta) < 1e-15);
    }
}

TEST_CASE("outer map branches") {
    auto f = map_outer(OuterState{0.0, pi / 4}, {0.0, 0.1});
    REQUIRE(std::holds_alternative<OuterState>(f));
    CHECK(std::get<OuterState>(f).s == doctest::Approx(pi / 2));
    CHECK(std::get<OuterState>(f).theta == pi / 4);

    auto hit = map_outer(OuterState{0.0, 0.0}, {0.5, 0.2});
    REQUIRE(std::holds_alternative<InnerState>(hit));
    CHECK(std::abs(std::get<InnerState>(hit).omega) < 1e-15);
    CHECK(std::abs(std::get<InnerState>(hit).beta) < 1e-15);

    for (double s : {-2.0, 0.0, 1.3}) {
        OuterState x{s, pi / 4};
        for (int k = 0; k < 4; ++k) x = free_map(x);
        CHECK(circular_distance(x.s, s) < 1e-14);
        CHECK(x.theta == pi / 4);
    }
}

TEST_CASE("the convention satisfies both implicit systems on traced trajectories") {
    std::mt19937_64 rng(5);
    for (const Params p : {Params{0.5, 0.2}, Params{0.8, 0.01}, Params{0.3, 0.45}}) {
        int checked = 0;
        for (int i = 0; i < 2000; ++i) {
            const OrbitClass c = first_return(testing::random_inner(rng), p);
            if (c.tag != OrbitTag::returns) continue;
            ++checked;
            const ReturnRecord& rec = *c.record;
            CHECK(return_residuals(rec, p).max_abs() < 1e-10);
            CHECK(rec.nu == static_cast<int>(rec.outer_hits.size()) + 1);
            CHECK(rec.nu == rec.m + 2);
            const RegionSet regions(p);
            for (std::size_t k = 0; k + 1 < rec.outer_hits.size(); ++k)
                CHECK_FALSE(std::holds_alternative<InnerState>(map_outer(rec.outer_hits[k], p)));
            for (const auto& hit : rec.outer_hits) CHECK(hit.theta == rec.outer_hits.front().theta);
            CHECK(regions.in_inner_minus(rec.outer_hits.back()));
        }
        CHECK(checked > 1900);
    }
}

TEST_CASE("period-2 fixed points") {
    const Params p{0.5, 0.2};
    for (double w : {0.0, pi}) {
        const ReturnRecord rec = g_map({w, 0.0}, p);
        CHECK(circular_distance(rec.end.omega, w) < 1e-14);
        CHECK(std::abs(rec.end.beta) < 1e-14);
        CHECK(rec.nu == 2);
        CHECK(rec.m == 0);
    }
}

TEST_CASE("reversibility G^{-1} = R G R") {
    std::mt19937_64 rng(6);
    const Params p{0.5, 0.2};
    for (int i = 0; i < 1000; ++i) {
        const InnerState x = testing::random_inner(rng);
        const ReturnRecord rec = g_map(x, p);
        const ReturnRecord back = g_map(involution(rec.end), p);
        CHECK(circular_distance(back.end.omega, x.omega) < 1e-8);
        CHECK(std::abs(back.end.beta + x.beta) < 1e-8);
        const auto inv = g_inverse(rec.end, p);
        REQUIRE(inv);
        CHECK(circular_distance(inv->end.omega, x.omega) < 1e-8);
    }
}

TEST_CASE("concentric radial bounce") {
    const Params p{0.0, 0.4};
    for (double w : {-2.5, 0.3, 1.7}) {
        const ReturnRecord rec = g_map({w, 0.0}, p);
        CHECK(circular_distance(rec.end.omega, w) < 1e-13);
        CHECK(rec.nu == 2);
    }
}

TEST_CASE("whispering and non-colliding entries from the outer circle") {
    const Params p{0.3, 0.1};
    CHECK(first_return_from_outer({0.0, 1.2}, p).tag == OrbitTag::whispering);
    // Square caustic of radius cos(pi/4) ~ 0.707 misses an obstacle contained in |x| < 0.4.
    const OrbitClass square = first_return_from_outer({0.0, pi / 4}, {0.3, 0.1});
    CHECK(square.tag == OrbitTag::whispering);
    // Square inscribed with a vertex at s = pi; the obstacle sits in that corner, off every side.
    const OrbitClass sq2 = first_return_from_outer({0.0, pi / 4}, {0.2, 0.54}, 100);
    CHECK(sq2.tag == OrbitTag::periodic_non_colliding);
    bool capped = false;
    for (int k = 1; k < 100 && !capped; ++k) {
        const OuterState x{0.1, 0.06 * k / 100.0};
        if (first_return_from_outer(x, {0.05, 0.02}, 3).tag != OrbitTag::max_iter_exceeded) continue;
        capped = true;
        CHECK(first_return_from_outer(x, {0.05, 0.02}).tag == OrbitTag::returns);
    }
    CHECK(capped);
    CHECK_THROWS_AS(first_return({0.0, 0.0}, p, 0), PreconditionError);
}

TEST_CASE("measure invariance of the launch map") {
    std::mt19937_64 rng(7);
    const Params p{0.5, 0.2};
    const double h = 1e-6;
    for (int i = 0; i < 200; ++i) {
        const InnerState x = testing::random_inner(rng, 1.3);
        Eigen::Matrix2d j;
        for (int col = 0; col < 2; ++col) {
            InnerState a = x, b = x;
            (col == 0 ? a.omega : a.beta) += h;
            (col == 0 ? b.omega : b.beta) -= h;
            const OuterState fa = map_inner_to_outer(a, p);
            const OuterState fb = map_inner_to_outer(b, p);
            j(0, col) = wrap_angle(fa.s - fb.s) / (2 * h);
            j(1, col) = (fa.theta - fb.theta) / (2 * h);
        }
        const OuterState y = map_inner_to_outer(x, p);
        CHECK(std::abs(std::abs(j.determinant()) * std::cos(y.theta) - p.r * std::cos(x.beta)) < 1e-6);
    }
}

TEST_CASE("templated tracer agrees with double precision") {
    const Params p{0.8, 0.01};
    const InnerState x{0.4, 0.3};
    const auto d = g_step(x, p);
    const auto q = g_step(state_cast<Quad>(x), p);
    REQUIRE(d);
    REQUIRE(q);
    CHECK(d->m == q->m);
    CHECK(std::abs(d->end.omega - static_cast<double>(q->end.omega)) < 1e-9);
}
