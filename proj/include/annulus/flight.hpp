#pragma once

#include "annulus/core.hpp"

#include <cmath>
#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

namespace annulus {

inline constexpr std::int64_t kDefaultMaxOuterSteps = 1'000'000;

// Obstacle intersections whose discriminant is below this multiple of r^2 are treated as grazing misses.
inline constexpr double kGrazingDiscriminant = 1e-14;

namespace detail {

template <class Real>
struct Vec2 {
    Real x{}, y{};
    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(Real k) const { return {x * k, y * k}; }
    Real dot(const Vec2& o) const { return x * o.x + y * o.y; }
};

template <class Real>
Vec2<Real> unit(Real angle) {
    using std::cos;
    using std::sin;
    return {cos(angle), sin(angle)};
}

} // namespace detail

template <class Real>
BasicOuterState<Real> map_inner_to_outer(const BasicInnerState<Real>& x, const Params& p) {
    using std::atan2;
    using std::cos;
    using std::sin;
    using std::sqrt;
    const Real delta = p.delta;
    const Real r = p.r;
    const detail::Vec2<Real> q{-delta + r * cos(x.omega), -r * sin(x.omega)};
    const Real heading = -x.omega - x.beta;
    const auto u = detail::unit(heading);
    const Real b = q.dot(u);
    const Real c = q.dot(q) - 1;
    const Real root = sqrt(b * b - c);
    // c < 0 inside the unit disk; pick the cancellation-free form of the positive root
    const Real t = b > 0 ? -c / (b + root) : root - b;
    const auto hit = q + u * t;
    const Real s = atan2(hit.y, hit.x);
    return {s, wrap_angle(heading - s)};
}

// F(s, theta) = (s + pi - 2 theta, theta).
template <class Real>
BasicOuterState<Real> free_map(const BasicOuterState<Real>& x) {
    return {wrap_angle(x.s + pi_v<Real>() - 2 * x.theta), x.theta};
}

// Obstacle collision if the outgoing chord meets the obstacle, the next outer state otherwise.
template <class Real>
std::variant<BasicInnerState<Real>, BasicOuterState<Real>> map_outer(const BasicOuterState<Real>& x,
                                                                     const Params& p) {
    using std::atan2;
    using std::sqrt;
    const Real delta = p.delta;
    const Real r = p.r;
    const auto pt = detail::unit(x.s);
    const Real heading = x.s + pi_v<Real>() - x.theta;
    const auto u = detail::unit(heading);
    const detail::Vec2<Real> rel{pt.x + delta, pt.y};
    const Real b = rel.dot(u);
    const Real c = rel.dot(rel) - r * r;
    const Real disc = b * b - c;
    if (disc >= Real(kGrazingDiscriminant) * r * r && b < 0) {
        const Real t = c / (-b + sqrt(disc));
        const auto n = (rel + u * t) * (1 / r);
        const Real omega = atan2(-n.y, n.x);
        const Real reflected = -2 * omega + pi_v<Real>() - heading;
        return BasicInnerState<Real>{wrap_angle(omega), wrap_angle(-omega - reflected)};
    }
    return free_map(x);
}

struct ReturnRecord {
    InnerState start;
    InnerState end;
    std::vector<OuterState> outer_hits;  // m + 1 entries
    int m = 0;
    int nu = 0;  // m + 2
    // Number of full turns in s + k (pi - 2 theta), k = 0..m, before wrapping.
    std::int64_t winding = 0;
};

enum class OrbitTag { returns, whispering, periodic_non_colliding, max_iter_exceeded };

struct OrbitClass {
    OrbitTag tag = OrbitTag::max_iter_exceeded;
    std::optional<ReturnRecord> record;
    std::int64_t outer_steps = 0;
};

const char* to_string(OrbitTag tag) noexcept;

OrbitClass first_return(const InnerState& x, const Params& p, std::int64_t max_outer_steps = kDefaultMaxOuterSteps);

// Entry from an outer state: the record's start is left at its default value.
OrbitClass first_return_from_outer(const OuterState& x, const Params& p,
                                   std::int64_t max_outer_steps = kDefaultMaxOuterSteps);

// Throws ConstructionError when x does not return.
ReturnRecord g_map(const InnerState& x, const Params& p, std::int64_t max_outer_steps = kDefaultMaxOuterSteps);

template <class Real>
struct GStep {
    BasicInnerState<Real> end;
    int m = 0;
};

// Allocation-free application of G; empty when the orbit does not return within the budget.
template <class Real>
std::optional<GStep<Real>> g_step(const BasicInnerState<Real>& x, const Params& p,
                                  std::int64_t max_outer_steps = kDefaultMaxOuterSteps) {
    auto y = map_inner_to_outer(x, p);
    for (std::int64_t k = 0; k < max_outer_steps; ++k) {
        auto next = map_outer(y, p);
        if (auto* hit = std::get_if<BasicInnerState<Real>>(&next)) return GStep<Real>{*hit, static_cast<int>(k)};
        y = std::get<BasicOuterState<Real>>(next);
    }
    return std::nullopt;
}

// G^{-1} = R o G o R.
template <class Real>
std::optional<GStep<Real>> g_inverse(const BasicInnerState<Real>& x, const Params& p,
                                     std::int64_t max_outer_steps = kDefaultMaxOuterSteps) {
    auto step = g_step(involution(x), p, max_outer_steps);
    if (step) step->end = involution(step->end);
    return step;
}

struct ReturnResiduals {
    double launch_equation = 0.0;   // sin th + delta sin(th + s) + r sin b0
    double launch_angle = 0.0;      // wrap(w0 + b0 + s + th)
    double arrival_equation = 0.0;  // sin th + delta sin(th - s) + r sin b1
    double arrival_angle = 0.0;     // wrap(w1 - b1 - th + s)
    double max_abs() const;
};

ReturnResiduals return_residuals(const ReturnRecord& rec, const Params& p);

} // namespace annulus
