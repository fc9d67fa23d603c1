#pragma once

#include <Eigen/Core>
#include <boost/math/constants/constants.hpp>

#include <cmath>

namespace annulus {

inline constexpr double pi = boost::math::constants::pi<double>();

// Absolute tolerance for on-curve predicates and implicit-equation residuals.
inline constexpr double kResidualTolerance = 1e-10;

template <class Real>
Real pi_v() {
    return boost::math::constants::pi<Real>();
}

// Representative of an angle in (-pi, pi].
template <class Real>
Real wrap_angle(Real a) {
    using std::fmod;
    const Real two_pi = 2 * pi_v<Real>();
    Real w = fmod(a + pi_v<Real>(), two_pi);
    if (w <= 0) w += two_pi;
    return w - pi_v<Real>();
}

inline double circular_distance(double a, double b) {
    return std::abs(wrap_angle(a - b));
}

// Eccentricity delta (distance between the centres) and obstacle radius r.
struct Params {
    double delta = 0.0;
    double r = 0.0;
};

bool in_omega(const Params& p) noexcept;

// The constant A controlling the lower bound |a21| >= 4A/sqrt(r).
double cone_constant(double delta) noexcept;

// r(delta) = min{(delta - delta^2)/4, A^2 / (1/4 + 4 sqrt(delta))^2}.
double omega_star_radius(double delta) noexcept;

bool in_omega_star(const Params& p) noexcept;

void require_omega(const Params& p);
void require_omega_star(const Params& p);

template <class Real>
struct BasicOuterState {
    Real s{};      // arc position on the unit circle, counterclockwise
    Real theta{};  // reflection angle from the inward normal
};

template <class Real>
struct BasicInnerState {
    Real omega{};  // central angle on the obstacle, clockwise
    Real beta{};   // angle from the outward obstacle normal
};

using OuterState = BasicOuterState<double>;
using InnerState = BasicInnerState<double>;

template <class To, class From>
BasicInnerState<To> state_cast(const BasicInnerState<From>& x) {
    return {static_cast<To>(x.omega), static_cast<To>(x.beta)};
}

template <class To, class From>
BasicOuterState<To> state_cast(const BasicOuterState<From>& x) {
    return {static_cast<To>(x.s), static_cast<To>(x.theta)};
}

template <class Real>
BasicOuterState<Real> involution(const BasicOuterState<Real>& x) {
    return {x.s, -x.theta};
}

template <class Real>
BasicInnerState<Real> involution(const BasicInnerState<Real>& x) {
    return {x.omega, -x.beta};
}

struct Ray {
    Eigen::Vector2d point;
    Eigen::Vector2d direction;
};

Eigen::Vector2d obstacle_center(const Params& p);

// Collision point and outgoing unit velocity.
Ray to_cartesian(const OuterState& x, const Params& p);
Ray to_cartesian(const InnerState& x, const Params& p);

OuterState outer_from_cartesian(const Ray& ray);
InnerState inner_from_cartesian(const Ray& ray, const Params& p);

// Membership predicates for the named regions of phase space.
class RegionSet {
public:
    explicit RegionSet(Params p) : p_(p) {}

    const Params& params() const noexcept { return p_; }

    // |sin theta + delta sin(theta + s)| <= r: states reached from the obstacle.
    bool in_inner_plus(const OuterState& x) const;
    // |sin theta + delta sin(theta - s)| <= r: states heading into the obstacle.
    bool in_inner_minus(const OuterState& x) const;
    // |sin theta| < delta^2
    bool in_h_delta(const OuterState& x) const;
    bool in_whispering(const OuterState& x) const;

    // H+ = T(H_delta) and H- = T^{-1}(H_delta).
    double h_plus_level(const InnerState& x) const;
    double h_minus_level(const InnerState& x) const;
    bool in_h_plus(const InnerState& x) const;
    bool in_h_minus(const InnerState& x) const;

private:
    Params p_;
};

// Implicit functions of the distinguished curves.
class CurveSet {
public:
    explicit CurveSet(Params p) : p_(p) {}

    // sin theta + delta sin(theta + s)
    double l_plus(const OuterState& x) const;
    // sin theta + delta sin(theta - s)
    double l_minus(const OuterState& x) const;
    static double l0(const InnerState& x) { return x.beta; }

    bool on_l_plus(const OuterState& x, double tol = kResidualTolerance) const;
    bool on_l_minus(const OuterState& x, double tol = kResidualTolerance) const;

    // theta with sin theta + delta sin(theta + sign*s) = level, |theta| < pi/2.
    // Returns NaN when the level is not attained.
    double theta_at_level(double s, int sign, double level) const;

    // Limit lines omega + beta = omega_i (stable) and omega - beta = omega_hat (unstable).
    static double stable_line_residual(const InnerState& x, double omega_i);
    static double unstable_line_residual(const InnerState& x, double omega_hat);

private:
    Params p_;
};

} // namespace annulus
