#include "annulus/core.hpp"

#include "annulus/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <limits>

namespace annulus {

bool in_omega(const Params& p) noexcept {
    return p.delta >= 0.0 && p.delta < 1.0 && p.r > 0.0 && p.r + p.delta < 1.0;
}

double cone_constant(double delta) noexcept {
    const double d2 = delta * delta;
    const double first = std::sqrt(delta) - delta;
    const double second = 6.0 * d2 / (2.0 * (1.0 + d2)) - delta * std::sqrt(3.0) / (2.0 * std::sqrt(1.0 + d2));
    return std::min(first, second);
}

double omega_star_radius(double delta) noexcept {
    const double a = cone_constant(delta);
    const double denom = 0.25 + 4.0 * std::sqrt(delta);
    return std::min((delta - delta * delta) / 4.0, a * a / (denom * denom));
}

bool in_omega_star(const Params& p) noexcept {
    if (!in_omega(p) || p.delta * p.delta <= 0.5 || cone_constant(p.delta) <= 0.0) return false;
    return p.r < omega_star_radius(p.delta);
}

void require_omega(const Params& p) {
    if (!in_omega(p))
        throw PreconditionError(fmt::format("parameters (delta={}, r={}) outside Omega", p.delta, p.r));
}

void require_omega_star(const Params& p) {
    if (!in_omega_star(p))
        throw PreconditionError(fmt::format("parameters (delta={}, r={}) outside Omega*", p.delta, p.r));
}

Eigen::Vector2d obstacle_center(const Params& p) {
    return {-p.delta, 0.0};
}

namespace {

Eigen::Vector2d unit(double angle) {
    return {std::cos(angle), std::sin(angle)};
}

double angle_of(const Eigen::Vector2d& v) {
    return std::atan2(v.y(), v.x());
}

} // namespace

Ray to_cartesian(const OuterState& x, const Params&) {
    return {unit(x.s), unit(x.s + pi - x.theta)};
}

Ray to_cartesian(const InnerState& x, const Params& p) {
    const Eigen::Vector2d normal(std::cos(x.omega), -std::sin(x.omega));
    return {obstacle_center(p) + p.r * normal, unit(-x.omega - x.beta)};
}

OuterState outer_from_cartesian(const Ray& ray) {
    const double s = wrap_angle(angle_of(ray.point));
    return {s, wrap_angle(s + pi - angle_of(ray.direction))};
}

InnerState inner_from_cartesian(const Ray& ray, const Params& p) {
    const Eigen::Vector2d n = (ray.point - obstacle_center(p)) / p.r;
    const double omega = wrap_angle(std::atan2(-n.y(), n.x()));
    return {omega, wrap_angle(-omega - angle_of(ray.direction))};
}

bool RegionSet::in_inner_plus(const OuterState& x) const {
    return std::abs(std::sin(x.theta) + p_.delta * std::sin(x.theta + x.s)) <= p_.r;
}

bool RegionSet::in_inner_minus(const OuterState& x) const {
    return std::abs(std::sin(x.theta) + p_.delta * std::sin(x.theta - x.s)) <= p_.r;
}

bool RegionSet::in_h_delta(const OuterState& x) const {
    return std::abs(std::sin(x.theta)) < p_.delta * p_.delta;
}

bool RegionSet::in_whispering(const OuterState& x) const {
    return std::abs(std::sin(x.theta)) > p_.delta + p_.r;
}

double RegionSet::h_plus_level(const InnerState& x) const {
    return p_.delta * std::sin(x.omega - x.beta) + p_.r * std::sin(x.beta);
}

double RegionSet::h_minus_level(const InnerState& x) const {
    return p_.delta * std::sin(x.omega + x.beta) - p_.r * std::sin(x.beta);
}

bool RegionSet::in_h_plus(const InnerState& x) const {
    return std::abs(h_plus_level(x)) < p_.delta * p_.delta;
}

bool RegionSet::in_h_minus(const InnerState& x) const {
    return std::abs(h_minus_level(x)) < p_.delta * p_.delta;
}

double CurveSet::l_plus(const OuterState& x) const {
    return std::sin(x.theta) + p_.delta * std::sin(x.theta + x.s);
}

double CurveSet::l_minus(const OuterState& x) const {
    return std::sin(x.theta) + p_.delta * std::sin(x.theta - x.s);
}

bool CurveSet::on_l_plus(const OuterState& x, double tol) const {
    return std::abs(l_plus(x)) <= tol;
}

bool CurveSet::on_l_minus(const OuterState& x, double tol) const {
    return std::abs(l_minus(x)) <= tol;
}

double CurveSet::theta_at_level(double s, int sign, double level) const {
    // sin theta (1 + delta cos s) + cos theta (sign delta sin s) = R sin(theta + psi)
    const double a = 1.0 + p_.delta * std::cos(s);
    const double b = sign * p_.delta * std::sin(s);
    const double amplitude = std::hypot(a, b);
    if (std::abs(level) > amplitude) return std::numeric_limits<double>::quiet_NaN();
    const double psi = std::atan2(b, a);
    const double theta = std::asin(level / amplitude) - psi;
    if (std::abs(theta) >= pi / 2) return std::numeric_limits<double>::quiet_NaN();
    return theta;
}

double CurveSet::stable_line_residual(const InnerState& x, double omega_i) {
    return wrap_angle(x.omega + x.beta - omega_i);
}

double CurveSet::unstable_line_residual(const InnerState& x, double omega_hat) {
    return wrap_angle(x.omega - x.beta - omega_hat);
}

} // namespace annulus
