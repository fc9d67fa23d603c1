#include "annulus/linearize.hpp"

#include "annulus/errors.hpp"

#include <fmt/format.h>

#include <array>

namespace annulus {

Eigen::Matrix2d JacobianTerms::matrix() const {
    Eigen::Matrix2d j;
    j << a11, a12, a21, a22;
    return j;
}

JacobianTerms dg_analytic(const ReturnRecord& rec, const Params& p) {
    if (rec.outer_hits.empty()) throw PreconditionError("return record without outer hits");
    JacobianTerms t;
    t.theta = rec.outer_hits.front().theta;
    for (const auto& hit : rec.outer_hits)
        if (std::abs(hit.theta - t.theta) > kThetaConsistency)
            throw ConstructionError("outer hits of a return record disagree in theta");
    t.m = rec.m;
    t.beta0 = rec.start.beta;
    t.beta1 = rec.end.beta;
    const double cos_theta = std::cos(t.theta);
    const double cos_b0 = std::cos(t.beta0);
    const double cos_b1 = std::cos(t.beta1);
    if (std::abs(cos_b1) < kDegenerateCosine || std::abs(cos_theta) < kDegenerateCosine)
        throw DegenerateError(fmt::format("degenerate denominator: cos(beta1)={}, cos(theta)={}", cos_b1, cos_theta));

    t.phi0 = wrap_angle(-rec.start.omega - rec.start.beta);
    t.phi1 = wrap_angle(-rec.end.omega + rec.end.beta);
    t.zeta0 = p.delta * std::cos(t.phi0) / cos_theta;
    t.zeta1 = p.delta * std::cos(t.phi1) / cos_theta;
    using Wide = long double;
    const Wide k = 2.0L * (t.m + 1);
    const Wide z0 = t.zeta0, z1 = t.zeta1;
    const Wide ratio = static_cast<Wide>(cos_b0) / cos_b1;
    const Wide a21 = -(static_cast<Wide>(cos_theta) / (static_cast<Wide>(p.r) * cos_b1)) * (z0 + z1 + k * z0 * z1);
    const Wide t11 = 1.0L + k * z0;
    const Wide t22 = ratio * (1.0L + k * z1);
    const Wide gap = static_cast<Wide>(p.r) * k * cos_b0 / cos_theta;
    const Wide t12 = t11 + t22 - gap;
    t.a21 = static_cast<double>(a21);
    t.atilde11 = static_cast<double>(t11);
    t.atilde22 = static_cast<double>(t22);
    t.atilde12 = static_cast<double>(t12);
    t.a11 = static_cast<double>(a21 + t11);
    t.a12 = static_cast<double>(a21 + t12);
    t.a22 = static_cast<double>(a21 + t22);
    // a11 a22 - a12 a21 = a21 (atilde11 + atilde22 - atilde12) + atilde11 atilde22
    t.determinant = static_cast<double>(a21 * gap + t11 * t22);
    return t;
}

Eigen::Matrix2d dg_numeric(const InnerState& x, const Params& p, double h) {
    const auto centre = g_step(x, p);
    if (!centre) throw ConstructionError("dg_numeric: base point does not return");
    Eigen::Matrix2d j;
    for (int col = 0; col < 2; ++col) {
        std::array<InnerState, 2> ends;
        for (int side = 0; side < 2; ++side) {
            InnerState y = x;
            const double step = side == 0 ? h : -h;
            (col == 0 ? y.omega : y.beta) += step;
            const auto image = g_step(y, p);
            if (!image || image->m != centre->m)
                throw DegenerateError(fmt::format("dg_numeric: stencil at (omega={}, beta={}) changes return time", x.omega, x.beta));
            ends[side] = image->end;
        }
        j(0, col) = wrap_angle(ends[0].omega - ends[1].omega) / (2.0 * h);
        j(1, col) = (ends[0].beta - ends[1].beta) / (2.0 * h);
    }
    return j;
}

Eigen::Matrix2d dg_inverse_by_reversibility(const ReturnRecord& rec, const Params& p) {
    const ReturnRecord back = g_map(involution(rec.end), p);
    const Eigen::Matrix2d r = Eigen::Vector2d(1.0, -1.0).asDiagonal();
    return r * dg_analytic(back, p).matrix() * r;
}

Eigen::Matrix2d dg_orbit_product(const InnerState& x, const Params& p, int steps) {
    Eigen::Matrix2d prod = Eigen::Matrix2d::Identity();
    InnerState y = x;
    for (int i = 0; i < steps; ++i) {
        const ReturnRecord rec = g_map(y, p);
        prod = dg_analytic(rec, p).matrix() * prod;
        y = rec.end;
    }
    return prod;
}

const char* to_string(Stability s) noexcept {
    switch (s) {
    case Stability::elliptic: return "elliptic";
    case Stability::parabolic: return "parabolic";
    case Stability::hyperbolic: return "hyperbolic";
    }
    return "unknown";
}

Stability classify_trace(double trace) noexcept {
    const double gap = std::abs(trace) - 2.0;
    if (std::abs(gap) <= kParabolicTolerance) return Stability::parabolic;
    return gap < 0 ? Stability::elliptic : Stability::hyperbolic;
}

StabilityReport fixed_point_stability(FixedPoint which, const Params& p) {
    require_omega(p);
    const InnerState x{which == FixedPoint::center ? 0.0 : pi, 0.0};
    const double trace = dg_analytic(g_map(x, p), p).trace();
    return {classify_trace(trace), trace};
}

double center_trace_closed_form(double delta, double r) noexcept {
    return 2.0 + 4.0 * delta - 4.0 * delta * (1.0 + delta) / r;
}

} // namespace annulus
