#pragma once

#include "annulus/core.hpp"
#include "annulus/flight.hpp"

#include <Eigen/Core>

namespace annulus {

// Threshold below which cos(beta1) or cos(theta) is treated as a grazing denominator.
inline constexpr double kDegenerateCosine = 1e-12;
// Outer hits of one record must share theta to this accuracy.
inline constexpr double kThetaConsistency = 1e-12;
// |trace| within this distance of 2 is classified parabolic.
inline constexpr double kParabolicTolerance = 1e-9;

// DG = [[a11, a12], [a21, a22]] in the (omega, beta) coordinates.
struct JacobianTerms {
    double a11 = 0, a12 = 0, a21 = 0, a22 = 0;
    double atilde11 = 0, atilde22 = 0, atilde12 = 0;
    double zeta0 = 0, zeta1 = 0;
    int m = 0;
    double phi0 = 0, phi1 = 0;
    double theta = 0;
    double beta0 = 0, beta1 = 0;

    Eigen::Matrix2d matrix() const;
    // a11 a22 - a12 a21 expanded through the decomposition in extended precision.
    double determinant = 0;

    double det() const { return determinant; }
    double trace() const { return a11 + a22; }
};

JacobianTerms dg_analytic(const ReturnRecord& rec, const Params& p);

// Central differences of G with step h; throws DegenerateError if the stencil changes return time.
Eigen::Matrix2d dg_numeric(const InnerState& x, const Params& p, double h = 1e-6);

// R DG(R G x) R, the analytic inverse of DG(x) by reversibility.
Eigen::Matrix2d dg_inverse_by_reversibility(const ReturnRecord& rec, const Params& p);

// Product of DG along a G-orbit of the given length; throws if the orbit fails to return.
Eigen::Matrix2d dg_orbit_product(const InnerState& x, const Params& p, int steps);

enum class FixedPoint { center, far };
enum class Stability { elliptic, parabolic, hyperbolic };

struct StabilityReport {
    Stability kind = Stability::elliptic;
    double trace = 0.0;
};

const char* to_string(Stability s) noexcept;
Stability classify_trace(double trace) noexcept;

// Requires p in Omega.
StabilityReport fixed_point_stability(FixedPoint which, const Params& p);

// trace DG at (0, 0): 2 + 4 delta - 4 delta (1 + delta) / r.
double center_trace_closed_form(double delta, double r) noexcept;

} // namespace annulus
