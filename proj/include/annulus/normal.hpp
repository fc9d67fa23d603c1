#pragma once

#include "annulus/core.hpp"

#include <optional>
#include <vector>

namespace annulus {

// Bracketing panels per (m, scan) in the normal-point search.
inline constexpr int kNormalPanels = 20000;
// Bisection stops once the bracket is this narrow.
inline constexpr double kNormalBisectionTolerance = 1e-13;
// Roots closer than this are merged.
inline constexpr double kNormalDedup = 1e-9;
// Tangency criterion threshold: min(|cos w|, |delta cos w / cos th + 1/(m+1)|).
inline constexpr double kTangencyThreshold = 1e-9;
// Margins in this band around the threshold are flagged borderline.
inline constexpr double kBorderlineLow = 1e-11;
inline constexpr double kBorderlineHigh = 1e-7;
// Intermediate chords must keep |sin th + delta sin(th - s_k)| above this.
inline constexpr double kClearanceMargin = 1e-9;
// Residual bound for the closure of a rational candidate.
inline constexpr double kRationalResidual = 1e-10;

struct Rational {
    int p = 1;
    int q = 2;
    double value() const { return static_cast<double>(p) / q; }
};

enum class NormalKind { transverse, tangent };

const char* to_string(NormalKind k) noexcept;

// Orbit leaving the obstacle orthogonally at omega and returning orthogonally at omega_hat.
struct NormalPoint {
    double omega = 0;
    double theta = 0;
    int m = 0;
    NormalKind kind = NormalKind::transverse;
    double delta = 0;
    double omega_hat = 0;
    double tangency_margin = 0;
    bool borderline = false;
    // Smallest |sin th + delta sin(th - s_k)| over intermediate chords; the orbit survives for r below it.
    double clearance = 0;
};

// sin th - delta sin w with th = asin(delta sin w) is identically zero; this is the second equation.
double normal_residual(double omega, int m, double delta);

struct NormalResiduals {
    double first = 0;
    double second = 0;
};

NormalResiduals normal_system_residuals(const NormalPoint& x);

// Completes omega, theta and m into a NormalPoint (kind, image, clearance) without any check.
NormalPoint classify_normal(double omega, double theta, int m, double delta);

std::optional<NormalPoint> normal_from_rational(Rational pq, int m, double delta);

std::vector<NormalPoint> find_normals(double delta, int m_max, unsigned workers = 1);

struct FamilyOptions {
    // Target for the largest gap, as a fraction of pi - 2 asin(delta).
    double gap_fraction = 0.5;
};

struct NormalFamily {
    double delta = 0;
    std::vector<NormalPoint> points;  // sorted by omega in (-pi, pi]
    double d = 0;                     // largest gap within the components of L0 in H-
    int n = 0;
    double gap_bound = 0;             // pi - 2 asin(delta)
    int m_used = 0;
};

// Largest gap between consecutive members (and component endpoints) along |sin w| < delta.
double family_gap(const std::vector<NormalPoint>& points, double delta);

// Throws ConstructionError when the gap target is not met with return times up to m_max.
NormalFamily build_X(double delta, int m_max, const FamilyOptions& opt = {});

struct UnfoldingRoot {
    double phi = 0;
    double theta = 0;
    double dphi = 0;  // phi - pi/2
};

// sin phi - sin(phi + 2(m+1) asin(delta sin phi)).
double unfolding_residual(double phi, int m, double delta);

// Half-width of the window around pi/2 that excludes the unrelated roots at delta0.
double unfolding_window(Rational pq, int m);

std::vector<UnfoldingRoot> cubic_unfolding_roots(Rational pq, int m, double d_delta);

} // namespace annulus
