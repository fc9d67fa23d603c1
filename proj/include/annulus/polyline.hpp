#pragma once

#include "annulus/core.hpp"

#include <functional>
#include <vector>

namespace annulus {

// Refinement limits for sampled curves in the (omega, beta) plane.
inline constexpr double kMaxTurning = 0.05;
inline constexpr double kMaxSegment = 0.02;

// Ordered curve in the inner cylinder. Omega is kept continuous along the curve (not wrapped).
struct Polyline {
    std::vector<InnerState> points;

    bool empty() const { return points.empty(); }
    std::size_t size() const { return points.size(); }
    double length() const;
    // Largest angle between consecutive segments.
    double max_turning() const;
    double max_segment() const;
};

// Unwraps omega so consecutive points differ by less than pi.
Polyline make_continuous(std::vector<InnerState> pts);

Polyline involution(const Polyline& c);

struct Intersection {
    InnerState point;
    double angle = 0;  // crossing angle in (0, pi/2]
};

// All transverse intersections on the cylinder, trying the 2 pi shifts of the second curve.
std::vector<Intersection> intersect(const Polyline& a, const Polyline& b);

// Symmetric Hausdorff distance on the cylinder, measured between vertices and segments.
double hausdorff(const Polyline& a, const Polyline& b);

// Distance on the cylinder from x to the curve.
double distance_to(const Polyline& c, const InnerState& x);

// Omega on the curve at height beta by linear interpolation; NaN when beta is outside its range.
double omega_at_beta(const Polyline& c, double beta);

// Samples t -> f(t) on [t0, t1], bisecting parameter intervals until turning and segment limits hold.
// Segments still too long at max_depth are reported in `gaps` (parameter of their left end).
Polyline sample_adaptive(const std::function<InnerState(double)>& f, double t0, double t1, int initial, int max_depth,
                         std::vector<double>* gaps = nullptr);

} // namespace annulus
