#pragma once

#include "annulus/cones.hpp"
#include "annulus/core.hpp"
#include "annulus/flight.hpp"
#include "annulus/normal.hpp"
#include "annulus/polyline.hpp"

#include <optional>
#include <string>
#include <vector>

namespace annulus {

// Bisection tolerance for boundary and periodic-point roots in omega.
inline constexpr double kStripRootTolerance = 1e-14;
// Required closure |beta(G^(k+1) z)| of a symmetric periodic point.
inline constexpr double kSymmetricClosure = 1e-8;
// Crossings with a smaller transverse angle are reported as ambiguous.
inline constexpr double kAmbiguousAngle = 1e-3;
// The four boundary hits of a crossing must lie within this multiple of the summed strip widths.
inline constexpr double kCellSpread = 10.0;
// Interior fraction of sigma probed when validating return times next to a boundary.
inline constexpr double kValidationSigma = 0.999;
// Outer-step budget for return-time probes inside strips.
inline constexpr std::int64_t kStripStepBudget = 10'000;
// Density grid resolution over the cylinder.
inline constexpr int kDensityGridOmega = 400;
inline constexpr int kDensityGridBeta = 200;

// Arrival miss of the m-th outgoing chord launched from x: sin th + delta sin(th - s_m), with (s0, th) = T(x) and
// s_m = s0 + m (pi - 2 th). Intermediate collisions are ignored. When the chord meets the obstacle,
// sin(beta_1) = -miss / r.
template <class Real>
Real miss_function(const BasicInnerState<Real>& x, int m, const Params& p) {
    using std::sin;
    const auto y = map_inner_to_outer(x, p);
    const Real sm = y.s + m * (pi_v<Real>() - 2 * y.theta);
    return sin(y.theta) + Real(p.delta) * sin(y.theta - sm);
}

// miss / r: the strip of a return time m is {|sigma| <= 1}.
template <class Real>
Real strip_sigma(const BasicInnerState<Real>& x, int m, const Params& p) {
    return miss_function(x, m, p) / Real(p.r);
}

// Zeros of the miss function of return time m along L0, in (-pi, pi].
std::vector<double> miss_zeros_on_l0(int m, const Params& p);

enum class CurveSide { preimage, image };

const char* to_string(CurveSide s) noexcept;

struct SingularCurve {
    Polyline polyline;
    CurveSide side = CurveSide::preimage;
    int component_id = 0;
    int m = 0;              // return time of the orbits grazing the obstacle along the curve
    double level = 0;       // miss value: +r or -r
    bool truncated = false; // pieces outside the band H- (H+ for images) or with a different return time were cut
};

struct SingularityOptions {
    int m_max = 4;
    int seeds = 64;  // initial beta samples per curve before adaptive refinement
    Gate gate = Gate::enforce;
};

// Pieces of G^{-1}(dM_inn) (preimage) or G(dM_inn) (image) with return time up to m_max, parameterized by beta and
// cut to the band H- (H+ for images) and to the validity region of their return time.
std::vector<SingularCurve> trace_singularity(const Params& p, CurveSide side, const SingularityOptions& opt = {});

// Slopes d beta / d omega of all segments.
std::vector<double> segment_slopes(const Polyline& c);

enum class StripKind { stable, unstable };

const char* to_string(StripKind k) noexcept;

struct Strip {
    StripKind kind = StripKind::stable;
    SingularCurve boundary_a;  // miss = +r
    SingularCurve boundary_b;  // miss = -r
    NormalPoint anchor;
    int anchor_index = 0;
    // Limit line omega + beta = limit (stable) or omega - beta = limit (unstable).
    double limit = 0;
    double max_width = 0;       // largest horizontal chord
    double limit_distance = 0;  // largest distance of a boundary vertex to the limit line
    double window = 0;          // half-width around the limit line that isolates this strip's miss zero
};

struct StripSet {
    Params params;
    std::vector<NormalPoint> anchors;
    std::vector<Strip> stable;    // S_i
    std::vector<Strip> unstable;  // U_i = G(S_i) = R(S_image[i])
    std::vector<int> image;       // index of omega_hat_i among the anchors
};

// Stable strip of one anchor; throws ConstructionError when the anchor is not enclosed at this r.
Strip build_stable_strip(const NormalFamily& family, int index, const Params& p, int seeds = 64);

// Requires p in Omega* unless gate is relaxed.
StripSet build_strips(const NormalFamily& family, const Params& p, Gate gate = Gate::enforce, unsigned workers = 1);

// Largest r = r_start / 2^k, k >= 0, at which the anchor's strip builds; empty if none above r_min.
std::optional<double> strip_threshold(const NormalFamily& family, int index, double r_start, double r_min);

// Closed-form membership in S_i: matching return time, |sigma| <= 1, within the strip's window.
bool in_stable_strip(const InnerState& x, const Strip& s, const Params& p);

enum class CrossState { crosses, disjoint, ambiguous };

const char* to_string(CrossState c) noexcept;

struct CrossingMatrix {
    int n = 0;
    std::vector<std::vector<bool>> cross;  // cross[i][j]: U_i crosses S_j
    std::vector<std::vector<CrossState>> state;
    std::vector<std::vector<InnerState>> centre;  // mean of the four boundary intersections
    std::vector<std::vector<double>> min_angle;
    std::vector<std::vector<int>> hits;           // number of boundary intersections found
};

CrossingMatrix crossing_matrix(const StripSet& strips, unsigned workers = 1);

// |wrap(omega_hat_i - omega_j - pi)| below the sum of the two strips' widths.
bool predicted_disjoint(const StripSet& strips, int i, int j);

bool strongly_connected(const CrossingMatrix& c);

// Cell centres of all crossing pairs.
std::vector<InnerState> lattice_nodes(const CrossingMatrix& c);

using Word = std::vector<int>;

bool admissible(const Word& w, const CrossingMatrix& c);

struct NestedWidth {
    Word word;
    double beta = 0;
    double width = 0;  // horizontal chord of S_w at this beta
};

// Horizontal chord at height beta of the nested strip {x in S_w0 : G^k x in S_wk, k < |w|}.
NestedWidth nested_width(const Word& w, const StripSet& strips, double beta);

struct SymmetricPeriodicPoint {
    Word word;
    InnerState state;
    int period = 0;  // in G-steps: 2 |word|
    Params params;
    double closure = 0;       // |beta(G^{|word|} state)|
    double trace = 0;         // trace of DG along the period
    std::vector<InnerState> orbit;
    bool itinerary_ok = false;
    bool in_h_minus = false;  // every orbit point
};

// Pullback of L0 through the word; throws ConstructionError when the word is not realized at this r.
SymmetricPeriodicPoint symmetric_periodic_from_word(const Word& w, const StripSet& strips);

// Max over a 400 x 200 grid of the cylinder of the distance to the nearest node.
double density_estimate(const std::vector<InnerState>& nodes, unsigned workers = 1);

} // namespace annulus
