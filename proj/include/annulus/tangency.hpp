#pragma once

#include "annulus/cones.hpp"
#include "annulus/core.hpp"
#include "annulus/normal.hpp"
#include "annulus/polyline.hpp"
#include "annulus/strata.hpp"

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <vector>

namespace annulus {

// Length of the linear seed segment after the first growth round, in units of the seed direction.
inline constexpr double kManifoldReach = 3.0;
// Bisection tolerance in the seed parameter for the ends of a manifold arc.
inline constexpr double kManifoldEndTolerance = 1e-15;
// An arc end with |beta| above pi/2 minus this counts as reaching dM_inn.
inline constexpr double kBoundaryReach = 1e-4;
// Agreement required between R(W^s) and an independently grown W^u.
inline constexpr double kReversibilityTolerance = 1e-6;
// Bisection tolerance on r for the tangency parameter.
inline constexpr double kTangencyRTolerance = 1e-10;
// Quadratic contact requires |d^2 beta / d omega^2| >= kContactRatio / (branch length).
inline constexpr double kContactRatio = 1e-4;
// Offset in omega of the finite-difference stencil of the contact certificate.
inline constexpr double kContactStencil = 1e-3;
// Largest distance between W^s and R(W^s) accepted at a tangency.
inline constexpr double kTangencyDistance = 1e-6;
// Roots of the tangent return time within this distance of the tangent normal belong to its cluster.
inline constexpr double kTildeCluster = 0.35;
// Seed-parameter samples used to locate the branch inside the tilde neighbourhood.
inline constexpr int kBranchScan = 6001;
// Smallest |D0| accepted by the tangency-curve expansion.
inline constexpr double kDegenerateD0 = 1e-6;

enum class ManifoldSide { stable, unstable };

const char* to_string(ManifoldSide s) noexcept;

// Period-2 symmetric orbit (omega, 0) -> (omega_hat, 0) of a normal point; throws ConstructionError when the orbit
// does not survive at this r.
SymmetricPeriodicPoint symmetric_point_from_normal(const NormalPoint& a, const Params& p);

struct ManifoldOptions {
    int initial = 257;    // seed-parameter samples before adaptive refinement
    int max_depth = 18;   // adaptive refinement depth
    int max_rounds = 6;   // growth rounds (one period each) before giving up on reaching singularities
};

struct ManifoldCurve {
    ManifoldSide side = ManifoldSide::stable;
    InnerState base;
    Params params;
    Polyline polyline;
    double eigenvalue = 0;              // of the period product along this side
    Eigen::Vector2d eigenvector{0, 0};  // unit, first component >= 0
    double epsilon = 0;                 // seed half-length
    int steps = 0;                      // G-steps applied to the seed
    bool reaches_boundary = false;      // both ends on dM_inn
    bool truncated = false;             // an end stopped on a singular curve inside M_inn
    double slope_min = 0;
    double slope_max = 0;
};

// Local stable (backward growth) or unstable (forward growth) manifold of a hyperbolic symmetric periodic point,
// grown from its eigendirection until both ends stop on dM_inn or a singular curve.
ManifoldCurve local_manifold(const SymmetricPeriodicPoint& z, ManifoldSide side, const ManifoldOptions& opt = {});

// Segments inside H- (stable) or H+ (unstable) whose slope leaves the band of b.
int slope_violations(const ManifoldCurve& c, const SlopeBounds& b);

// Largest distance of a vertex of the curve to the line omega + beta = limit (stable) or omega - beta = limit.
double limit_line_distance(const ManifoldCurve& c, double limit);

struct GammaSample {
    double t = 0;
    double delta = 0;
    double r = 0;
};

struct TangencyCurve {
    Rational pq;
    int m = 0;
    double anchor_omega = 0;
    double delta0 = 0;
    double d0 = 0;
    std::vector<GammaSample> samples;  // inside Omega with r > 0
};

// Leading-order curve of quadratic tangencies near (delta0, 0), delta0 = sin(p pi / q), for the tangent normal of
// return time m and the transverse normal at anchor_omega.
TangencyCurve gamma_curve(Rational pq, int m, double anchor_omega, const std::vector<double>& t_grid);

// r on the tangency curve where delta - delta0 = d_delta, taking the branch with r > 0.
double gamma_prediction(Rational pq, int m, double anchor_omega, double d_delta);

// Neighbourhood of the tangent normal: return time m and |wrap(omega + beta - psi)| < window.
struct TildeNeighbourhood {
    int m = 0;
    double psi = 0;
    double window = 0;
};

TildeNeighbourhood tilde_neighbourhood(const NormalPoint& tangent, const Params& p);

bool in_tilde(const InnerState& x, const TildeNeighbourhood& n, const Params& p);

struct TangencyBranch {
    Params params;
    TildeNeighbourhood tilde;
    Polyline polyline;                 // G^{-1} of the stable arc, inside the tilde neighbourhood
    double min_beta = 0;               // signed minimum of beta: g(r)
    InnerState min_point;
    int l0_crossings = 0;
    bool gate_ok = false;              // the stable arc that is pulled back stays off L0
    std::function<std::optional<InnerState>(double)> curve;  // seed parameter -> branch point
    double u_min = 0;                  // parameter of min_point
    double u_lo = 0, u_hi = 0;         // parameter range of the branch
};

// Throws ConstructionError when the stable arc has no piece pulled into the neighbourhood.
TangencyBranch tangency_branch(const NormalPoint& anchor, const NormalPoint& tangent, const Params& p);

struct ContactCertificate {
    double second_derivative = 0;  // d^2 beta / d omega^2 at the minimum
    double scale = 0;              // 1 / branch length
    bool quadratic = false;
};

// Three-point second divided difference of beta over omega at u_star, offsets chosen to move omega by about h.
ContactCertificate contact_certificate(const std::function<std::optional<InnerState>(double)>& curve, double u_star,
                                       double h, double length);

struct TangencyRequest {
    double delta = 0;
    NormalPoint anchor;   // transverse normal whose period-2 orbit carries W^s
    NormalPoint tangent;  // tangent normal at delta0
    Rational pq;
    double r_lo = 0;
    double r_hi = 0;
};

struct TangencyReport {
    double r_star = 0;
    double g_lo = 0;
    double g_hi = 0;
    int iterations = 0;
    InnerState point;
    bool in_tilde = false;
    bool gate_ok = false;
    ContactCertificate contact;
    int crossings_below = 0;  // at 0.8 r_star
    int crossings_above = 0;  // at 1.2 r_star
    double ws_rws_distance = 0;
    double gamma_r = 0;       // tangency-curve prediction at the same delta
    double relative_error = 0;
};

// Bisection of g(r) = min beta of the branch; throws ConstructionError when g does not change sign on the bracket.
TangencyReport find_tangency_r(const TangencyRequest& req);

} // namespace annulus
