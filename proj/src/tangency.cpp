#include "annulus/tangency.hpp"

#include "annulus/errors.hpp"
#include "annulus/flight.hpp"
#include "annulus/linearize.hpp"
#include "annulus/quad.hpp"

#include <boost/math/tools/minima.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace annulus {

const char* to_string(ManifoldSide s) noexcept {
    return s == ManifoldSide::stable ? "stable" : "unstable";
}

namespace {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();
// Uniform probes of the seed parameter before bisecting an arc end.
constexpr int kEndScan = 512;
// Below this seed half-length the seed is formed and iterated in Quad.
constexpr double kQuadSeed = 1e-5;
// Offset in the seed parameter for the derivative estimate of the contact stencil.
constexpr double kDerivativeProbe = 1e-8;

using CurveFn = std::function<std::optional<InnerState>(double)>;

// Seed parameter u in [-1, 1] -> F^steps(base + epsilon u v), with the return times of the base orbit enforced.
template <class Real>
CurveFn make_growth(const InnerState& base, const Eigen::Vector2d& v, double epsilon, std::vector<int> times,
                    bool backward, const Params& p) {
    return [=](double u) -> std::optional<InnerState> {
        const Real s = Real(epsilon) * Real(u);
        BasicInnerState<Real> x{Real(base.omega) + s * Real(v[0]), Real(base.beta) + s * Real(v[1])};
        for (int m : times) {
            const auto st = backward ? g_inverse(x, p, kStripStepBudget) : g_step(x, p, kStripStepBudget);
            if (!st || st->m != m) return std::nullopt;
            x = st->end;
        }
        return state_cast<double>(x);
    };
}

struct Growth {
    CurveFn curve;
    double u_lo = 0, u_hi = 0;
    bool open_lo = false, open_hi = false;  // the arc did not stop before the seed ran out
    double eigenvalue = 0;
    Eigen::Vector2d eigenvector{0, 0};
    double epsilon = 0;
    int steps = 0;
};

double arc_end(const CurveFn& f, double sign, bool& open) {
    double good = 0;
    for (int k = 1; k <= kEndScan; ++k) {
        const double u = sign * static_cast<double>(k) / kEndScan;
        if (f(u)) {
            good = u;
            continue;
        }
        double bad = u;
        while (std::abs(bad - good) > kManifoldEndTolerance) {
            const double mid = 0.5 * (good + bad);
            (f(mid) ? good : bad) = mid;
        }
        open = false;
        return good;
    }
    open = true;
    return good;
}

Growth grow(const SymmetricPeriodicPoint& z, ManifoldSide side, int max_rounds) {
    const Params& p = z.params;
    const int period = static_cast<int>(z.orbit.size());
    if (period == 0) throw PreconditionError("periodic point without orbit");
    std::vector<int> forward(period);
    Eigen::Matrix2d product = Eigen::Matrix2d::Identity();
    for (int j = 0; j < period; ++j) {
        const ReturnRecord rec = g_map(z.orbit[j], p, kStripStepBudget);
        forward[j] = rec.m;
        product = dg_analytic(rec, p).matrix() * product;
    }
    const double tr = product.trace();
    const double det = product.determinant();
    const double disc = tr * tr - 4 * det;
    if (!(disc > 0) || std::abs(tr) <= 2 + kParabolicTolerance)
        throw PreconditionError(fmt::format("periodic point is not hyperbolic (trace {})", tr));
    const double root = std::sqrt(disc);
    const double large = 0.5 * (tr + std::copysign(root, tr));
    const double small = det / large;
    const double lambda = side == ManifoldSide::stable ? small : large;
    Eigen::Vector2d a{product(0, 1), lambda - product(0, 0)};
    Eigen::Vector2d b{lambda - product(1, 1), product(1, 0)};
    Eigen::Vector2d v = a.norm() > b.norm() ? a : b;
    v.normalize();
    if (v[0] < 0) v = -v;

    const bool backward = side == ManifoldSide::stable;
    Growth g;
    g.eigenvalue = lambda;
    g.eigenvector = v;
    for (int n = 1; n <= max_rounds; ++n) {
        std::vector<int> times;
        for (int k = 0; k < n * period; ++k) {
            const int j = backward ? ((-k - 1) % period + period) % period : k % period;
            times.push_back(forward[j]);
        }
        g.epsilon = kManifoldReach * std::pow(std::abs(small), n);
        g.steps = n * period;
        g.curve = g.epsilon < kQuadSeed ? make_growth<Quad>(z.state, v, g.epsilon, times, backward, p)
                                        : make_growth<double>(z.state, v, g.epsilon, times, backward, p);
        g.u_hi = arc_end(g.curve, 1.0, g.open_hi);
        g.u_lo = arc_end(g.curve, -1.0, g.open_lo);
        if (!g.open_lo && !g.open_hi) break;
    }
    return g;
}

InnerState or_nan(const std::optional<InnerState>& x) {
    return x ? *x : InnerState{nan, nan};
}

bool reaches(const InnerState& x) {
    return std::abs(x.beta) >= pi / 2 - kBoundaryReach;
}

double brent_min(const std::function<double(double)>& f, double lo, double hi) {
    const auto res = boost::math::tools::brent_find_minima(f, lo, hi, std::numeric_limits<double>::digits);
    return res.first;
}

} // namespace

SymmetricPeriodicPoint symmetric_point_from_normal(const NormalPoint& a, const Params& p) {
    require_omega(p);
    const InnerState x0{a.omega, 0.0};
    const auto st = g_step(x0, p, kStripStepBudget);
    if (!st || st->m != a.m || std::abs(st->end.beta) > kSymmetricClosure ||
        circular_distance(st->end.omega, a.omega_hat) > kSymmetricClosure)
        throw ConstructionError(fmt::format("normal orbit at omega {} does not survive at r = {}", a.omega, p.r));
    SymmetricPeriodicPoint out;
    out.state = x0;
    out.period = 2;
    out.params = p;
    out.closure = std::abs(st->end.beta);
    out.orbit = {x0, st->end};
    out.itinerary_ok = true;
    const RegionSet regions(p);
    out.in_h_minus = regions.in_h_minus(out.orbit[0]) && regions.in_h_minus(out.orbit[1]);
    Eigen::Matrix2d product = Eigen::Matrix2d::Identity();
    for (const InnerState& x : out.orbit) product = dg_analytic(g_map(x, p, kStripStepBudget), p).matrix() * product;
    out.trace = product.trace();
    return out;
}

ManifoldCurve local_manifold(const SymmetricPeriodicPoint& z, ManifoldSide side, const ManifoldOptions& opt) {
    const Growth g = grow(z, side, opt.max_rounds);
    if (g.open_lo || g.open_hi)
        throw ConstructionError(fmt::format("{} manifold did not stop within {} rounds", to_string(side), opt.max_rounds));
    auto f = [&](double u) { return or_nan(g.curve(u)); };
    const int half = std::max(2, opt.initial / 2);
    Polyline lo = sample_adaptive(f, g.u_lo, 0.0, half, opt.max_depth);
    Polyline hi = sample_adaptive(f, 0.0, g.u_hi, half, opt.max_depth);
    std::vector<InnerState> pts = lo.points;
    if (!pts.empty()) pts.pop_back();
    pts.insert(pts.end(), hi.points.begin(), hi.points.end());

    ManifoldCurve c;
    c.side = side;
    c.base = z.state;
    c.params = z.params;
    c.polyline = make_continuous(std::move(pts));
    c.eigenvalue = g.eigenvalue;
    c.eigenvector = g.eigenvector;
    c.epsilon = g.epsilon;
    c.steps = g.steps;
    c.reaches_boundary = c.polyline.size() >= 2 && reaches(c.polyline.points.front()) && reaches(c.polyline.points.back());
    c.truncated = !c.reaches_boundary;
    const auto slopes = segment_slopes(c.polyline);
    if (!slopes.empty()) {
        c.slope_min = *std::min_element(slopes.begin(), slopes.end());
        c.slope_max = *std::max_element(slopes.begin(), slopes.end());
    }
    return c;
}

int slope_violations(const ManifoldCurve& c, const SlopeBounds& b) {
    const RegionSet regions(c.params);
    const auto slopes = segment_slopes(c.polyline);
    int bad = 0;
    for (std::size_t i = 0; i < slopes.size(); ++i) {
        const InnerState& a = c.polyline.points[i];
        const InnerState& e = c.polyline.points[i + 1];
        const InnerState mid{wrap_angle(0.5 * (a.omega + e.omega)), 0.5 * (a.beta + e.beta)};
        if (c.side == ManifoldSide::stable) {
            if (regions.in_h_minus(mid) && !in_stable_band(slopes[i], b)) ++bad;
        } else {
            if (regions.in_h_plus(mid) && !in_unstable_band(slopes[i], b)) ++bad;
        }
    }
    return bad;
}

double limit_line_distance(const ManifoldCurve& c, double limit) {
    double worst = 0;
    for (const InnerState& x : c.polyline.points) {
        const double along = c.side == ManifoldSide::stable ? x.omega + x.beta : x.omega - x.beta;
        worst = std::max(worst, std::abs(wrap_angle(along - limit)) / std::sqrt(2.0));
    }
    return worst;
}

namespace {

double gamma_d0(Rational pq, int m, double anchor_omega) {
    if (pq.q <= 0 || pq.p <= 0 || 2 * pq.p >= pq.q) throw PreconditionError("p/q must lie in (0, 1/2)");
    if (m < 0 || ((m + 1) * pq.p) % pq.q != 0) throw PreconditionError("(m + 1) p / q must be an integer");
    const double d0 = std::sin((anchor_omega + pi / 2) / 2 - (m + 1) * pq.value() * pi + m * pi / 2);
    if (std::abs(d0) < kDegenerateD0) throw DegenerateError(fmt::format("|D0| = {} is below {}", std::abs(d0), kDegenerateD0));
    return d0;
}

double gamma_r(Rational pq, int m, double d0, double t) {
    return 2 * (m + 1) * std::tan(pq.value() * pi) / (-d0) * t * t * t;
}

} // namespace

TangencyCurve gamma_curve(Rational pq, int m, double anchor_omega, const std::vector<double>& t_grid) {
    TangencyCurve c;
    c.pq = pq;
    c.m = m;
    c.anchor_omega = anchor_omega;
    c.d0 = gamma_d0(pq, m, anchor_omega);
    c.delta0 = std::sin(pq.value() * pi);
    for (double t : t_grid) {
        const GammaSample s{t, c.delta0 + 1.5 * c.delta0 * t * t, gamma_r(pq, m, c.d0, t)};
        if (s.r > 0 && in_omega({s.delta, s.r})) c.samples.push_back(s);
    }
    return c;
}

double gamma_prediction(Rational pq, int m, double anchor_omega, double d_delta) {
    if (!(d_delta > 0)) throw PreconditionError("the tangency curve lies above delta0");
    const double d0 = gamma_d0(pq, m, anchor_omega);
    const double delta0 = std::sin(pq.value() * pi);
    const double t = std::sqrt(d_delta / (1.5 * delta0));
    return std::abs(gamma_r(pq, m, d0, t));
}

TildeNeighbourhood tilde_neighbourhood(const NormalPoint& tangent, const Params& p) {
    TildeNeighbourhood n;
    n.m = tangent.m;
    n.psi = tangent.omega;
    double edge = 0, outside = pi;
    for (double w : miss_zeros_on_l0(tangent.m, p)) {
        const double d = circular_distance(w, n.psi);
        if (d < kTildeCluster)
            edge = std::max(edge, d);
        else
            outside = std::min(outside, d);
    }
    n.window = 0.5 * (edge + outside);
    return n;
}

bool in_tilde(const InnerState& x, const TildeNeighbourhood& n, const Params& p) {
    if (std::abs(wrap_angle(x.omega + x.beta - n.psi)) >= n.window) return false;
    const auto st = g_step(x, p, kStripStepBudget);
    return st && st->m == n.m;
}

TangencyBranch tangency_branch(const NormalPoint& anchor, const NormalPoint& tangent, const Params& p) {
    const SymmetricPeriodicPoint z = symmetric_point_from_normal(anchor, p);
    const Growth g = grow(z, ManifoldSide::stable, ManifoldOptions{}.max_rounds);
    TangencyBranch b;
    b.params = p;
    b.tilde = tilde_neighbourhood(tangent, p);
    const TildeNeighbourhood tilde = b.tilde;
    const CurveFn stable = g.curve;
    b.curve = [=](double u) -> std::optional<InnerState> {
        const auto w = stable(u);
        if (!w) return std::nullopt;
        const auto st = g_inverse(*w, p, kStripStepBudget);
        if (!st || st->m != tilde.m || std::abs(wrap_angle(st->end.omega + st->end.beta - tilde.psi)) >= tilde.window)
            return std::nullopt;
        return st->end;
    };

    std::vector<double> us(kBranchScan);
    std::vector<std::optional<InnerState>> pts(kBranchScan);
    for (int k = 0; k < kBranchScan; ++k) {
        us[k] = g.u_lo + (g.u_hi - g.u_lo) * k / (kBranchScan - 1);
        pts[k] = b.curve(us[k]);
    }
    int best_start = -1, best_len = 0;
    for (int k = 0; k < kBranchScan;) {
        if (!pts[k]) {
            ++k;
            continue;
        }
        int e = k;
        while (e < kBranchScan && pts[e]) ++e;
        if (e - k > best_len) best_len = e - k, best_start = k;
        k = e;
    }
    if (best_len < 3) throw ConstructionError(fmt::format("stable arc is not pulled into the tangent neighbourhood at r = {}", p.r));
    const int first = best_start, last = best_start + best_len - 1;

    // The stable arc inside the unstable neighbourhood must stay on one side of L0.
    double lo_beta = std::numeric_limits<double>::infinity(), hi_beta = -lo_beta;
    for (int k = first; k <= last; ++k) {
        const double beta = stable(us[k])->beta;
        lo_beta = std::min(lo_beta, beta);
        hi_beta = std::max(hi_beta, beta);
    }
    b.gate_ok = lo_beta > 0 || hi_beta < 0;
    if (!b.gate_ok) throw ConstructionError("stable arc meets L0 before the pullback");

    auto refine = [&](double good, double bad) {
        while (std::abs(bad - good) > kManifoldEndTolerance) {
            const double mid = 0.5 * (good + bad);
            (b.curve(mid) ? good : bad) = mid;
        }
        return good;
    };
    b.u_lo = first > 0 ? refine(us[first], us[first - 1]) : us[first];
    b.u_hi = last + 1 < kBranchScan ? refine(us[last], us[last + 1]) : us[last];

    const CurveFn curve = b.curve;
    b.polyline = sample_adaptive([&](double u) { return or_nan(curve(u)); }, b.u_lo, b.u_hi, 257, 18);

    int kmin = first;
    for (int k = first; k <= last; ++k)
        if (pts[k]->beta < pts[kmin]->beta) kmin = k;
    const double a = std::max(b.u_lo, us[std::max(first, kmin - 1)]);
    const double e = std::min(b.u_hi, us[std::min(last, kmin + 1)]);
    auto beta_at = [&](double u) {
        const auto x = curve(u);
        return x ? x->beta : std::numeric_limits<double>::infinity();
    };
    b.u_min = brent_min(beta_at, a, e);
    b.min_point = *curve(b.u_min);
    b.min_beta = b.min_point.beta;
    for (const InnerState& x : b.polyline.points)
        if (x.beta < b.min_beta) b.min_beta = x.beta, b.min_point = x;
    for (std::size_t i = 0; i + 1 < b.polyline.size(); ++i)
        if (b.polyline.points[i].beta * b.polyline.points[i + 1].beta < 0) ++b.l0_crossings;
    return b;
}

ContactCertificate contact_certificate(const CurveFn& curve, double u_star, double h, double length) {
    ContactCertificate c;
    const auto x0 = curve(u_star);
    if (!x0 || !(length > 0)) throw PreconditionError("contact certificate needs a valid point and a positive length");
    double slope = 0;
    for (double eta = kDerivativeProbe; eta > 1e-14 && slope == 0; eta *= 0.1) {
        const auto a = curve(u_star - eta), b = curve(u_star + eta);
        if (a && b) slope = std::abs(wrap_angle(b->omega - a->omega)) / (2 * eta);
    }
    if (!(slope > 0)) throw DegenerateError("branch does not move in omega at the minimum");
    double step = h / slope;
    for (int attempt = 0; attempt < 40; ++attempt, step *= 0.5) {
        const auto a = curve(u_star - step), b = curve(u_star + step);
        if (!a || !b) continue;
        const double wa = x0->omega + wrap_angle(a->omega - x0->omega);
        const double wb = x0->omega + wrap_angle(b->omega - x0->omega);
        const double left = (x0->beta - a->beta) / (x0->omega - wa);
        const double right = (b->beta - x0->beta) / (wb - x0->omega);
        c.second_derivative = 2 * (right - left) / (wb - wa);
        c.scale = 1 / length;
        c.quadratic = std::abs(c.second_derivative) >= kContactRatio * c.scale;
        return c;
    }
    throw DegenerateError("no valid stencil around the minimum");
}

TangencyReport find_tangency_r(const TangencyRequest& req) {
    if (!(req.r_lo > 0 && req.r_lo < req.r_hi)) throw PreconditionError("need 0 < r_lo < r_hi");
    const Params plo{req.delta, req.r_lo}, phi{req.delta, req.r_hi};
    require_omega(plo);
    require_omega(phi);
    auto g = [&](double r) { return tangency_branch(req.anchor, req.tangent, {req.delta, r}).min_beta; };

    TangencyReport rep;
    rep.g_lo = g(req.r_lo);
    rep.g_hi = g(req.r_hi);
    if (!(rep.g_lo * rep.g_hi < 0))
        throw ConstructionError(fmt::format("g has no sign change on [{}, {}]: g = {}, {}", req.r_lo, req.r_hi, rep.g_lo, rep.g_hi));
    double lo = req.r_lo, hi = req.r_hi, glo = rep.g_lo;
    while (hi - lo > kTangencyRTolerance) {
        const double mid = 0.5 * (lo + hi);
        const double gm = g(mid);
        ++rep.iterations;
        if ((gm < 0) == (glo < 0))
            lo = mid, glo = gm;
        else
            hi = mid;
    }
    rep.r_star = 0.5 * (lo + hi);
    const Params p{req.delta, rep.r_star};
    const TangencyBranch b = tangency_branch(req.anchor, req.tangent, p);
    rep.point = b.min_point;
    rep.gate_ok = b.gate_ok;
    rep.in_tilde = in_tilde(b.min_point, b.tilde, p);
    rep.contact = contact_certificate(b.curve, b.u_min, kContactStencil, b.polyline.length());

    auto crossings = [&](double r) {
        try {
            return tangency_branch(req.anchor, req.tangent, {req.delta, r}).l0_crossings;
        } catch (const ConstructionError&) {
            return 0;
        }
    };
    rep.crossings_below = crossings(0.8 * rep.r_star);
    rep.crossings_above = crossings(1.2 * rep.r_star);

    const InnerState mirror = involution(b.min_point);
    const CurveFn curve = b.curve;
    auto dist = [&](double u) {
        const auto x = curve(u);
        return x ? std::hypot(wrap_angle(x->omega - mirror.omega), x->beta - mirror.beta) : std::numeric_limits<double>::infinity();
    };
    const double span = 0.05 * (b.u_hi - b.u_lo);
    const double u = brent_min(dist, std::max(b.u_lo, b.u_min - span), std::min(b.u_hi, b.u_min + span));
    rep.ws_rws_distance = std::min(dist(u), dist(b.u_min));

    rep.gamma_r = gamma_prediction(req.pq, req.tangent.m, req.anchor.omega, req.delta - std::sin(req.pq.value() * pi));
    rep.relative_error = std::abs(rep.r_star - rep.gamma_r) / rep.gamma_r;
    return rep;
}

} // namespace annulus
