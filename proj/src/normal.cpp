#include "annulus/normal.hpp"

#include "annulus/errors.hpp"
#include "annulus/parallel.hpp"
#include "annulus/quad.hpp"
#include "annulus/roots.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <limits>

namespace annulus {

const char* to_string(NormalKind k) noexcept {
    return k == NormalKind::tangent ? "tangent" : "transverse";
}

namespace {

template <class Real>
Real normal_residual_t(Real omega, int m, Real delta) {
    using std::asin;
    using std::sin;
    const Real theta = asin(delta * sin(omega));
    return delta * sin(omega) - delta * sin(omega - (m + 1) * (pi_v<Real>() - 2 * theta));
}

template <class Real>
Real unfolding_residual_t(Real phi, int m, Real delta) {
    using std::asin;
    using std::sin;
    return sin(phi) - sin(phi + 2 * (m + 1) * asin(delta * sin(phi)));
}

// Degenerate (tangent) roots are flat to third order, so signs inside the bracket are taken in
// quadruple precision; otherwise double rounding hides the root within ~1e-5.
template <class F, class G>
std::vector<double> refined_roots(F&& coarse, G&& quad_residual, double lo, double hi) {
    auto fine = [&](double x) {
        const Quad v = quad_residual(Quad(x));
        return v < 0 ? -1.0 : (v > 0 ? 1.0 : 0.0);
    };
    std::vector<double> roots;
    double a = lo;
    double fa = coarse(a);
    for (int i = 1; i <= kNormalPanels; ++i) {
        const double b = lo + (hi - lo) * i / kNormalPanels;
        const double fb = coarse(b);
        if (fa == 0.0)
            roots.push_back(a);
        else if (fb != 0.0 && std::signbit(fa) != std::signbit(fb))
            roots.push_back(bisect_root(fine, a, b, kNormalBisectionTolerance));
        a = b;
        fa = fb;
    }
    return roots;
}

} // namespace

double normal_residual(double omega, int m, double delta) {
    return normal_residual_t(omega, m, delta);
}

NormalResiduals normal_system_residuals(const NormalPoint& x) {
    return {std::sin(x.theta) - x.delta * std::sin(x.omega),
            std::sin(x.theta) - x.delta * std::sin(x.omega - (x.m + 1) * (pi - 2.0 * x.theta))};
}

NormalPoint classify_normal(double omega, double theta, int m, double delta) {
    NormalPoint x;
    x.omega = wrap_angle(omega);
    x.theta = theta;
    x.m = m;
    x.delta = delta;
    const double rotation = pi - 2.0 * theta;
    const double s0 = -omega - theta;
    x.omega_hat = wrap_angle(theta - (s0 + m * rotation));
    x.clearance = std::numeric_limits<double>::infinity();
    for (int k = 0; k < m; ++k)
        x.clearance = std::min(x.clearance, std::abs(std::sin(theta) + delta * std::sin(theta - s0 - k * rotation)));
    x.tangency_margin = std::min(std::abs(std::cos(omega)),
                                 std::abs(delta * std::cos(omega) / std::cos(theta) + 1.0 / (m + 1)));
    x.kind = x.tangency_margin <= kTangencyThreshold ? NormalKind::tangent : NormalKind::transverse;
    x.borderline = x.tangency_margin > kBorderlineLow && x.tangency_margin < kBorderlineHigh;
    return x;
}

std::optional<NormalPoint> normal_from_rational(Rational pq, int m, double delta) {
    if (pq.q <= 0 || pq.p <= 0 || pq.p >= pq.q) throw PreconditionError("p/q must lie in (0, 1)");
    const double theta = -pq.value() * pi;
    const double ratio = std::sin(theta) / delta;
    if (std::abs(ratio) > 1.0 + 1e-15) return std::nullopt;
    const double w = std::asin(std::clamp(ratio, -1.0, 1.0));
    for (double omega : {w, pi - w}) {
        NormalPoint x = classify_normal(omega, theta, m, delta);
        const NormalResiduals res = normal_system_residuals(x);
        if (std::abs(res.first) <= kRationalResidual && std::abs(res.second) <= kRationalResidual &&
            x.clearance > kClearanceMargin)
            return x;
    }
    return std::nullopt;
}

namespace {

std::vector<NormalPoint> normals_for_m(double delta, int m) {
    auto f = [=](double w) { return normal_residual_t(w, m, delta); };
    auto fq = [=](Quad w) { return normal_residual_t(w, m, Quad(delta)); };
    // Offset the scan so that the period-2 roots at 0 and pi fall inside panels.
    const double shift = 0.37 * 2.0 * pi / kNormalPanels;
    std::vector<double> roots = refined_roots(f, fq, -pi + shift, pi + shift);
    std::vector<NormalPoint> out;
    for (double w : roots) {
        const NormalPoint x = classify_normal(w, std::asin(delta * std::sin(w)), m, delta);
        if (x.clearance <= kClearanceMargin) continue;
        const bool duplicate = std::any_of(out.begin(), out.end(), [&](const NormalPoint& y) {
            return circular_distance(y.omega, x.omega) < kNormalDedup;
        });
        if (!duplicate) out.push_back(x);
    }
    std::sort(out.begin(), out.end(), [](const NormalPoint& a, const NormalPoint& b) { return a.omega < b.omega; });
    return out;
}

} // namespace

std::vector<NormalPoint> find_normals(double delta, int m_max, unsigned workers) {
    if (!(delta > 0.0 && delta < 1.0)) throw PreconditionError("delta must lie in (0, 1)");
    if (m_max < 0) throw PreconditionError("m_max must be non-negative");
    std::vector<std::vector<NormalPoint>> per_m(static_cast<std::size_t>(m_max) + 1);
    parallel_for(per_m.size(), workers, [&](std::size_t m) { per_m[m] = normals_for_m(delta, static_cast<int>(m)); });
    std::vector<NormalPoint> out;
    for (auto& v : per_m) out.insert(out.end(), v.begin(), v.end());
    return out;
}

double family_gap(const std::vector<NormalPoint>& points, double delta) {
    const double half = std::asin(delta);
    double worst = 0.0;
    for (double centre : {0.0, pi}) {
        std::vector<double> offsets{-half, half};
        for (const NormalPoint& x : points) {
            const double o = wrap_angle(x.omega - centre);
            if (std::abs(o) < half) offsets.push_back(o);
        }
        std::sort(offsets.begin(), offsets.end());
        for (std::size_t i = 1; i < offsets.size(); ++i) worst = std::max(worst, offsets[i] - offsets[i - 1]);
    }
    return worst;
}

NormalFamily build_X(double delta, int m_max, const FamilyOptions& opt) {
    NormalFamily fam;
    fam.delta = delta;
    fam.gap_bound = pi - 2.0 * std::asin(delta);
    const double target = opt.gap_fraction * fam.gap_bound;
    const std::vector<NormalPoint> all = find_normals(delta, m_max);
    auto admissible = [&](const NormalPoint& x) {
        return x.kind == NormalKind::transverse && !x.borderline && std::abs(std::sin(x.omega)) < delta;
    };
    for (int m = 0; m <= m_max; ++m) {
        for (const NormalPoint& x : all)
            if (x.m == m && admissible(x)) fam.points.push_back(x);
        // Close under the return image; members of one m are their own images up to root accuracy.
        for (const NormalPoint& x : all) {
            if (x.m != m || !admissible(x)) continue;
            const bool present = std::any_of(fam.points.begin(), fam.points.end(), [&](const NormalPoint& y) {
                return circular_distance(y.omega, x.omega_hat) < 1e-8;
            });
            if (!present) throw ConstructionError(fmt::format("return image {} of normal point {} missing", x.omega_hat, x.omega));
        }
        fam.d = family_gap(fam.points, delta);
        if (fam.d < target) {
            fam.m_used = m;
            break;
        }
    }
    if (!(fam.d < target))
        throw ConstructionError(fmt::format("spacing {} not attainable with m <= {} (target {})", fam.d, m_max, target));
    std::sort(fam.points.begin(), fam.points.end(),
              [](const NormalPoint& a, const NormalPoint& b) { return a.omega < b.omega; });
    fam.n = static_cast<int>(fam.points.size());
    return fam;
}

double unfolding_residual(double phi, int m, double delta) {
    return unfolding_residual_t(phi, m, delta);
}

namespace {

// Maximum half-width of the unfolding window.
constexpr double kUnfoldingWindowMax = 0.5;
// Roots closer than this to pi/2 at delta0 belong to the degenerate root itself.
constexpr double kDegenerateRootRadius = 1e-3;

void require_unfolding(Rational pq, int m) {
    if (pq.q <= 0 || pq.p <= 0 || pq.p >= pq.q) throw PreconditionError("p/q must lie in (0, 1)");
    if (((m + 1) * pq.p) % pq.q != 0) throw PreconditionError("(m+1) p/q must be an integer");
}

} // namespace

double unfolding_window(Rational pq, int m) {
    require_unfolding(pq, m);
    const double delta0 = std::sin(pq.value() * pi);
    const Quad delta0_q = sin(pq.value() * pi_v<Quad>());
    auto f = [=](double phi) { return unfolding_residual_t(phi, m, delta0); };
    auto fq = [=](Quad phi) { return unfolding_residual_t(phi, m, delta0_q); };
    double window = kUnfoldingWindowMax;
    for (double phi : refined_roots(f, fq, pi / 2 - kUnfoldingWindowMax, pi / 2 + kUnfoldingWindowMax)) {
        const double dist = std::abs(phi - pi / 2);
        if (dist > kDegenerateRootRadius) window = std::min(window, 0.5 * dist);
    }
    return window;
}

std::vector<UnfoldingRoot> cubic_unfolding_roots(Rational pq, int m, double d_delta) {
    require_unfolding(pq, m);
    if (std::abs(d_delta) > 0.05) throw PreconditionError("|d_delta| must not exceed 0.05");
    const double delta = std::sin(pq.value() * pi) + d_delta;
    const double window = unfolding_window(pq, m);
    const Quad delta_q = sin(pq.value() * pi_v<Quad>()) + Quad(d_delta);
    auto f = [=](double phi) { return unfolding_residual_t(phi, m, delta); };
    auto fq = [=](Quad phi) { return unfolding_residual_t(phi, m, delta_q); };
    std::vector<UnfoldingRoot> out;
    for (double phi : refined_roots(f, fq, pi / 2 - window, pi / 2 + window)) {
        if (!out.empty() && phi - out.back().phi < kNormalDedup) continue;
        out.push_back({phi, -std::asin(delta * std::sin(phi)), phi - pi / 2});
    }
    return out;
}

} // namespace annulus
