#include "annulus/polyline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace annulus {

namespace {

struct P {
    double x, y;
};

P to_p(const InnerState& s) {
    return {s.omega, s.beta};
}

double seg_len(const InnerState& a, const InnerState& b) {
    return std::hypot(wrap_angle(b.omega - a.omega), b.beta - a.beta);
}

double turning(const InnerState& a, const InnerState& b, const InnerState& c) {
    const double ux = wrap_angle(b.omega - a.omega), uy = b.beta - a.beta;
    const double vx = wrap_angle(c.omega - b.omega), vy = c.beta - b.beta;
    return std::abs(std::atan2(ux * vy - uy * vx, ux * vx + uy * vy));
}

double point_segment_distance(P p, P a, P b) {
    const double dx = b.x - a.x, dy = b.y - a.y;
    const double len2 = dx * dx + dy * dy;
    double t = len2 > 0 ? ((p.x - a.x) * dx + (p.y - a.y) * dy) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return std::hypot(p.x - a.x - t * dx, p.y - a.y - t * dy);
}

void omega_range(const Polyline& c, double& lo, double& hi) {
    lo = std::numeric_limits<double>::infinity();
    hi = -lo;
    for (const auto& s : c.points) {
        lo = std::min(lo, s.omega);
        hi = std::max(hi, s.omega);
    }
}

double raw_distance(const Polyline& c, P p) {
    if (c.points.size() == 1) return std::hypot(p.x - c.points[0].omega, p.y - c.points[0].beta);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < c.points.size(); ++i)
        best = std::min(best, point_segment_distance(p, to_p(c.points[i]), to_p(c.points[i + 1])));
    return best;
}

} // namespace

double Polyline::length() const {
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < points.size(); ++i) total += seg_len(points[i], points[i + 1]);
    return total;
}

double Polyline::max_turning() const {
    double worst = 0.0;
    for (std::size_t i = 1; i + 1 < points.size(); ++i)
        worst = std::max(worst, turning(points[i - 1], points[i], points[i + 1]));
    return worst;
}

double Polyline::max_segment() const {
    double worst = 0.0;
    for (std::size_t i = 0; i + 1 < points.size(); ++i) worst = std::max(worst, seg_len(points[i], points[i + 1]));
    return worst;
}

Polyline make_continuous(std::vector<InnerState> pts) {
    // NaN vertices mark gaps; continuity restarts after them.
    for (std::size_t i = 1; i < pts.size(); ++i)
        if (!std::isnan(pts[i - 1].omega) && !std::isnan(pts[i].omega))
            pts[i].omega = pts[i - 1].omega + wrap_angle(pts[i].omega - pts[i - 1].omega);
    return Polyline{std::move(pts)};
}

Polyline involution(const Polyline& c) {
    Polyline out;
    out.points.reserve(c.points.size());
    for (const auto& s : c.points) out.points.push_back(involution(s));
    return out;
}

std::vector<Intersection> intersect(const Polyline& a, const Polyline& b) {
    std::vector<Intersection> out;
    if (a.size() < 2 || b.size() < 2) return out;
    // Segments of b sorted by their lower beta, with the tallest beta extent for the window scan.
    struct Seg {
        double beta_lo;
        std::size_t j;
    };
    std::vector<Seg> segs;
    segs.reserve(b.size() - 1);
    double tallest = 0.0;
    for (std::size_t j = 0; j + 1 < b.size(); ++j) {
        const double lo = std::min(b.points[j].beta, b.points[j + 1].beta);
        tallest = std::max(tallest, std::abs(b.points[j + 1].beta - b.points[j].beta));
        segs.push_back({lo, j});
    }
    std::sort(segs.begin(), segs.end(), [](const Seg& x, const Seg& y) { return x.beta_lo < y.beta_lo; });
    for (std::size_t i = 0; i + 1 < a.size(); ++i) {
        const P p1 = to_p(a.points[i]), p2 = to_p(a.points[i + 1]);
        const double axlo = std::min(p1.x, p2.x), axhi = std::max(p1.x, p2.x);
        const double aylo = std::min(p1.y, p2.y), ayhi = std::max(p1.y, p2.y);
        auto it = std::lower_bound(segs.begin(), segs.end(), aylo - tallest,
                                   [](const Seg& s, double v) { return s.beta_lo < v; });
        for (; it != segs.end() && it->beta_lo <= ayhi; ++it) {
            const std::size_t j = it->j;
            const double base = std::round((p1.x - b.points[j].omega) / (2 * pi));
            for (int dk = -1; dk <= 1; ++dk) {
                const double shift = 2 * pi * (base + dk);
                const P q1{b.points[j].omega + shift, b.points[j].beta};
                const P q2{b.points[j + 1].omega + shift, b.points[j + 1].beta};
                if (std::max(q1.x, q2.x) < axlo || std::min(q1.x, q2.x) > axhi) continue;
                if (std::max(q1.y, q2.y) < aylo || std::min(q1.y, q2.y) > ayhi) continue;
                const double rx = p2.x - p1.x, ry = p2.y - p1.y;
                const double sx = q2.x - q1.x, sy = q2.y - q1.y;
                const double denom = rx * sy - ry * sx;
                if (denom == 0.0) continue;
                const double t = ((q1.x - p1.x) * sy - (q1.y - p1.y) * sx) / denom;
                const double u = ((q1.x - p1.x) * ry - (q1.y - p1.y) * rx) / denom;
                // Half-open in t and u so that shared vertices count once; the final vertex is closed.
                const bool t_ok = t >= 0.0 && (t < 1.0 || (t == 1.0 && i + 2 == a.size()));
                const bool u_ok = u >= 0.0 && (u < 1.0 || (u == 1.0 && j + 2 == b.size()));
                if (!t_ok || !u_ok) continue;
                const double norms = std::hypot(rx, ry) * std::hypot(sx, sy);
                Intersection hit;
                hit.point = {wrap_angle(p1.x + t * rx), p1.y + t * ry};
                hit.angle = std::atan2(std::abs(denom) / norms, std::abs(rx * sx + ry * sy) / norms);
                out.push_back(hit);
            }
        }
    }
    return out;
}

double distance_to(const Polyline& c, const InnerState& x) {
    double best = std::numeric_limits<double>::infinity();
    if (c.empty()) return best;
    double lo, hi;
    omega_range(c, lo, hi);
    // Bring x next to the curve's omega range, then try neighbouring sheets.
    const double base = x.omega + 2 * pi * std::round((0.5 * (lo + hi) - x.omega) / (2 * pi));
    for (int k = -1; k <= 1; ++k) best = std::min(best, raw_distance(c, {base + 2 * pi * k, x.beta}));
    return best;
}

double hausdorff(const Polyline& a, const Polyline& b) {
    double worst = 0.0;
    for (const auto& s : a.points) worst = std::max(worst, distance_to(b, s));
    for (const auto& s : b.points) worst = std::max(worst, distance_to(a, s));
    return worst;
}

double omega_at_beta(const Polyline& c, double beta) {
    for (std::size_t i = 0; i + 1 < c.size(); ++i) {
        const InnerState& p = c.points[i];
        const InnerState& q = c.points[i + 1];
        const double lo = std::min(p.beta, q.beta), hi = std::max(p.beta, q.beta);
        if (beta < lo || beta > hi) continue;
        if (hi == lo) return p.omega;
        return p.omega + (q.omega - p.omega) * (beta - p.beta) / (q.beta - p.beta);
    }
    return std::numeric_limits<double>::quiet_NaN();
}

namespace {

void refine(const std::function<InnerState(double)>& f, double ta, const InnerState& a, double tb, const InnerState& b,
            int depth, int max_depth, std::vector<InnerState>& out, std::vector<double>* gaps) {
    const double tm = 0.5 * (ta + tb);
    const InnerState m = f(tm);
    const bool long_segment = seg_len(a, m) > kMaxSegment || seg_len(m, b) > kMaxSegment;
    const bool bent = turning(a, m, b) > kMaxTurning;
    if ((long_segment || bent) && depth < max_depth) {
        refine(f, ta, a, tm, m, depth + 1, max_depth, out, gaps);
        refine(f, tm, m, tb, b, depth + 1, max_depth, out, gaps);
        return;
    }
    if (long_segment && gaps) gaps->push_back(ta);
    out.push_back(m);
    out.push_back(b);
}

} // namespace

Polyline sample_adaptive(const std::function<InnerState(double)>& f, double t0, double t1, int initial, int max_depth,
                         std::vector<double>* gaps) {
    std::vector<InnerState> pts;
    double ta = t0;
    InnerState a = f(t0);
    pts.push_back(a);
    for (int i = 1; i <= initial; ++i) {
        const double tb = t0 + (t1 - t0) * i / initial;
        const InnerState b = f(tb);
        refine(f, ta, a, tb, b, 0, max_depth, pts, gaps);
        ta = tb;
        a = b;
    }
    return make_continuous(std::move(pts));
}

} // namespace annulus
