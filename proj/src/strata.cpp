#include "annulus/strata.hpp"

#include "annulus/errors.hpp"
#include "annulus/linearize.hpp"
#include "annulus/parallel.hpp"
#include "annulus/quad.hpp"
#include "annulus/roots.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace annulus {

const char* to_string(CurveSide s) noexcept {
    return s == CurveSide::preimage ? "preimage" : "image";
}

const char* to_string(StripKind k) noexcept {
    return k == StripKind::stable ? "stable" : "unstable";
}

const char* to_string(CrossState c) noexcept {
    switch (c) {
    case CrossState::crosses: return "crosses";
    case CrossState::disjoint: return "disjoint";
    case CrossState::ambiguous: return "ambiguous";
    }
    return "unknown";
}

namespace {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();
// Panels for the miss-function roots along L0.
constexpr int kZeroPanels = 20000;
// Largest half-width of the window that isolates one zero line.
constexpr double kMaxWindow = 0.5;
// Scan steps per window when bracketing a level crossing.
constexpr int kScanSteps = 64;
// Adaptive refinement depth for boundary polylines.
constexpr int kRefineDepth = 14;
// Samples of a pulled-back interval when locating the next strip of a word.
constexpr int kPullbackSamples = 512;
// Quad bisection steps per root; each halves the bracket.
constexpr int kQuadBisections = 110;

// Curve omega + beta ~ psi on which the miss of return time m vanishes.
struct ZeroLine {
    int m = 0;
    double psi = 0;
    double window = 0;
};

} // namespace

std::vector<double> miss_zeros_on_l0(int m, const Params& p) {
    auto f = [&](double w) { return miss_function(InnerState{w, 0.0}, m, p); };
    const double shift = 0.37 * 2.0 * pi / kZeroPanels;
    std::vector<double> roots = bracketed_roots(f, -pi + shift, pi + shift, kZeroPanels, kStripRootTolerance);
    for (double& w : roots) w = wrap_angle(w);
    return roots;
}

namespace {

double isolation_window(double psi, const std::vector<double>& roots) {
    double nearest = 2 * pi;
    for (double w : roots) {
        const double d = circular_distance(w, psi);
        if (d > 1e-9) nearest = std::min(nearest, d);
    }
    return std::min(kMaxWindow, 0.5 * nearest);
}

// Omega at height beta where the miss equals `level`, nearest to the zero line; NaN when absent in the window.
double level_root(const ZeroLine& z, double beta, double level, const Params& p) {
    auto f = [&](double w) { return miss_function(InnerState{w, beta}, z.m, p) - level; };
    const double guess = z.psi - beta;
    const double h = z.window / kScanSteps;
    const double f0 = f(guess);
    if (f0 == 0.0) return guess;
    double prev_lo = f0, prev_hi = f0;
    for (int k = 1; k <= kScanSteps; ++k) {
        const double hi = guess + k * h;
        const double fh = f(hi);
        if (std::signbit(fh) != std::signbit(prev_hi)) return bisect_root(f, hi - h, hi, kStripRootTolerance);
        prev_hi = fh;
        const double lo = guess - k * h;
        const double fl = f(lo);
        if (std::signbit(fl) != std::signbit(prev_lo)) return bisect_root(f, lo, lo + h, kStripRootTolerance);
        prev_lo = fl;
    }
    return nan;
}

bool return_time_matches(const InnerState& x, int m, const Params& p) {
    const auto step = g_step(x, p, kStripStepBudget);
    return step && step->m == m;
}

// Vertex validity: probe just inside the strip next to the boundary.
bool boundary_vertex_valid(const ZeroLine& z, const InnerState& v, const Params& p) {
    const double centre = level_root(z, v.beta, 0.0, p);
    if (std::isnan(centre)) return false;
    const double w = v.omega + wrap_angle(centre - v.omega) * (1.0 - kValidationSigma);
    return return_time_matches({w, v.beta}, z.m, p);
}

Polyline trace_level(const ZeroLine& z, double level, const Params& p, int seeds) {
    return sample_adaptive([&](double b) { return InnerState{level_root(z, b, level, p), b}; }, -pi / 2, pi / 2,
                           seeds, kRefineDepth);
}

// Maximal runs of vertices satisfying keep, as separate polylines with at least two vertices.
std::vector<Polyline> split_runs(const Polyline& c, const std::vector<char>& keep) {
    std::vector<Polyline> out;
    std::vector<InnerState> run;
    auto flush = [&] {
        if (run.size() >= 2) out.push_back(make_continuous(run));
        run.clear();
    };
    for (std::size_t i = 0; i < c.size(); ++i) {
        if (keep[i])
            run.push_back(c.points[i]);
        else
            flush();
    }
    flush();
    return out;
}

} // namespace

std::vector<double> segment_slopes(const Polyline& c) {
    std::vector<double> out;
    for (std::size_t i = 0; i + 1 < c.size(); ++i) {
        const double dw = c.points[i + 1].omega - c.points[i].omega;
        const double db = c.points[i + 1].beta - c.points[i].beta;
        out.push_back(db / dw);
    }
    return out;
}

std::vector<SingularCurve> trace_singularity(const Params& p, CurveSide side, const SingularityOptions& opt) {
    if (opt.gate == Gate::enforce) require_omega_star(p);
    require_omega(p);
    if (opt.m_max < 0 || opt.seeds < 2) throw PreconditionError("m_max must be >= 0 and seeds >= 2");
    const RegionSet regions(p);
    std::vector<SingularCurve> out;
    for (int m = 0; m <= opt.m_max; ++m) {
        const std::vector<double> roots = miss_zeros_on_l0(m, p);
        for (double psi : roots) {
            const ZeroLine z{m, psi, isolation_window(psi, roots)};
            for (double level : {p.r, -p.r}) {
                const Polyline full = trace_level(z, level, p, opt.seeds);
                std::vector<char> keep(full.size());
                for (std::size_t i = 0; i < full.size(); ++i) {
                    const InnerState& v = full.points[i];
                    keep[i] = !std::isnan(v.omega) && regions.in_h_minus(v) && boundary_vertex_valid(z, v, p);
                }
                const bool whole = std::all_of(keep.begin(), keep.end(), [](char k) { return k != 0; });
                for (Polyline& piece : split_runs(full, keep)) {
                    SingularCurve c;
                    c.polyline = side == CurveSide::preimage ? std::move(piece) : involution(piece);
                    c.side = side;
                    c.component_id = static_cast<int>(out.size());
                    c.m = m;
                    c.level = side == CurveSide::preimage ? level : -level;
                    c.truncated = !whole;
                    out.push_back(std::move(c));
                }
            }
        }
    }
    return out;
}

namespace {

ZeroLine anchor_line(const NormalFamily& family, int index, const Params& p) {
    const NormalPoint& a = family.points.at(static_cast<std::size_t>(index));
    return {a.m, a.omega, isolation_window(a.omega, miss_zeros_on_l0(a.m, p))};
}

double limit_offset(const InnerState& x, double limit, StripKind kind) {
    const double along = kind == StripKind::stable ? x.omega + x.beta : x.omega - x.beta;
    return std::abs(wrap_angle(along - limit)) / std::sqrt(2.0);
}

} // namespace

Strip build_stable_strip(const NormalFamily& family, int index, const Params& p, int seeds) {
    require_omega(p);
    const ZeroLine z = anchor_line(family, index, p);
    Strip s;
    s.kind = StripKind::stable;
    s.anchor = family.points[static_cast<std::size_t>(index)];
    s.anchor_index = index;
    s.limit = s.anchor.omega;
    s.window = z.window;
    auto fail = [&](const char* what, double beta) {
        return ConstructionError(fmt::format("anchor {} (omega={}, m={}) not enclosed at r={}: {} at beta={}", index,
                                             s.anchor.omega, s.anchor.m, p.r, what, beta));
    };
    auto boundary = [&](double level) {
        auto f = [&](double b) {
            const double w = level_root(z, b, level, p);
            if (std::isnan(w)) throw fail("no boundary root", b);
            return InnerState{w, b};
        };
        SingularCurve c;
        c.polyline = sample_adaptive(f, -pi / 2, pi / 2, seeds, kRefineDepth);
        c.side = CurveSide::preimage;
        c.component_id = level > 0 ? 0 : 1;
        c.m = z.m;
        c.level = level;
        for (const InnerState& v : c.polyline.points)
            if (!boundary_vertex_valid(z, v, p)) throw fail("return time changes next to the boundary", v.beta);
        return c;
    };
    s.boundary_a = boundary(p.r);
    s.boundary_b = boundary(-p.r);
    if (!return_time_matches({s.anchor.omega, 0.0}, z.m, p)) throw fail("anchor does not return", 0.0);
    for (const InnerState& v : s.boundary_a.polyline.points) {
        const double w = level_root(z, v.beta, -p.r, p);
        s.max_width = std::max(s.max_width, std::abs(wrap_angle(v.omega - w)));
    }
    for (const Polyline* c : {&s.boundary_a.polyline, &s.boundary_b.polyline})
        for (const InnerState& v : c->points) s.limit_distance = std::max(s.limit_distance, limit_offset(v, s.limit, s.kind));
    return s;
}

namespace {

Strip unstable_from(const Strip& stable_of_image, const NormalPoint& anchor, int index) {
    Strip u;
    u.kind = StripKind::unstable;
    u.anchor = anchor;
    u.anchor_index = index;
    u.limit = stable_of_image.limit;
    u.window = stable_of_image.window;
    u.max_width = stable_of_image.max_width;
    u.limit_distance = stable_of_image.limit_distance;
    for (auto [src, dst] : {std::pair{&stable_of_image.boundary_a, &u.boundary_a},
                            std::pair{&stable_of_image.boundary_b, &u.boundary_b}}) {
        *dst = *src;
        dst->polyline = involution(src->polyline);
        dst->side = CurveSide::image;
        dst->level = -src->level;
    }
    return u;
}

} // namespace

StripSet build_strips(const NormalFamily& family, const Params& p, Gate gate, unsigned workers) {
    if (gate == Gate::enforce) require_omega_star(p);
    require_omega(p);
    if (family.points.empty()) throw PreconditionError("empty normal family");
    StripSet set;
    set.params = p;
    set.anchors = family.points;
    const std::size_t n = family.points.size();
    set.stable.resize(n);
    parallel_for(n, workers, [&](std::size_t i) { set.stable[i] = build_stable_strip(family, static_cast<int>(i), p); });
    set.image.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double target = family.points[i].omega_hat;
        auto it = std::min_element(family.points.begin(), family.points.end(), [&](const NormalPoint& a, const NormalPoint& b) {
            return circular_distance(a.omega, target) < circular_distance(b.omega, target);
        });
        if (circular_distance(it->omega, target) > 1e-8)
            throw ConstructionError(fmt::format("return image of anchor {} is not in the family", i));
        set.image[i] = static_cast<int>(it - family.points.begin());
    }
    for (std::size_t i = 0; i < n; ++i)
        set.unstable.push_back(unstable_from(set.stable[static_cast<std::size_t>(set.image[i])], family.points[i],
                                             static_cast<int>(i)));
    return set;
}

std::optional<double> strip_threshold(const NormalFamily& family, int index, double r_start, double r_min) {
    for (double r = r_start; r >= r_min; r *= 0.5) {
        const Params p{family.delta, r};
        if (!in_omega(p)) continue;
        try {
            build_stable_strip(family, index, p);
            return r;
        } catch (const ConstructionError&) {
        }
    }
    return std::nullopt;
}

bool in_stable_strip(const InnerState& x, const Strip& s, const Params& p) {
    if (std::abs(wrap_angle(x.omega + x.beta - s.limit)) >= s.window) return false;
    if (std::abs(strip_sigma(x, s.anchor.m, p)) > 1.0) return false;
    return return_time_matches(x, s.anchor.m, p);
}

CrossingMatrix crossing_matrix(const StripSet& strips, unsigned workers) {
    const int n = static_cast<int>(strips.stable.size());
    CrossingMatrix c;
    c.n = n;
    c.cross.assign(n, std::vector<bool>(n, false));
    c.state.assign(n, std::vector<CrossState>(n, CrossState::disjoint));
    c.centre.assign(n, std::vector<InnerState>(n));
    c.min_angle.assign(n, std::vector<double>(n, 0.0));
    c.hits.assign(n, std::vector<int>(n, 0));
    std::vector<CrossState> flat(static_cast<std::size_t>(n) * n);
    parallel_for(flat.size(), workers, [&](std::size_t k) {
        const int i = static_cast<int>(k) / n, j = static_cast<int>(k) % n;
        const Strip& u = strips.unstable[i];
        const Strip& s = strips.stable[j];
        int total = 0;
        bool each_once = true;
        double min_angle = pi;
        double sum_w = 0, sum_b = 0, ref = 0;
        std::vector<InnerState> points;
        for (const SingularCurve* a : {&u.boundary_a, &u.boundary_b}) {
            for (const SingularCurve* b : {&s.boundary_a, &s.boundary_b}) {
                const auto hits = intersect(a->polyline, b->polyline);
                if (hits.size() != 1) each_once = false;
                for (const Intersection& h : hits) {
                    if (total == 0) ref = h.point.omega;
                    sum_w += ref + wrap_angle(h.point.omega - ref);
                    sum_b += h.point.beta;
                    min_angle = std::min(min_angle, h.angle);
                    points.push_back(h.point);
                    ++total;
                }
            }
        }
        // The four hits of a genuine crossing bound one small cell.
        double spread = 0;
        for (const InnerState& x : points)
            for (const InnerState& y : points)
                spread = std::max(spread, std::hypot(wrap_angle(x.omega - y.omega), x.beta - y.beta));
        const bool compact = spread <= kCellSpread * (u.max_width + s.max_width);
        CrossState st = CrossState::ambiguous;
        if (total == 0)
            st = CrossState::disjoint;
        else if (each_once && compact && min_angle >= kAmbiguousAngle)
            st = CrossState::crosses;
        c.hits[i][j] = total;
        c.min_angle[i][j] = total > 0 ? min_angle : 0.0;
        if (total > 0) c.centre[i][j] = {wrap_angle(sum_w / total), sum_b / total};
        flat[k] = st;
    });
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            c.state[i][j] = flat[static_cast<std::size_t>(i) * n + j];
            c.cross[i][j] = c.state[i][j] == CrossState::crosses;
        }
    return c;
}

bool predicted_disjoint(const StripSet& strips, int i, int j) {
    const double gap = std::abs(wrap_angle(strips.anchors[i].omega_hat - strips.anchors[j].omega - pi));
    return gap < strips.unstable[i].max_width + strips.stable[j].max_width;
}

bool strongly_connected(const CrossingMatrix& c) {
    if (c.n == 0) return false;
    auto reach_all = [&](bool forward) {
        std::vector<char> seen(c.n, 0);
        std::vector<int> stack{0};
        seen[0] = 1;
        while (!stack.empty()) {
            const int v = stack.back();
            stack.pop_back();
            for (int w = 0; w < c.n; ++w) {
                const bool edge = forward ? c.cross[v][w] : c.cross[w][v];
                if (edge && !seen[w]) {
                    seen[w] = 1;
                    stack.push_back(w);
                }
            }
        }
        return std::all_of(seen.begin(), seen.end(), [](char s) { return s != 0; });
    };
    return reach_all(true) && reach_all(false);
}

std::vector<InnerState> lattice_nodes(const CrossingMatrix& c) {
    std::vector<InnerState> out;
    for (int i = 0; i < c.n; ++i)
        for (int j = 0; j < c.n; ++j)
            if (c.cross[i][j]) out.push_back(c.centre[i][j]);
    return out;
}

bool admissible(const Word& w, const CrossingMatrix& c) {
    if (w.empty()) return false;
    for (int a : w)
        if (a < 0 || a >= c.n) return false;
    for (std::size_t k = 0; k + 1 < w.size(); ++k)
        if (!c.cross[w[k]][w[k + 1]]) return false;
    return true;
}

namespace {

using QState = BasicInnerState<Quad>;

std::optional<QState> iterate(QState x, int steps, const Params& p) {
    for (int k = 0; k < steps; ++k) {
        const auto step = g_step(x, p, kStripStepBudget);
        if (!step) return std::nullopt;
        x = step->end;
    }
    return x;
}

struct Cut {
    Quad lo, centre, hi;
};

// Within omega in [lo, hi] at height beta, the sub-interval whose k-th iterate lies in the given stable strip.
Cut pull_back(Quad lo, Quad hi, Quad beta, int k, const Strip& target, const Params& p, const char* context) {
    const int m = target.anchor.m;
    auto image = [&](Quad w) { return iterate(QState{w, beta}, k, p); };
    auto sigma = [&](Quad w) -> std::optional<Quad> {
        const auto y = image(w);
        if (!y) return std::nullopt;
        return strip_sigma(*y, m, p);
    };
    auto in_window = [&](Quad w) {
        const auto y = image(w);
        return y && abs(wrap_angle(y->omega + y->beta - Quad(target.limit))) < Quad(target.window);
    };
    std::vector<Quad> t(kPullbackSamples + 1);
    std::vector<std::optional<Quad>> sg(t.size());
    for (int i = 0; i <= kPullbackSamples; ++i) {
        t[i] = lo + (hi - lo) * i / kPullbackSamples;
        sg[i] = sigma(t[i]);
    }
    int found = -1;
    for (int i = 0; i < kPullbackSamples; ++i) {
        if (!sg[i] || !sg[i + 1]) continue;
        if ((*sg[i] < 0) == (*sg[i + 1] < 0)) continue;
        if (!in_window(t[i]) && !in_window(t[i + 1])) continue;
        if (found >= 0)
            throw ConstructionError(fmt::format("{}: strip {} met twice at step {}", context, target.anchor_index, k));
        found = i;
    }
    if (found < 0)
        throw ConstructionError(fmt::format("{}: pullback misses strip {} at step {}", context, target.anchor_index, k));

    auto root = [&](Quad a, Quad b, Quad level) {
        const bool a_neg = *sigma(a) - level < 0;
        for (int it = 0; it < kQuadBisections; ++it) {
            const Quad mid = (a + b) / 2;
            const auto v = sigma(mid);
            if (!v) throw ConstructionError(fmt::format("{}: no return inside the pullback", context));
            if ((*v - level < 0) == a_neg)
                a = mid;
            else
                b = mid;
        }
        return (a + b) / 2;
    };
    // Widen the bracket until it also brackets sigma = +1 and -1.
    int ia = found, ib = found + 1;
    auto brackets = [&](int a, int b) {
        return sg[a] && sg[b] && abs(*sg[a]) > 1 && abs(*sg[b]) > 1;
    };
    while (!brackets(ia, ib) && (ia > 0 || ib < kPullbackSamples)) {
        if (ia > 0) --ia;
        if (ib < kPullbackSamples) ++ib;
    }
    if (!brackets(ia, ib))
        throw ConstructionError(fmt::format("{}: strip {} not crossed at step {}", context, target.anchor_index, k));
    Cut cut;
    cut.centre = root(t[found], t[found + 1], Quad(0));
    const Quad e1 = root(t[ia], cut.centre, *sg[ia] > 0 ? Quad(1) : Quad(-1));
    const Quad e2 = root(cut.centre, t[ib], *sg[ib] > 0 ? Quad(1) : Quad(-1));
    cut.lo = std::min(e1, e2);
    cut.hi = std::max(e1, e2);
    return cut;
}

// S_{w0} at height beta: the interval between the two boundary roots.
std::pair<Quad, Quad> first_chord(const Strip& s, double beta, const Params& p) {
    const ZeroLine z{s.anchor.m, s.limit, s.window};
    const double a = level_root(z, beta, p.r, p);
    const double b = level_root(z, beta, -p.r, p);
    if (std::isnan(a) || std::isnan(b)) throw ConstructionError("strip has no chord at this height");
    const double lo = std::min(a, b), hi = std::max(a, b);
    const double pad = 0.25 * (hi - lo);
    return {Quad(lo - pad), Quad(hi + pad)};
}

void require_word(const Word& w, const StripSet& strips) {
    if (w.empty()) throw PreconditionError("empty word");
    for (int a : w)
        if (a < 0 || a >= static_cast<int>(strips.stable.size())) throw PreconditionError("symbol out of range");
}

} // namespace

NestedWidth nested_width(const Word& w, const StripSet& strips, double beta) {
    require_word(w, strips);
    const Params& p = strips.params;
    auto [lo, hi] = first_chord(strips.stable[w[0]], beta, p);
    Cut cut = pull_back(lo, hi, Quad(beta), 0, strips.stable[w[0]], p, "nested strip");
    for (std::size_t k = 1; k < w.size(); ++k)
        cut = pull_back(cut.lo, cut.hi, Quad(beta), static_cast<int>(k), strips.stable[w[k]], p, "nested strip");
    return {w, beta, static_cast<double>(cut.hi - cut.lo)};
}

SymmetricPeriodicPoint symmetric_periodic_from_word(const Word& w, const StripSet& strips) {
    require_word(w, strips);
    const Params& p = strips.params;
    const int len = static_cast<int>(w.size());
    auto [lo, hi] = first_chord(strips.stable[w[0]], 0.0, p);
    Cut cut = pull_back(lo, hi, Quad(0), 0, strips.stable[w[0]], p, "symmetric point");
    for (int k = 1; k < len; ++k) cut = pull_back(cut.lo, cut.hi, Quad(0), k, strips.stable[w[k]], p, "symmetric point");
    const QState z{cut.centre, Quad(0)};

    std::vector<QState> half{z};
    std::vector<int> times;
    for (int k = 0; k < len; ++k) {
        const auto step = g_step(half.back(), p, kStripStepBudget);
        if (!step) throw ConstructionError("symmetric point does not return");
        half.push_back(step->end);
        times.push_back(step->m);
    }
    SymmetricPeriodicPoint out;
    out.word = w;
    out.params = p;
    out.period = 2 * len;
    out.state = state_cast<double>(z);
    out.closure = static_cast<double>(abs(half.back().beta));
    if (!(out.closure < kSymmetricClosure))
        throw ConstructionError(fmt::format("symmetric point closes only to {}", out.closure));

    out.itinerary_ok = true;
    for (int k = 0; k < len; ++k) {
        const Strip& s = strips.stable[w[k]];
        const QState& x = half[k];
        const bool ok = times[k] == s.anchor.m && abs(strip_sigma(x, s.anchor.m, p)) <= 1 &&
                        abs(wrap_angle(x.omega + x.beta - Quad(s.limit))) < Quad(s.window);
        out.itinerary_ok = out.itinerary_ok && ok;
    }
    // Second half by reversibility: G^(len + j) z = R G^(len - j) z.
    for (int j = 0; j < 2 * len; ++j) {
        const QState& x = j <= len ? half[j] : half[2 * len - j];
        out.orbit.push_back(j <= len ? state_cast<double>(x) : involution(state_cast<double>(x)));
    }
    const RegionSet regions(p);
    out.in_h_minus = std::all_of(out.orbit.begin(), out.orbit.end(), [&](const InnerState& x) { return regions.in_h_minus(x); });
    Eigen::Matrix2d product = Eigen::Matrix2d::Identity();
    for (const InnerState& x : out.orbit) product = dg_analytic(g_map(x, p, kStripStepBudget), p).matrix() * product;
    out.trace = product.trace();
    return out;
}

double density_estimate(const std::vector<InnerState>& nodes, unsigned workers) {
    if (nodes.empty()) throw PreconditionError("empty node set");
    std::vector<double> row_max(kDensityGridBeta, 0.0);
    parallel_for(row_max.size(), workers, [&](std::size_t j) {
        const double beta = -pi / 2 + (j + 0.5) * pi / kDensityGridBeta;
        double worst = 0.0;
        for (int i = 0; i < kDensityGridOmega; ++i) {
            const double omega = -pi + (i + 0.5) * 2 * pi / kDensityGridOmega;
            double best = std::numeric_limits<double>::infinity();
            for (const InnerState& x : nodes) {
                const double dw = wrap_angle(x.omega - omega), db = x.beta - beta;
                best = std::min(best, dw * dw + db * db);
            }
            worst = std::max(worst, best);
        }
        row_max[j] = std::sqrt(worst);
    });
    return *std::max_element(row_max.begin(), row_max.end());
}

} // namespace annulus
