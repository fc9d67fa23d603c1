#include "annulus/cones.hpp"

#include "annulus/errors.hpp"
#include "annulus/parallel.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <limits>
#include <optional>

namespace annulus {

double zeta_min_bound(double delta) noexcept {
    return 0.5 * delta * std::sqrt(3.0 / (1.0 + delta * delta));
}

double zeta_max_bound(double delta) noexcept {
    return std::sqrt(delta);
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Relative rounding allowance in the expansion inequality.
constexpr double kExpansionSlack = 1e-12;

void require_cone_hypotheses(const Params& p) {
    require_omega(p);
    if (p.delta * p.delta <= 0.5)
        throw PreconditionError(fmt::format("delta^2 = {} must exceed 1/2", p.delta * p.delta));
    if (p.r >= (p.delta - p.delta * p.delta) / 4.0)
        throw PreconditionError(fmt::format("r = {} must be below (delta - delta^2)/4", p.r));
    if (cone_constant(p.delta) <= 0.0) throw PreconditionError("cone constant A is not positive");
}

void require_gate(const Params& p, Gate gate) {
    if (gate == Gate::enforce)
        require_omega_star(p);
    else
        require_cone_hypotheses(p);
}

// Signed angular distance of v to the boundary of the open cone {v1 v2 > 0}.
double cone_margin(double v1, double v2) {
    const double phi = std::atan2(std::abs(v2), std::abs(v1));
    const double d = std::min(phi, pi / 2 - phi);
    return v1 * v2 > 0 ? d : -d;
}

struct Draw {
    JacobianTerms terms;
    std::size_t skipped = 0;
};

// One returning H- sample per index, from an index-seeded engine.
std::vector<Draw> draw_returning(const Params& p, const SamplingOptions& opt) {
    const RegionSet regions(p);
    std::vector<Draw> out(opt.samples);
    parallel_for(opt.samples, opt.workers, [&](std::size_t i) {
        auto rng = item_engine(opt.seed, i);
        for (std::size_t attempt = 0; attempt < kRejectionBudget; ++attempt) {
            const InnerState x = sample_h_minus(regions, rng);
            OrbitClass c = first_return(x, p);
            if (c.tag != OrbitTag::returns) {
                ++out[i].skipped;
                continue;
            }
            out[i].terms = dg_analytic(*c.record, p);
            return;
        }
        throw ConstructionError("no returning H- sample within the rejection budget");
    });
    return out;
}

} // namespace

InnerState sample_h_minus(const RegionSet& regions, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> w(-pi, pi);
    std::uniform_real_distribution<double> b(-pi / 2, pi / 2);
    for (std::size_t attempt = 0; attempt < kRejectionBudget; ++attempt) {
        const InnerState x{w(rng), b(rng)};
        if (std::abs(x.beta) < pi / 2 && regions.in_h_minus(x)) return x;
    }
    throw ConstructionError("H- rejection sampling exhausted its budget");
}

ZetaReport zeta_bounds_check(const Params& p, const SamplingOptions& opt) {
    require_cone_hypotheses(p);
    ZetaReport rep;
    rep.params = p;
    rep.samples = opt.samples;
    rep.seed = opt.seed;
    rep.bound_min = zeta_min_bound(p.delta);
    rep.bound_max = zeta_max_bound(p.delta);
    rep.observed_min = kInf;
    rep.observed_max = 0.0;
    std::mt19937_64 rng(opt.seed);
    const double theta_max = std::asin(p.delta * p.delta);
    std::uniform_real_distribution<double> theta_dist(-theta_max, theta_max);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (std::size_t i = 0; i < opt.samples; ++i) {
        // |sin th| <= delta^2, then sin(phi) uniform in the band |sin th + delta sin phi| <= r
        const double theta = theta_dist(rng);
        const double lo = std::max(-1.0, (-p.r - std::sin(theta)) / p.delta);
        const double hi = std::min(1.0, (p.r - std::sin(theta)) / p.delta);
        const double u = lo + (hi - lo) * unit(rng);
        const double phi = unit(rng) < 0.5 ? std::asin(u) : pi - std::asin(u);
        const double zeta = std::abs(p.delta * std::cos(phi) / std::cos(theta));
        rep.observed_min = std::min(rep.observed_min, zeta);
        rep.observed_max = std::max(rep.observed_max, zeta);
    }
    rep.pass = rep.observed_min > rep.bound_min && rep.observed_max < rep.bound_max;
    return rep;
}

A21Report a21_bound_check(const Params& p, const SamplingOptions& opt) {
    require_cone_hypotheses(p);
    A21Report rep;
    rep.params = p;
    rep.samples = opt.samples;
    rep.seed = opt.seed;
    rep.bound = 4.0 * cone_constant(p.delta) / std::sqrt(p.r);
    rep.min_abs_a21 = kInf;
    for (const Draw& d : draw_returning(p, opt)) {
        rep.skipped += d.skipped;
        rep.min_abs_a21 = std::min(rep.min_abs_a21, std::abs(d.terms.a21));
    }
    rep.worst_margin = rep.min_abs_a21 / rep.bound;
    rep.pass = rep.min_abs_a21 >= rep.bound;
    return rep;
}

ConeReport cone_preservation_check(const Params& p, const SamplingOptions& opt, Gate gate) {
    require_gate(p, gate);
    ConeReport rep;
    rep.params = p;
    rep.in_omega_star = in_omega_star(p);
    rep.samples = opt.samples;
    rep.seed = opt.seed;
    rep.rho_bound = 4.0 * cone_constant(p.delta) / std::sqrt(p.r);
    rep.forward_margin = rep.backward_margin = rep.expansion_margin = rep.rho_observed = kInf;
    rep.c1 = rep.slope_min = kInf;
    rep.c2 = rep.slope_max = -kInf;
    for (const Draw& d : draw_returning(p, opt)) {
        rep.skipped += d.skipped;
        const JacobianTerms& t = d.terms;
        // (i) images of the boundary rays (1,0) and (0,1) of C+
        const double forward = std::min(cone_margin(t.a11, t.a21), cone_margin(t.a12, t.a22));
        // (iii) DG^{-1}(R x) = R DG(x) R on the boundary rays of C-
        const double backward = std::min(-cone_margin(t.a11, -t.a21), -cone_margin(-t.a12, t.a22));
        // (ii) |DG (1,1)/sqrt 2| >= |a21| (2 - e)
        const double image_norm = std::hypot(t.a11 + t.a12, t.a21 + t.a22) / std::sqrt(2.0);
        const double e = std::hypot(t.atilde11 + t.atilde12, t.atilde22) / (std::sqrt(2.0) * std::abs(t.a21));
        const double expansion = image_norm - std::abs(t.a21) * (2.0 - e);
        const bool ok = forward >= kConeMargin && backward >= kConeMargin &&
                        expansion >= -kExpansionSlack * image_norm;
        if (!ok) ++rep.violations;
        rep.forward_margin = std::min(rep.forward_margin, forward);
        rep.backward_margin = std::min(rep.backward_margin, backward);
        rep.expansion_margin = std::min(rep.expansion_margin, expansion);
        rep.rho_observed = std::min(rep.rho_observed, image_norm);
        rep.measured_k = std::max(rep.measured_k, e / std::sqrt(p.r));
        const double s1 = t.a21 / t.a11;
        const double s2 = t.a22 / t.a12;
        rep.c1 = std::min(rep.c1, s1);
        rep.c2 = std::max(rep.c2, s2);
        rep.slope_min = std::min({rep.slope_min, s1, s2});
        rep.slope_max = std::max({rep.slope_max, s1, s2});
    }
    rep.pass = rep.violations == 0;
    return rep;
}

SlopeBounds slope_bounds(const Params& p, const SamplingOptions& opt, Gate gate) {
    const ConeReport rep = cone_preservation_check(p, opt, gate);
    return {rep.c1, rep.c2};
}

bool in_stable_band(double slope, const SlopeBounds& b) noexcept {
    return slope >= -b.c2 && slope <= -b.c1;
}

bool in_unstable_band(double slope, const SlopeBounds& b) noexcept {
    return slope >= b.c1 && slope <= b.c2;
}

} // namespace annulus
