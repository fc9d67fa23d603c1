#include "annulus/flight.hpp"

#include "annulus/errors.hpp"

#include <fmt/format.h>

#include <algorithm>

namespace annulus {

const char* to_string(OrbitTag tag) noexcept {
    switch (tag) {
    case OrbitTag::returns: return "returns";
    case OrbitTag::whispering: return "whispering";
    case OrbitTag::periodic_non_colliding: return "periodic_non_colliding";
    case OrbitTag::max_iter_exceeded: return "max_iter_exceeded";
    }
    return "unknown";
}

namespace {

// Closure tolerance in s for detecting a periodic chord polygon that misses the obstacle.
constexpr double kClosureTolerance = 1e-12;

OrbitClass trace_from_outer(const OuterState& first, const Params& p, std::int64_t max_outer_steps) {
    if (max_outer_steps < 1) throw PreconditionError("max_outer_steps must be at least 1");
    OrbitClass out;
    if (RegionSet(p).in_whispering(first)) {
        out.tag = OrbitTag::whispering;
        return out;
    }
    ReturnRecord rec;
    rec.outer_hits.push_back(first);
    OuterState y = first;
    for (std::int64_t k = 0; k < max_outer_steps; ++k) {
        auto next = map_outer(y, p);
        if (auto* hit = std::get_if<InnerState>(&next)) {
            rec.end = *hit;
            rec.m = static_cast<int>(rec.outer_hits.size()) - 1;
            rec.nu = rec.m + 2;
            const double unwrapped = first.s + rec.m * (pi - 2.0 * first.theta);
            rec.winding = std::llround((unwrapped - y.s) / (2.0 * pi));
            out.tag = OrbitTag::returns;
            out.outer_steps = k;
            out.record = std::move(rec);
            return out;
        }
        y = std::get<OuterState>(next);
        if (circular_distance(y.s, first.s) < kClosureTolerance) {
            out.tag = OrbitTag::periodic_non_colliding;
            out.outer_steps = k + 1;
            return out;
        }
        rec.outer_hits.push_back(y);
    }
    out.outer_steps = max_outer_steps;
    return out;
}

} // namespace

OrbitClass first_return(const InnerState& x, const Params& p, std::int64_t max_outer_steps) {
    OrbitClass out = trace_from_outer(map_inner_to_outer(x, p), p, max_outer_steps);
    if (out.record) out.record->start = x;
    return out;
}

OrbitClass first_return_from_outer(const OuterState& x, const Params& p, std::int64_t max_outer_steps) {
    return trace_from_outer(x, p, max_outer_steps);
}

ReturnRecord g_map(const InnerState& x, const Params& p, std::int64_t max_outer_steps) {
    OrbitClass c = first_return(x, p, max_outer_steps);
    if (c.tag != OrbitTag::returns)
        throw ConstructionError(fmt::format("no return from (omega={}, beta={}): {}", x.omega, x.beta,
                                            to_string(c.tag)));
    return std::move(*c.record);
}

double ReturnResiduals::max_abs() const {
    return std::max({std::abs(launch_equation), std::abs(launch_angle), std::abs(arrival_equation),
                     std::abs(arrival_angle)});
}

ReturnResiduals return_residuals(const ReturnRecord& rec, const Params& p) {
    const OuterState& a = rec.outer_hits.front();
    const OuterState& b = rec.outer_hits.back();
    ReturnResiduals res;
    res.launch_equation = std::sin(a.theta) + p.delta * std::sin(a.theta + a.s) + p.r * std::sin(rec.start.beta);
    res.launch_angle = wrap_angle(rec.start.omega + rec.start.beta + a.s + a.theta);
    res.arrival_equation = std::sin(b.theta) + p.delta * std::sin(b.theta - b.s) + p.r * std::sin(rec.end.beta);
    res.arrival_angle = wrap_angle(rec.end.omega - rec.end.beta - b.theta + b.s);
    return res;
}

} // namespace annulus
