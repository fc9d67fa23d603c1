#pragma once

#include "annulus/core.hpp"
#include "annulus/linearize.hpp"

#include <cstddef>
#include <cstdint>
#include <random>

namespace annulus {

// Image rays closer than this (in angle) to the cone boundary count as violations.
inline constexpr double kConeMargin = 1e-9;
// Attempts per requested sample before rejection sampling gives up.
inline constexpr std::size_t kRejectionBudget = 1000;

struct SamplingOptions {
    std::size_t samples = 10000;
    std::uint64_t seed = 1;
    unsigned workers = 1;
};

// Controls whether Omega* membership is a hard precondition.
enum class Gate { enforce, relaxed };

double zeta_min_bound(double delta) noexcept;
double zeta_max_bound(double delta) noexcept;

struct ZetaReport {
    Params params;
    std::size_t samples = 0;
    std::uint64_t seed = 0;
    double bound_min = 0, bound_max = 0;
    double observed_min = 0, observed_max = 0;
    bool pass = false;
};

// Requires delta^2 > 1/2 and r < (delta - delta^2)/4.
ZetaReport zeta_bounds_check(const Params& p, const SamplingOptions& opt);

struct A21Report {
    Params params;
    std::size_t samples = 0;
    std::size_t skipped = 0;  // non-returning draws
    std::uint64_t seed = 0;
    double bound = 0;         // 4A/sqrt(r)
    double min_abs_a21 = 0;
    double worst_margin = 0;  // min |a21| / bound
    bool pass = false;
};

A21Report a21_bound_check(const Params& p, const SamplingOptions& opt);

struct ConeReport {
    Params params;
    bool in_omega_star = false;
    std::size_t samples = 0;
    std::size_t skipped = 0;
    std::uint64_t seed = 0;
    std::size_t violations = 0;
    double forward_margin = 0;   // min angular distance of DG-images of C+ rays to the boundary
    double backward_margin = 0;  // same for DG^{-1} on C- at R(x)
    double expansion_margin = 0; // min of |DG u| - |a21| (2 - e), u = (1,1)/sqrt 2
    double rho_observed = 0;     // min |DG (1,1)/sqrt 2|
    double rho_bound = 0;        // 4A/sqrt(r)
    double measured_k = 0;       // max e / sqrt(r)
    double c1 = 0, c2 = 0;       // min a21/a11, max a22/a12
    double slope_min = 0, slope_max = 0;  // image slopes of the C+ boundary rays
    bool pass = false;
};

ConeReport cone_preservation_check(const Params& p, const SamplingOptions& opt, Gate gate = Gate::enforce);

struct SlopeBounds {
    double c1 = 0;
    double c2 = 0;
};

SlopeBounds slope_bounds(const Params& p, const SamplingOptions& opt, Gate gate = Gate::enforce);

// Uniform draw from the cylinder conditioned on H-.
InnerState sample_h_minus(const RegionSet& regions, std::mt19937_64& rng);

// Slope admissibility: stable curves have slopes in [-c2, -c1], unstable ones in [c1, c2].
bool in_stable_band(double slope, const SlopeBounds& b) noexcept;
bool in_unstable_band(double slope, const SlopeBounds& b) noexcept;

} // namespace annulus
