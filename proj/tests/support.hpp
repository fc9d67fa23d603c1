#pragma once

#include "annulus/core.hpp"

#include <random>

namespace annulus::testing {

inline InnerState random_inner(std::mt19937_64& rng, double beta_max = 1.4) {
    std::uniform_real_distribution<double> w(-pi, pi);
    std::uniform_real_distribution<double> b(-beta_max, beta_max);
    return {w(rng), b(rng)};
}

inline OuterState random_outer(std::mt19937_64& rng, double theta_max = 1.5) {
    std::uniform_real_distribution<double> s(-pi, pi);
    std::uniform_real_distribution<double> t(-theta_max, theta_max);
    return {s(rng), t(rng)};
}

} // namespace annulus::testing
