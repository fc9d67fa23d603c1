#pragma once

#include <boost/math/tools/roots.hpp>

#include <cmath>
#include <cstdint>
#include <vector>

namespace annulus {

// Bisection on a sign-changing bracket until its width is at most tol.
template <class F>
double bisect_root(F&& f, double lo, double hi, double tol) {
    auto stop = [tol](double a, double b) { return std::abs(b - a) <= tol; };
    std::uintmax_t iterations = 200;
    const auto bracket = boost::math::tools::bisect(f, lo, hi, stop, iterations);
    return 0.5 * (bracket.first + bracket.second);
}

// Roots of f on [lo, hi] from sign changes over `panels` equal panels.
template <class F>
std::vector<double> bracketed_roots(F&& f, double lo, double hi, int panels, double tol) {
    std::vector<double> roots;
    double a = lo;
    double fa = f(a);
    for (int i = 1; i <= panels; ++i) {
        const double b = lo + (hi - lo) * i / panels;
        const double fb = f(b);
        if (fa == 0.0) {
            roots.push_back(a);
        } else if (fb != 0.0 && std::signbit(fa) != std::signbit(fb)) {
            roots.push_back(bisect_root(f, a, b, tol));
        }
        a = b;
        fa = fb;
    }
    if (fa == 0.0) roots.push_back(a);
    return roots;
}

} // namespace annulus
