#pragma once

#include <boost/multiprecision/float128.hpp>

namespace annulus {

// 113-bit significand scalar for computations below double resolution.
using Quad = boost::multiprecision::float128;

} // namespace annulus
