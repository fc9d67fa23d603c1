#pragma once

#include <stdexcept>
#include <string>

namespace annulus {

// Input violates a documented precondition (parameter domain, hypothesis gate).
class PreconditionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A computation hit a singular configuration (grazing return, vanishing denominator).
class DegenerateError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// An orbit left the region where the requested construction is valid.
class ConstructionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace annulus
