#pragma once

#include <stdexcept>
#include <string>

namespace subfront {

// Argument outside the mathematical domain of an operation (a < 0, s < 0, u = 0, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Quadrature, root bracketing or fixed-point iteration did not reach its tolerance.
class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Floating-point range exceeded (overflow of the jump MGF, underflow of e^{-psi/eps}).
class RangeError : public std::range_error {
public:
    using std::range_error::range_error;
};

// Numerical scheme invariant broken at runtime (CFL violation, NaN, lost positivity).
class SchemeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid or unknown configuration entry.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace subfront
