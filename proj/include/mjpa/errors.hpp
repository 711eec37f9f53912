#pragma once

#include <stdexcept>
#include <string>

namespace mjpa {

// Wrong matrix shape or mismatched lengths.
class DimensionError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// NaN/Inf, negative rates, empty data and similar.
class InvalidInput : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// A caller-side contract is violated (e.g. n < lambda0, grid too short).
class PreconditionError : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

// Mathematically undefined request, e.g. Gompertz closed form with n <= beta.
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

// Computed object violates a probabilistic invariant (negative weight, Q outside [0,1]).
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class CapacityError : public std::length_error {
public:
  using std::length_error::length_error;
};

// Reward margin whose hypoexponential law is the point mass at zero.
class DegenerateMargin : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace mjpa
