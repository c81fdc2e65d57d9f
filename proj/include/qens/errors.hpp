#pragma once

#include <stdexcept>
#include <string>

namespace qens {

/// Malformed input: bad qubit index, arity mismatch, empty sets.
class ValidationError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Requested register exceeds the simulator's memory ceiling.
class CapacityError : public std::length_error {
  public:
    using std::length_error::length_error;
};

/// Argument outside a formula's mathematical domain.
class DomainError : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

/// File could not be read or written.
class IoError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

} // namespace qens
