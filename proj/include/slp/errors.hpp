// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace slp {

// Constellation cannot be built: fewer than two points, duplicates, or all zero.
class DegenerateConstellation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Argument outside the domain of an operation (negative slack, size mismatch, ...).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// The region of an interior constellation point is the point itself and has
// no slack parametrization.
class InteriorPointRegion : public DomainError {
 public:
  using DomainError::DomainError;
};

// The region exists but the two boundary rows do not determine a unique point
// (hull-edge points and collinear constellations).
class DegenerateRegion : public DomainError {
 public:
  using DomainError::DomainError;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace slp
