#pragma once

#include <stdexcept>
#include <string>

namespace vscsync {

/// Invalid scenario or parameter set. Maps to CLI exit code 2.
class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// The impedance block matrix Q is numerically singular.
class SingularMatrixError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Requested power is beyond the transfer capability inside the angle bounds.
class InfeasibleRequest : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class NonConvergence : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// PE window not yet filled.
class InsufficientHistory : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

}  // namespace vscsync
