#pragma once

#include <stdexcept>
#include <string>

namespace ballistic {

/// Mismatched spaces, component counts or time grids.
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Out-of-range or inconsistent parameters.
class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Operation requires a different kind of space (e.g. a torus grid).
class UnsupportedSpaceError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Dual variables outside the cone I + 2B >= 0 where interior points are required.
class InfeasibleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A reference time-stepper lost accuracy (energy drift above its abort level).
class ResolutionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A reference solution declined to build because its preconditions fail.
class OracleRefused : public std::runtime_error {
public:
    OracleRefused(const std::string& what, double measured)
        : std::runtime_error(what), measured_(measured) {}

    /// The offending measured quantity (eigenvalue, horizon, ...).
    double measured() const { return measured_; }

private:
    double measured_;
};

}  // namespace ballistic
