#pragma once

#include <stdexcept>
#include <string>

namespace mlelab {

/// Base class for all library errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Argument outside the documented domain (parameter space, interval, ...).
struct DomainError : Error {
    using Error::Error;
};

/// Numerical integration could not meet the requested tolerance in budget.
struct QuadratureFailure : Error {
    using Error::Error;
};

/// A computed Fisher information was non-positive or non-finite.
struct NonPositiveInformation : Error {
    using Error::Error;
};

/// Iterative solver exhausted its iteration budget.
struct NonConvergence : Error {
    using Error::Error;
};

/// Requested a closed-form value for a family that has none.
struct NoClosedForm : Error {
    using Error::Error;
};

/// A grid was too small or degenerate for the requested check.
struct InsufficientGrid : Error {
    using Error::Error;
};

/// A value fell outside the admissible range of an operation.
struct RangeError : Error {
    using Error::Error;
};

/// Least-squares fit impossible (degenerate abscissae or values).
struct DegenerateFit : Error {
    using Error::Error;
};

/// An experiment had too many hard solver failures to be trusted.
struct PropagatedSolverFailure : Error {
    using Error::Error;
};

/// Malformed or semantically invalid experiment configuration.
struct ConfigError : Error {
    using Error::Error;
};

}  // namespace mlelab
