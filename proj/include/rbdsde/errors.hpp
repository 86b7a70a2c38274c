#pragma once

#include <stdexcept>
#include <string>

namespace rbdsde {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Invalid user input: bad parameter, malformed config, unknown problem name.
class InvalidArgument : public Error {
public:
    explicit InvalidArgument(const std::string& what) : Error(what) {}
};

/// Request exceeds a hard capacity guard (e.g. tree enumeration too large).
class CapacityError : public Error {
public:
    explicit CapacityError(const std::string& what) : Error(what) {}
};

/// Numerical failure: contraction violated, Picard non-convergence,
/// rank-deficient regression system.
class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& what) : Error(what) {}
};

/// A theorem hypothesis failed its audit; the requested conclusion is not
/// expected to hold, so the harness refuses to run.
class HypothesisError : public Error {
public:
    explicit HypothesisError(const std::string& what) : Error(what) {}
};

/// Configuration file parse/validation failure (carries file:line context).
class ConfigError : public InvalidArgument {
public:
    explicit ConfigError(const std::string& what) : InvalidArgument(what) {}
};

} // namespace rbdsde
