#pragma once

#include <stdexcept>
#include <string>

namespace perron {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Violated argument contract, e.g. evolve() called with t < s.
class DomainError : public Error {
public:
    explicit DomainError(const std::string& msg) : Error(msg) {}
};

/// A constructor constraint failed (e.g. an oscillation factor dropped below 1).
class ConstraintError : public Error {
public:
    explicit ConstraintError(const std::string& msg) : Error(msg) {}
};

/// A trajectory or improper integral grew without bound.
class DivergenceError : public Error {
public:
    explicit DivergenceError(const std::string& msg) : Error(msg) {}
};

/// The restriction of the evolution operator to F lost numerical rank.
class InvertibilityError : public Error {
public:
    explicit InvertibilityError(const std::string& msg) : Error(msg) {}
};

/// A manifold graph was queried outside its grid hull.
class ExtrapolationError : public Error {
public:
    explicit ExtrapolationError(const std::string& msg) : Error(msg) {}
};

/// A theorem hypothesis (gate, finiteness of S, ...) does not hold.
class PreconditionError : public Error {
public:
    explicit PreconditionError(const std::string& msg) : Error(msg) {}
};

/// A fixed-point iteration hit its cap before reaching tolerance.
class NonConvergenceError : public Error {
public:
    NonConvergenceError(const std::string& msg, double ratio)
        : Error(msg), empirical_ratio(ratio) {}
    double empirical_ratio;
};

/// An improper-integral tail could not be pushed below the requested tolerance.
class TruncationError : public Error {
public:
    TruncationError(const std::string& msg, double residual)
        : Error(msg), residual(residual) {}
    double residual;
};

/// Scenario file problem; carries the offending line when known.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg, int line = -1)
        : Error(line >= 0 ? "line " + std::to_string(line) + ": " + msg : msg),
          line(line) {}
    int line;
};

} // namespace perron
