#pragma once

#include <stdexcept>
#include <string>

namespace vmsd {

/// Base class for every error raised by the solver suite.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A configuration value or constructor argument violates its constraint.
class InvalidConfig : public Error {
public:
    using Error::Error;
};

/// A point or index lies outside the domain it was evaluated on.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Inconsistent dimensions or out-of-range indices during assembly.
class AssemblyError : public Error {
public:
    using Error::Error;
};

/// A linear solve did not reach the residual bound.
class SolverFailure : public Error {
public:
    SolverFailure(const std::string& what, double residual)
        : Error(what + " (residual " + std::to_string(residual) + ")"), residual_(residual) {}

    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

}  // namespace vmsd
