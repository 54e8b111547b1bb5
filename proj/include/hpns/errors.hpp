#pragma once

// Exception hierarchy. Precondition violations derive from ValidationError,
// failures of an iterative or quadrature procedure from NumericalError. The
// CLI maps the two families onto distinct exit codes.

#include <stdexcept>
#include <string>

namespace hpns {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ValidationError : public Error {
public:
    using Error::Error;
};

class NumericalError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class InvalidBranch : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class DomainError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class MeshError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class OutOfDomain : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class NonConvergence : public NumericalError {
public:
    NonConvergence(const std::string& what, double parameter)
        : NumericalError(what), parameter_(parameter) {}

    /// The flux (or other control parameter) at which the iteration failed.
    double parameter() const { return parameter_; }

private:
    double parameter_;
};

class Divergence : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class NewtonDivergence : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class TailError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class SymmetryError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class ResolutionError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

}  // namespace hpns
