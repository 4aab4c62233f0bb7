#pragma once

#include <stdexcept>
#include <string>

namespace becmode {

/// Base for every error raised by the library. The CLI maps the concrete
/// subclass to its exit code.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input outside an operation's domain (exit code 2).
class ParameterError : public Error {
public:
    using Error::Error;
};

class SingularityError : public ParameterError {
public:
    using ParameterError::ParameterError;
};

class ExpansionValidityError : public ParameterError {
public:
    using ParameterError::ParameterError;
};

class InfeasiblePlanError : public ParameterError {
public:
    using ParameterError::ParameterError;
};

class UnsupportedModeError : public ParameterError {
public:
    using ParameterError::ParameterError;
};

class InconsistentModeError : public ParameterError {
public:
    using ParameterError::ParameterError;
};

class StepSizeError : public ParameterError {
public:
    using ParameterError::ParameterError;
};

class InsufficientResolutionError : public ParameterError {
public:
    using ParameterError::ParameterError;
};

class InsufficientHorizonError : public ParameterError {
public:
    using ParameterError::ParameterError;
};

/// Iterative solver gave up (exit code 3).
class ConvergenceError : public Error {
public:
    using Error::Error;
};

/// Norm or energy blew past its drift budget during propagation (exit code 3).
class NumericalInstabilityError : public Error {
public:
    using Error::Error;
};

/// File could not be read or written (exit code 4).
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace becmode
