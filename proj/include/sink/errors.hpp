#pragma once

#include <stdexcept>
#include <string>

namespace sink {

// Base of everything the library throws on purpose.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad configuration: unsupported smoothness, malformed config, invalid bounds.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Caller supplied data that violates a precondition (dimension mismatch,
// out-of-domain input, duplicate training rows).
class InputError : public Error {
public:
    using Error::Error;
};

// Numerical failure. Subclasses name the specific condition.
class NumericalError : public Error {
public:
    using Error::Error;
};

class SingularModelError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

// Predictor weight not defined at this query (CMLE near rho = 0, Limit
// Kriging with vanishing k'K^-1 1).
class UndefinedPredictorError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

// Conditioning on the target is degenerate (rho too close to 1).
class DegenerateConditioningError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

}  // namespace sink
