#pragma once

#include <stdexcept>
#include <string>

namespace wgn {

// Caller-side problems: bad shapes, bad parameters, malformed files.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class DimensionError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class FormatError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

// Numerical failures: the inputs were well formed but the computation could
// not produce a trustworthy answer.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DegenerateInputError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class SingularInputError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class OracleFailure : public NumericalError {
public:
    using NumericalError::NumericalError;
};

} // namespace wgn
