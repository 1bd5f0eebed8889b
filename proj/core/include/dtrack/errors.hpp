#pragma once

#include <stdexcept>

namespace dtrack {

// Base class for everything thrown by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad inputs: configuration, contract misuse, unsupported combinations.
// The CLI maps these to exit code 2.
struct ConfigError : Error {
    using Error::Error;
};

// Failures discovered while computing. The CLI maps these to exit code 3.
struct NumericalError : Error {
    using Error::Error;
};

struct MissingParameter : ConfigError {
    using ConfigError::ConfigError;
};
struct NonPositiveParameter : ConfigError {
    using ConfigError::ConfigError;
};
struct FellerViolation : ConfigError {
    using ConfigError::ConfigError;
};
struct InvalidHorizon : ConfigError {
    using ConfigError::ConfigError;
};
struct ExpiredContract : ConfigError {
    using ConfigError::ConfigError;
};
struct UnsupportedPair : ConfigError {
    using ConfigError::ConfigError;
};
struct InsufficientQuotes : ConfigError {
    using ConfigError::ConfigError;
};
struct DegenerateMaturities : ConfigError {
    using ConfigError::ConfigError;
};
struct OutOfCalendar : ConfigError {
    using ConfigError::ConfigError;
};
struct IoError : ConfigError {
    using ConfigError::ConfigError;
};

// The exposure submatrix is rank-deficient relative to the requested target.
struct SingularSystem : NumericalError {
    using NumericalError::NumericalError;
};
struct FitDiverged : NumericalError {
    using NumericalError::NumericalError;
};
// A user-supplied portfolio drift contradicts the tracking condition.
struct TrackingConditionError : NumericalError {
    using NumericalError::NumericalError;
};

} // namespace dtrack
