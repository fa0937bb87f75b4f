#pragma once

#include <stdexcept>
#include <string>

namespace revmix {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Bad user-supplied configuration or violated precondition.
struct ConfigError : Error {
    using Error::Error;
};

/// Non-finite state, divergent iteration and similar numerical breakdowns.
struct NumericalError : Error {
    using Error::Error;
};

struct SingularJacobianError : NumericalError {
    using NumericalError::NumericalError;
};

struct MaxIterationsError : NumericalError {
    using NumericalError::NumericalError;
};

/// A bisection was requested on an interval where the predicate does not change.
struct NoBracketError : Error {
    using Error::Error;
};

/// Multipliers fall inside every tolerance band; the orbit type is not decidable.
struct AmbiguousTypeError : Error {
    using Error::Error;
};

struct GenericityError : Error {
    using Error::Error;
};

struct AlignmentError : Error {
    using Error::Error;
};

struct ExtrapolationError : NumericalError {
    using NumericalError::NumericalError;
};

struct BinningMismatchError : Error {
    using Error::Error;
};

}  // namespace revmix
