#pragma once

#include <stdexcept>
#include <string>

namespace mpsim {

/// Base class for all errors thrown by the library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Incompatible tensor shapes, axes, or chain dimensions.
struct DimensionError : Error {
    using Error::Error;
};

/// Out-of-range site or bond index.
struct IndexError : Error {
    using Error::Error;
};

/// Semantically invalid input (zero vector, zero-norm state, ...).
struct InvalidInputError : Error {
    using Error::Error;
};

/// Singular gauge matrix passed to gauge_transform.
struct GaugeError : Error {
    using Error::Error;
};

/// A numerical kernel (QR/SVD/eigensolver) produced non-finite output.
struct FactorizationError : Error {
    using Error::Error;
};

/// An environment block was requested whose predecessor is not current.
struct StalenessError : Error {
    using Error::Error;
};

/// Rank-deficient density matrices: the tangent space is not defined here.
struct SingularPointError : Error {
    using Error::Error;
};

/// Dense-oracle size guard exceeded.
struct SizeGuardError : Error {
    using Error::Error;
};

/// Exponential-sum fit did not reach the tolerance within the term ceiling.
struct FitFailureError : Error {
    FitFailureError(const std::string& msg, double best, int terms)
        : Error(msg), best_error(best), terms_tried(terms) {}
    double best_error;
    int terms_tried;
};

/// Config file rejected during validation (CLI exit code 2).
struct ConfigError : Error {
    using Error::Error;
};

}  // namespace mpsim
