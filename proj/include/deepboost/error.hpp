#pragma once

#include <stdexcept>
#include <string>

namespace deepboost {

/// Base of every exception the library throws.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Shapes that do not line up (kernel larger than image, feature length mismatch).
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Malformed or unreadable input data.
class DataError : public Error {
public:
    using Error::Error;
};

/// A training step could not proceed (all weights zero, weight underflow, ...).
class TrainingError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace deepboost
