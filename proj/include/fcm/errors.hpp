#pragma once

#include <stdexcept>
#include <string>

namespace fcm {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Matrix or vector dimensions that do not conform.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// Malformed input data: CSV cells, labels, model files.
class DataError : public Error {
public:
    using Error::Error;
};

/// NaN/inf in parameters, gradients or losses.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// Invalid hyperparameters or configuration keys.
class ConfigError : public Error {
public:
    using Error::Error;
};

} // namespace fcm
