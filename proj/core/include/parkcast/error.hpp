#pragma once

#include <stdexcept>
#include <string>

namespace parkcast {

// Base class for everything thrown by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Tensor rank/dimension mismatches.
class ShapeError : public Error {
public:
    using Error::Error;
};

// Bad user-supplied configuration (CLI exit code 2).
class ConfigError : public Error {
public:
    using Error::Error;
};

// Malformed or inconsistent input data (CLI exit code 3).
class DataError : public Error {
public:
    using Error::Error;
};

// Non-finite loss or gradients during training (CLI exit code 4).
class DivergenceError : public Error {
public:
    using Error::Error;
};

} // namespace parkcast
