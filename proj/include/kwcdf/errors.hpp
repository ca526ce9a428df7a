#pragma once

#include <stdexcept>
#include <string>

namespace kwcdf {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Floating-point breakdown: non-finite values, failed factorizations, unbracketed roots.
class NumericError : public Error {
public:
    using Error::Error;
};

/// Characteristic speed evaluated where the flux derivative is singular (K below the floor).
class SingularityError : public NumericError {
public:
    using NumericError::NumericError;
};

class DivergenceError : public NumericError {
public:
    using NumericError::NumericError;
};

class ShapeError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class CflError : public ConfigError {
public:
    using ConfigError::ConfigError;
};

class EmptyEnsembleError : public Error {
public:
    using Error::Error;
};

class UnsupportedEstimatorError : public Error {
public:
    using Error::Error;
};

}  // namespace kwcdf
