#pragma once

#include <stdexcept>
#include <string>

namespace epi {

// Base for every error the library raises on a broken contract.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParameterError : public Error {
public:
    using Error::Error;
};

class RangeError : public Error {
public:
    using Error::Error;
};

class NumericalError : public Error {
public:
    using Error::Error;
};

class ElicitationError : public Error {
public:
    using Error::Error;
};

class DataError : public Error {
public:
    using Error::Error;
};

// Negative or non-integer counts in otherwise well-formed input.
class ValidationError : public DataError {
public:
    using DataError::DataError;
};

// Synthetic data requested from parameters that give an infeasible path.
class GenerationError : public Error {
public:
    using Error::Error;
};

class SamplerError : public Error {
public:
    using Error::Error;
};

class ContractError : public Error {
public:
    using Error::Error;
};

}  // namespace epi
