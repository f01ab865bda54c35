#pragma once

#include <stdexcept>
#include <string>

namespace edm {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

// Bad or inconsistent input data (CSV content, schemas, class balance).
class DataError : public Error {
public:
    using Error::Error;
};

// Malformed or incompatible serialized files.
class FormatError : public Error {
public:
    using Error::Error;
};

// Invalid model structure (dangling or cyclic references).
class StructuralError : public Error {
public:
    using Error::Error;
};

// Invalid configuration values.
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace edm
