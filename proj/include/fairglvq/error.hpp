#pragma once

#include <stdexcept>
#include <string>

namespace fairglvq {

// Base of every error thrown by the library. Subclasses name the failure
// category so callers (and tests) can tell a bad parameter from a bad file.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

class ParameterError : public Error {
public:
    using Error::Error;
};

class SchemaError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t row)
        : Error(what + " (row " + std::to_string(row) + ")"), row_(row) {}

    // Zero-based data row index (header excluded).
    std::size_t row() const noexcept { return row_; }

private:
    std::size_t row_;
};

class ModelError : public Error {
public:
    using Error::Error;
};

class UndefinedMetricError : public Error {
public:
    using Error::Error;
};

class UnsupportedError : public Error {
public:
    using Error::Error;
};

class DegenerateProbeError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace fairglvq
