#pragma once

#include <stdexcept>
#include <string>

namespace btm {

// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Series with mismatched starts or lengths were combined.
class AlignmentError : public Error {
public:
    explicit AlignmentError(const std::string& msg) : Error(msg) {}
};

// Data does not support the requested estimate (zero nocturnal demand,
// nonpositive peak, empty day/night partition, ...).
class DegenerateDataError : public Error {
public:
    explicit DegenerateDataError(const std::string& msg) : Error(msg) {}
};

// Invalid configuration value or schema.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

// File could not be read, parsed, or written.
class IoError : public Error {
public:
    explicit IoError(const std::string& msg) : Error(msg) {}
};

// Numerical routine failed to converge or factorize.
class SolverError : public Error {
public:
    explicit SolverError(const std::string& msg) : Error(msg) {}
};

} // namespace btm
