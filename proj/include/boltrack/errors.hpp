#pragma once

#include <stdexcept>
#include <string>

namespace boltrack {

// Malformed or inconsistent input (bad shape, contiguity, ranges).
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class GeometryError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class StructuralError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class ConfigError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class ParseError : public ValidationError {
public:
    ParseError(const std::string& source, std::size_t line, const std::string& what)
        : ValidationError(source + ":" + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

// File could not be opened, read or written.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace boltrack
