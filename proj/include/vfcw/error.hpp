#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace vfcw {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An argument lies outside the domain of the operation.
class DomainError : public Error {
public:
    using Error::Error;
};

/// The input data cannot support the requested estimate (e.g. zero spread).
class DegenerateDataError : public Error {
public:
    using Error::Error;
};

/// A configuration value is missing, malformed or inconsistent.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Input data is well-formed but violates a data invariant.
class DataError : public Error {
public:
    using Error::Error;
};

/// Text input could not be decoded. Carries the 1-based line number.
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

} // namespace vfcw
