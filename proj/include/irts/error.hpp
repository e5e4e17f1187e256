#pragma once

#include <stdexcept>
#include <string>

namespace irts {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid parameters or configuration (bad frequency, unknown option, ...).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Malformed or unusable input data.
class DataError : public Error {
public:
    using Error::Error;
};

/// A CSV row that could not be parsed; carries the 1-based file line.
class ParseError : public DataError {
public:
    ParseError(std::size_t line, const std::string& what)
        : DataError("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

}  // namespace irts
