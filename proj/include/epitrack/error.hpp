#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace epitrack {

enum class ErrorKind {
    invalid_argument,
    not_found,
    validation,
    parse,
    fetch_transient,
    source,
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message) : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

class InvalidArgument : public Error {
public:
    explicit InvalidArgument(const std::string& message) : Error(ErrorKind::invalid_argument, message) {}
};

class NotFound : public Error {
public:
    explicit NotFound(const std::string& message) : Error(ErrorKind::not_found, message) {}
};

class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& message) : Error(ErrorKind::validation, message) {}
};

/// Parse failure; line is 1-based (0 when the whole document is malformed).
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& message)
        : Error(ErrorKind::parse, line ? "line " + std::to_string(line) + ": " + message : message), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// retryable() is true for network-level failures (unreachable, timeout),
/// false for sources that answered with an error.
class FetchError : public Error {
public:
    FetchError(bool retryable, const std::string& message)
        : Error(retryable ? ErrorKind::fetch_transient : ErrorKind::source, message) {}

    bool retryable() const noexcept { return kind() == ErrorKind::fetch_transient; }
};

} // namespace epitrack
