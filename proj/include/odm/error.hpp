#pragma once

#include <stdexcept>
#include <string>

namespace odm {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid codec parameters, signal definitions, or configuration.
class ParameterError : public Error {
public:
    using Error::Error;
};

/// Non-finite samples or arithmetic that left the representable range.
class NumericError : public Error {
public:
    using Error::Error;
};

/// A step was applied to a state that belongs to a different step index.
class SequencingError : public Error {
public:
    using Error::Error;
};

/// Argument outside the domain on which an operation is defined.
class DomainError : public Error {
public:
    using Error::Error;
};

/// A bound search ran past its iteration cap.
class DivergenceError : public Error {
public:
    using Error::Error;
};

/// Malformed file content. Carries the 1-based line and the 0-based column/offset.
class FormatError : public Error {
public:
    FormatError(const std::string& what, std::size_t line, std::size_t offset = 0)
        : Error(what + " (line " + std::to_string(line) + ", offset " + std::to_string(offset) + ")"),
          line_(line), offset_(offset) {}

    [[nodiscard]] std::size_t line() const noexcept { return line_; }
    [[nodiscard]] std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t line_;
    std::size_t offset_;
};

} // namespace odm
