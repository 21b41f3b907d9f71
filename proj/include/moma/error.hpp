#pragma once

#include <stdexcept>
#include <string>

namespace moma {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Column/row count disagreement between an argument and its container.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Timestamps that are not strictly increasing.
class TimeOrderError : public Error {
public:
    using Error::Error;
};

/// Index or time query outside the frames currently held.
class RangeError : public Error {
public:
    using Error::Error;
};

/// Invalid argument or violated precondition.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Malformed text or binary input.
class ParseError : public Error {
public:
    explicit ParseError(const std::string& what, int line = 0)
        : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

    int line() const noexcept { return line_; }

private:
    int line_;
};

} // namespace moma
