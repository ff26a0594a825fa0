#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace embedcast {

enum class ErrorKind {
    OutOfHistory,
    LengthMismatch,
    SeriesTooShort,
    InsufficientHistory,
    EmptyLibrary,
    MissingFuture,
    NoValidSamples,
    EmptyGrid,
    InsufficientVariables,
    NonFiniteState,
    ParseError,
    MissingColumn,
    InvalidArgument,
    Io,
};

std::string_view to_string(ErrorKind kind);

// Every library failure carries a kind so callers (tests, CLI exit codes)
// can branch on it without parsing messages.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

// Raised for user-facing configuration problems; the CLI maps it to exit code 2.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
    throw Error(kind, message);
}

}  // namespace embedcast
