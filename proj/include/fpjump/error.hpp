#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fpjump {

/// Invalid user input: unknown config keys, malformed values, bad expressions.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Expression syntax error. `offset` is the byte offset into the source text.
class ParseError : public ConfigError {
public:
    ParseError(const std::string& message, std::size_t offset)
        : ConfigError(message + " at offset " + std::to_string(offset)), offset_(offset) {}

    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

/// A numerical precondition does not hold (CFL violation, lambda below the
/// largest exit rate, non-positive density, series too long, ...).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Expression evaluation left the real domain (division by zero, sqrt of a
/// negative number, overflow).
class DomainError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// A structural invariant that holds by construction was found broken.
class InternalError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

}  // namespace fpjump
