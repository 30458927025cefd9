#pragma once

#include <stdexcept>
#include <string>

namespace esia {

enum class ErrorKind {
    NotFound,
    UnsupportedFormat,
    CorruptFile,
    IoError,
    InvalidArgument,
    DimensionMismatch,
    ImageTooSmall,
    InvalidConfig,
    OverlappingEvents,
    OutOfRange,
    PacketCountMismatch,
    ParseError,
    MissingField,
    DuplicateKey,
    ZeroBaseline,
    MissingModel,
    InsufficientData,
};

/// Single exception type for the whole library; `kind()` is stable and is
/// what the CLI maps to exit codes.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string message)
        : std::runtime_error(std::move(message)), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void raise(ErrorKind kind, std::string message) {
    throw Error(kind, std::move(message));
}

}  // namespace esia
