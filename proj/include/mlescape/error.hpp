#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mlescape {

enum class ErrorKind {
    OutOfDomain,
    NoConvergence,
    Singular,
    OutOfRegion,
    ConfigError,
    GeometryError,
    LinearSolveFailure,
    NonFiniteSolution,
    InsufficientData,
    HorizonTooShort,
    IoError,
};

std::string_view to_string(ErrorKind kind);

/// Process exit code for the CLI: 1 config, 2 numerical contract, 3 I/O.
int exit_code(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

} // namespace mlescape
