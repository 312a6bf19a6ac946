#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rstoda {

enum class ErrorKind {
    SingularMatrix,
    Overflow,
    NoConvergence,
    CollisionSingularity,
    ZeroVelocity,
    SingularLax,
    DegenerateNodes,
    ResolventSingular,
    PoleEvaluation,
    CollisionEncountered,
    StepUnderflow,
    ConfigError,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Base exception for every failure raised by the library. The kind is
/// stable and is what the CLI reports in structured error output.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace rstoda
