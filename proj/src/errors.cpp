#include "rstoda/errors.hpp"

namespace rstoda {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::SingularMatrix: return "SingularMatrix";
        case ErrorKind::Overflow: return "Overflow";
        case ErrorKind::NoConvergence: return "NoConvergence";
        case ErrorKind::CollisionSingularity: return "CollisionSingularity";
        case ErrorKind::ZeroVelocity: return "ZeroVelocity";
        case ErrorKind::SingularLax: return "SingularLax";
        case ErrorKind::DegenerateNodes: return "DegenerateNodes";
        case ErrorKind::ResolventSingular: return "ResolventSingular";
        case ErrorKind::PoleEvaluation: return "PoleEvaluation";
        case ErrorKind::CollisionEncountered: return "CollisionEncountered";
        case ErrorKind::StepUnderflow: return "StepUnderflow";
        case ErrorKind::ConfigError: return "ConfigError";
    }
    return "Unknown";
}

}  // namespace rstoda
