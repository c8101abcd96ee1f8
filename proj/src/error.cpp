#include "mlescape/error.hpp"

namespace mlescape {

std::string_view to_string(ErrorKind kind)
{
    switch (kind) {
    case ErrorKind::OutOfDomain: return "OutOfDomain";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::Singular: return "Singular";
    case ErrorKind::OutOfRegion: return "OutOfRegion";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::GeometryError: return "GeometryError";
    case ErrorKind::LinearSolveFailure: return "LinearSolveFailure";
    case ErrorKind::NonFiniteSolution: return "NonFiniteSolution";
    case ErrorKind::InsufficientData: return "InsufficientData";
    case ErrorKind::HorizonTooShort: return "HorizonTooShort";
    case ErrorKind::IoError: return "IoError";
    }
    return "Unknown";
}

int exit_code(ErrorKind kind)
{
    switch (kind) {
    case ErrorKind::ConfigError:
    case ErrorKind::OutOfDomain:
    case ErrorKind::GeometryError:
    case ErrorKind::OutOfRegion:
        return 1;
    case ErrorKind::IoError:
        return 3;
    default:
        return 2;
    }
}

} // namespace mlescape
