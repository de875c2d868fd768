#include "lorentz/errors.hpp"

namespace lorentz {

const char *to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::GrazingLaunch: return "GrazingLaunch";
    case ErrorKind::FlightCapExceeded: return "FlightCapExceeded";
    case ErrorKind::SingularityStraddle: return "SingularityStraddle";
    case ErrorKind::NonPrimitive: return "NonPrimitive";
    case ErrorKind::ExponentOutOfRange: return "ExponentOutOfRange";
    case ErrorKind::ClosedCorridor: return "ClosedCorridor";
    case ErrorKind::NoTangentIntersection: return "NoTangentIntersection";
    case ErrorKind::ChartViolation: return "ChartViolation";
    case ErrorKind::InsufficientTrials: return "InsufficientTrials";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::UnknownExperiment: return "UnknownExperiment";
    case ErrorKind::UnsupportedKind: return "UnsupportedKind";
    case ErrorKind::EmptyData: return "EmptyData";
    case ErrorKind::Io: return "IoError";
  }
  return "Unknown";
}

}  // namespace lorentz
