#include "fuller/error.hpp"

namespace fuller {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidInput: return "InvalidInput";
    case ErrorKind::UnknownGenerator: return "UnknownGenerator";
    case ErrorKind::ConstantClass: return "ConstantClass";
    case ErrorKind::UnsupportedModel: return "UnsupportedModel";
    case ErrorKind::StepUnderflow: return "StepUnderflow";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::NoReturn: return "NoReturn";
    case ErrorKind::NewtonDiverged: return "NewtonDiverged";
    case ErrorKind::TangentialCrossing: return "TangentialCrossing";
    case ErrorKind::IllConditioned: return "IllConditioned";
    case ErrorKind::DegenerateUnsupported: return "DegenerateUnsupported";
    case ErrorKind::AmbiguousMultiplicity: return "AmbiguousMultiplicity";
    case ErrorKind::IndexUndefined: return "IndexUndefined";
    case ErrorKind::NotHyperbolicElement: return "NotHyperbolicElement";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::AllSeedsFailed: return "AllSeedsFailed";
    case ErrorKind::SpectralGapTooSmall: return "SpectralGapTooSmall";
    case ErrorKind::PerturbationRequired: return "PerturbationRequired";
    case ErrorKind::ClassIsPower: return "ClassIsPower";
    case ErrorKind::OrbitBoundExceeded: return "OrbitBoundExceeded";
    case ErrorKind::Stalled: return "Stalled";
    case ErrorKind::DegenerateFinslerHessian: return "DegenerateFinslerHessian";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

void fail(ErrorKind kind, const std::string& message) { throw Error(kind, message); }

}  // namespace fuller
