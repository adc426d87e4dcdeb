#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fuller {

enum class ErrorKind {
  InvalidInput,
  UnknownGenerator,
  ConstantClass,
  UnsupportedModel,
  StepUnderflow,
  NonFinite,
  NoReturn,
  NewtonDiverged,
  TangentialCrossing,
  IllConditioned,
  DegenerateUnsupported,
  AmbiguousMultiplicity,
  IndexUndefined,
  NotHyperbolicElement,
  NoConvergence,
  AllSeedsFailed,
  SpectralGapTooSmall,
  PerturbationRequired,
  ClassIsPower,
  OrbitBoundExceeded,
  Stalled,
  DegenerateFinslerHessian,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& message);

}  // namespace fuller
