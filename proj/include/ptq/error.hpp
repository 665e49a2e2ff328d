#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ptq {

enum class Errc {
  // tensor-io
  MalformedHeader,
  UnsupportedDtype,
  FortranOrderUnsupported,
  NonFiniteValue,
  TruncatedPayload,
  IoError,
  MalformedManifest,
  DuplicateTensorId,
  MissingTensorFile,
  // calibration
  EmptySamples,
  KExceedsSamples,
  SizeExceedsPopulation,
  NoLengthData,
  UnknownTensorId,
  // quant-core
  InvalidBitWidth,
  InvertedRange,
  CodeOutOfDomain,
  // quant-piecewise
  NonPositiveSigma,
  LogDomainError,
  BreakpointOrderViolation,
  NonConvergence,
  // analysis
  ShapeMismatch,
  UnknownTag,
  MissingRange,
  InvalidSpec,
  // cli
  InvalidConfig,
};

std::string_view errc_name(Errc code) noexcept;

/// Coarse classes used for the CLI exit-code contract.
enum class ErrorClass { Usage, Data, Numerical };

ErrorClass error_class(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace ptq
