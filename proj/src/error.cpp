#include "ptq/error.hpp"

namespace ptq {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::MalformedHeader: return "MalformedHeader";
    case Errc::UnsupportedDtype: return "UnsupportedDtype";
    case Errc::FortranOrderUnsupported: return "FortranOrderUnsupported";
    case Errc::NonFiniteValue: return "NonFiniteValue";
    case Errc::TruncatedPayload: return "TruncatedPayload";
    case Errc::IoError: return "IoError";
    case Errc::MalformedManifest: return "MalformedManifest";
    case Errc::DuplicateTensorId: return "DuplicateTensorId";
    case Errc::MissingTensorFile: return "MissingTensorFile";
    case Errc::EmptySamples: return "EmptySamples";
    case Errc::KExceedsSamples: return "KExceedsSamples";
    case Errc::SizeExceedsPopulation: return "SizeExceedsPopulation";
    case Errc::NoLengthData: return "NoLengthData";
    case Errc::UnknownTensorId: return "UnknownTensorId";
    case Errc::InvalidBitWidth: return "InvalidBitWidth";
    case Errc::InvertedRange: return "InvertedRange";
    case Errc::CodeOutOfDomain: return "CodeOutOfDomain";
    case Errc::NonPositiveSigma: return "NonPositiveSigma";
    case Errc::LogDomainError: return "LogDomainError";
    case Errc::BreakpointOrderViolation: return "BreakpointOrderViolation";
    case Errc::NonConvergence: return "NonConvergence";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::UnknownTag: return "UnknownTag";
    case Errc::MissingRange: return "MissingRange";
    case Errc::InvalidSpec: return "InvalidSpec";
    case Errc::InvalidConfig: return "InvalidConfig";
  }
  return "Unknown";
}

ErrorClass error_class(Errc code) noexcept {
  switch (code) {
    case Errc::InvalidConfig:
    case Errc::InvalidBitWidth:
    case Errc::InvalidSpec:
      return ErrorClass::Usage;
    case Errc::NonConvergence:
    case Errc::LogDomainError:
    case Errc::BreakpointOrderViolation:
      return ErrorClass::Numerical;
    default:
      return ErrorClass::Data;
  }
}

}  // namespace ptq
