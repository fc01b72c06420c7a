#include "pcs/error.hpp"

namespace pcs {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kTooFewSamples: return "TooFewSamples";
    case ErrorCode::kDegenerateSamples: return "DegenerateSamples";
    case ErrorCode::kZeroWeightSum: return "ZeroWeightSum";
    case ErrorCode::kEmptySamples: return "EmptySamples";
    case ErrorCode::kInvalidLoad: return "InvalidLoad";
    case ErrorCode::kEmptyStage: return "EmptyStage";
    case ErrorCode::kEmptyTopology: return "EmptyTopology";
    case ErrorCode::kMissingLoad: return "MissingLoad";
    case ErrorCode::kInvalidTopology: return "InvalidTopology";
    case ErrorCode::kInconsistentMatrix: return "InconsistentMatrix";
    case ErrorCode::kTooLarge: return "TooLarge";
    case ErrorCode::kBadConfig: return "BadConfig";
    case ErrorCode::kEmptyTrace: return "EmptyTrace";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kValidationError: return "ValidationError";
    case ErrorCode::kInsufficientTraining: return "InsufficientTraining";
    case ErrorCode::kSaturationAbort: return "SaturationAbort";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message),
      code_(code),
      detail_(message) {}

}  // namespace pcs
