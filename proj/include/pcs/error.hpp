#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pcs {

enum class ErrorCode {
  kTooFewSamples,
  kDegenerateSamples,
  kZeroWeightSum,
  kEmptySamples,
  kInvalidLoad,
  kEmptyStage,
  kEmptyTopology,
  kMissingLoad,
  kInvalidTopology,
  kInconsistentMatrix,
  kTooLarge,
  kBadConfig,
  kEmptyTrace,
  kParseError,
  kValidationError,
  kInsufficientTraining,
  kSaturationAbort,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library carries one of the codes above so that
// callers (and tests) can branch on the kind without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }
  // The message without the code prefix that what() carries.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace pcs
