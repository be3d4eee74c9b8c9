#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace utrack {

enum class ErrorCode {
  DegenerateCorrespondence,
  DegenerateBox,
  DimensionMismatch,
  DuplicateEmbedding,
  EmptyHistory,
  InsufficientData,
  InvalidConfig,
  IoFailure,
  MissingEmbedding,
  MissingGroundTruth,
  NoCandidates,
  NoHistory,
  NonPositiveSize,
  OutOfOrderFrame,
  ParseError,
  TooLarge,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library carries one of the codes above. The CLI
// maps them to exit code 2 (data error).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace utrack
