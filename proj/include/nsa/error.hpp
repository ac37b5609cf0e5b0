#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace nsa {

enum class ErrorCode {
  MalformedJson,
  RaggedGrid,
  ColorOutOfRange,
  EmptyTrainSet,
  GridTooLarge,
  SizeCapExceeded,
  InvalidParams,
  MalformedProgram,
  MalformedProposal,
  SamplingExhausted,
  SourceExhausted,
  Io,
};

std::string_view to_string(ErrorCode code);

// Single exception type for the engine; callers branch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace nsa
