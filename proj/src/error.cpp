#include "nsa/error.hpp"

namespace nsa {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedJson: return "MalformedJson";
    case ErrorCode::RaggedGrid: return "RaggedGrid";
    case ErrorCode::ColorOutOfRange: return "ColorOutOfRange";
    case ErrorCode::EmptyTrainSet: return "EmptyTrainSet";
    case ErrorCode::GridTooLarge: return "GridTooLarge";
    case ErrorCode::SizeCapExceeded: return "SizeCapExceeded";
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::MalformedProgram: return "MalformedProgram";
    case ErrorCode::MalformedProposal: return "MalformedProposal";
    case ErrorCode::SamplingExhausted: return "SamplingExhausted";
    case ErrorCode::SourceExhausted: return "SourceExhausted";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace nsa
