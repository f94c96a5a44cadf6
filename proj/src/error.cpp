#include "tmfwc/error.hpp"

namespace tmfwc {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::MalformedContainer: return "MalformedContainer";
    case ErrorCode::UnsupportedEncoding: return "UnsupportedEncoding";
    case ErrorCode::EmptyAudio: return "EmptyAudio";
    case ErrorCode::InvalidFraming: return "InvalidFraming";
    case ErrorCode::NegativeFrequency: return "NegativeFrequency";
    case ErrorCode::DegenerateFilter: return "DegenerateFilter";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::SampleRateMismatch: return "SampleRateMismatch";
    case ErrorCode::EmptyTrajectory: return "EmptyTrajectory";
    case ErrorCode::SignalTooShort: return "SignalTooShort";
    case ErrorCode::TooManyLevels: return "TooManyLevels";
    case ErrorCode::InvalidScale: return "InvalidScale";
    case ErrorCode::EmptySupport: return "EmptySupport";
    case ErrorCode::AliasedComponent: return "AliasedComponent";
    case ErrorCode::SingularRescale: return "SingularRescale";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::IllConditioned: return "IllConditioned";
    case ErrorCode::UnparseableName: return "UnparseableName";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::EmptyCell: return "EmptyCell";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::IoFailure: return "IoFailure";
  }
  return "Unknown";
}

ErrorCategory category_of(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::IoFailure:
      return ErrorCategory::Io;
    case ErrorCode::ConfigInvalid:
    case ErrorCode::InvalidFraming:
    case ErrorCode::NegativeFrequency:
    case ErrorCode::DegenerateFilter:
    case ErrorCode::DimensionMismatch:
    case ErrorCode::TooManyLevels:
    case ErrorCode::InvalidScale:
    case ErrorCode::EmptySupport:
    case ErrorCode::AliasedComponent:
    case ErrorCode::SingularRescale:
    case ErrorCode::IllConditioned:
      return ErrorCategory::Config;
    default:
      return ErrorCategory::Data;
  }
}

}  // namespace tmfwc
