#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tmfwc {

enum class ErrorCode {
  MalformedContainer,
  UnsupportedEncoding,
  EmptyAudio,
  InvalidFraming,
  NegativeFrequency,
  DegenerateFilter,
  DimensionMismatch,
  SampleRateMismatch,
  EmptyTrajectory,
  SignalTooShort,
  TooManyLevels,
  InvalidScale,
  EmptySupport,
  AliasedComponent,
  SingularRescale,
  InsufficientData,
  IllConditioned,
  UnparseableName,
  EmptyDataset,
  EmptyCell,
  ConfigInvalid,
  IoFailure,
};

std::string_view to_string(ErrorCode code) noexcept;

// Failure category used by the command-line front end to pick an exit code.
enum class ErrorCategory { Io, Config, Data };

ErrorCategory category_of(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), detail_(what) {}

  ErrorCode code() const noexcept { return code_; }
  // The message without the code prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace tmfwc
