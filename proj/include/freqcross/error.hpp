#pragma once

#include <stdexcept>
#include <string>

namespace freqcross {

// Every failure the library can report, so callers (and tests) can match on
// the condition instead of parsing messages.
enum class ErrorKind {
  // imaging
  MalformedImage,
  UnsupportedFormat,
  DimensionTooSmall,
  InvalidSpec,
  // spectrum
  EmptyInput,
  NotCentered,
  MismatchedBins,
  EmptyClass,
  // neural
  ShapeMismatch,
  LengthMismatch,
  NoTape,
  NonDeterministicFragment,
  // model
  InvalidConfig,
  CorruptFile,
  VersionUnsupported,
  // datapipe
  MalformedRow,
  DuplicatePath,
  UnknownLabel,
  UnknownSplit,
  EmptySplit,
  IoFailure,
  // evalkit
  EmptySet,
  SingleClass,
  NoPositives,
  DegenerateRank,
  // trainer
  NonFiniteLoss,
  // cli / config files
  BadConfig,
};

const char* error_kind_name(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(error_kind_name(kind)) + ": " + message),
        kind_(kind),
        message_(message) {}

  ErrorKind kind() const { return kind_; }
  // The message without the kind prefix, for callers that rewrap errors.
  const std::string& message() const { return message_; }

 private:
  ErrorKind kind_;
  std::string message_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace freqcross
