#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tce {

enum class ErrorKind {
  // audio_io
  NotWav,
  UnsupportedEncoding,
  WrongSampleRate,
  IoError,
  EmptyInput,
  IncompatibleConfig,
  // transcript
  ParseError,
  InvariantViolation,
  BadWindow,
  // corpus
  PoolExhausted,
  BadLength,
  WrongDimension,
  ZeroVector,
  // augment / mixer
  MissingTrack,
  NoActiveSpeaker,
  InsufficientEnrollment,
  NoDisjointConversation,
  SilentGroup,
  SpeakerLeak,
  // metrics
  ZeroReference,
  ZeroEstimate,
  LengthMismatch,
  EmptyList,
  DegenerateSample,
  // netref
  ShapeMismatch,
  UnknownVariant,
  WeightMismatch,
  InvalidConfig,
};

std::string_view to_string(ErrorKind kind);

// All library failures are reported through this type; callers switch on kind().
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace tce
