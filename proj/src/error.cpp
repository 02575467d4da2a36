#include "tce/error.hpp"

namespace tce {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NotWav: return "NotWav";
    case ErrorKind::UnsupportedEncoding: return "UnsupportedEncoding";
    case ErrorKind::WrongSampleRate: return "WrongSampleRate";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::IncompatibleConfig: return "IncompatibleConfig";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::InvariantViolation: return "InvariantViolation";
    case ErrorKind::BadWindow: return "BadWindow";
    case ErrorKind::PoolExhausted: return "PoolExhausted";
    case ErrorKind::BadLength: return "BadLength";
    case ErrorKind::WrongDimension: return "WrongDimension";
    case ErrorKind::ZeroVector: return "ZeroVector";
    case ErrorKind::MissingTrack: return "MissingTrack";
    case ErrorKind::NoActiveSpeaker: return "NoActiveSpeaker";
    case ErrorKind::InsufficientEnrollment: return "InsufficientEnrollment";
    case ErrorKind::NoDisjointConversation: return "NoDisjointConversation";
    case ErrorKind::SilentGroup: return "SilentGroup";
    case ErrorKind::SpeakerLeak: return "SpeakerLeak";
    case ErrorKind::ZeroReference: return "ZeroReference";
    case ErrorKind::ZeroEstimate: return "ZeroEstimate";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::EmptyList: return "EmptyList";
    case ErrorKind::DegenerateSample: return "DegenerateSample";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::UnknownVariant: return "UnknownVariant";
    case ErrorKind::WeightMismatch: return "WeightMismatch";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
  }
  return "Unknown";
}

}  // namespace tce
