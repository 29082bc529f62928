#include "axs/error.hpp"

namespace axs {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::InvalidSettings: return "INVALID_SETTINGS";
    case Errc::DuplicateId: return "DUPLICATE_ID";
    case Errc::RoomFull: return "ROOM_FULL";
    case Errc::DuplicateParticipant: return "DUPLICATE_PARTICIPANT";
    case Errc::SessionClosed: return "SESSION_CLOSED";
    case Errc::SessionUnknown: return "SESSION_UNKNOWN";
    case Errc::InvalidPrefs: return "INVALID_PREFS";
    case Errc::InvalidParams: return "INVALID_PARAMS";
    case Errc::BackendTimeout: return "BACKEND_TIMEOUT";
    case Errc::BackendUnavailable: return "BACKEND_UNAVAILABLE";
    case Errc::MalformedResponse: return "MALFORMED_RESPONSE";
    case Errc::MissingLexicon: return "MISSING_LEXICON";
    case Errc::InvalidPair: return "INVALID_PAIR";
    case Errc::PairNotRegistered: return "PAIR_NOT_REGISTERED";
    case Errc::ParseError: return "PARSE_ERROR";
    case Errc::IoError: return "IO_ERROR";
    case Errc::EmptySequence: return "EMPTY_SEQUENCE";
    case Errc::MissingSign: return "MISSING_SIGN";
    case Errc::NotInBuffer: return "NOT_IN_BUFFER";
    case Errc::WrongLandmarkCount: return "WRONG_LANDMARK_COUNT";
    case Errc::DegeneratePose: return "DEGENERATE_POSE";
    case Errc::TooShort: return "TOO_SHORT";
    case Errc::NoInputs: return "NO_INPUTS";
    case Errc::IncompleteFingerspellSet: return "INCOMPLETE_FINGERSPELL_SET";
    case Errc::EmptyWindow: return "EMPTY_WINDOW";
    case Errc::UnknownType: return "UNKNOWN_TYPE";
    case Errc::MalformedPayload: return "MALFORMED_PAYLOAD";
    case Errc::QueueFull: return "QUEUE_FULL";
    case Errc::ReorderError: return "REORDER_ERROR";
    case Errc::SlowConsumer: return "SLOW_CONSUMER";
    case Errc::JoinTimeout: return "JOIN_TIMEOUT";
    case Errc::NotJoined: return "NOT_JOINED";
    case Errc::BindFailed: return "BIND_FAILED";
    case Errc::ConnectFailed: return "CONNECT_FAILED";
    case Errc::Mismatch: return "MISMATCH";
    case Errc::NoSamples: return "NO_SAMPLES";
  }
  return "UNKNOWN";
}

bool is_retryable(Errc code) noexcept {
  return code == Errc::BackendTimeout || code == Errc::BackendUnavailable || code == Errc::QueueFull;
}

}  // namespace axs
