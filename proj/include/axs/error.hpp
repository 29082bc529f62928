#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace axs {

/// Error codes shared by every pipeline module and surfaced verbatim on the
/// wire in `error` envelopes.
enum class Errc {
  // sessions / rooms
  InvalidSettings,
  DuplicateId,
  RoomFull,
  DuplicateParticipant,
  SessionClosed,
  SessionUnknown,
  InvalidPrefs,
  // chunking and recognition
  InvalidParams,
  BackendTimeout,
  BackendUnavailable,
  MalformedResponse,
  // translation
  MissingLexicon,
  InvalidPair,
  PairNotRegistered,
  // assets
  ParseError,
  IoError,
  // sign generation
  EmptySequence,
  MissingSign,
  NotInBuffer,
  // landmark compiler
  WrongLandmarkCount,
  DegeneratePose,
  TooShort,
  NoInputs,
  IncompleteFingerspellSet,
  // summariser
  EmptyWindow,
  // gateway
  UnknownType,
  MalformedPayload,
  QueueFull,
  ReorderError,
  SlowConsumer,
  JoinTimeout,
  NotJoined,
  BindFailed,
  // loadgen
  ConnectFailed,
  Mismatch,
  NoSamples,
};

/// Wire spelling, e.g. `Errc::RoomFull` -> "ROOM_FULL".
std::string_view to_string(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}
  explicit Error(Errc code) : std::runtime_error(std::string(to_string(code))), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

/// True for errors a producer may retry (backend hiccups, full queues).
bool is_retryable(Errc code) noexcept;

}  // namespace axs
