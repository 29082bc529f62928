#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "axs/latency.hpp"
#include "axs/signgen.hpp"

namespace axs {

inline constexpr std::size_t kMaxParticipants = 8;

/// Where the signing avatar takes its words from.
enum class SignSource { SourceText, Translation };

struct SessionSettings {
  std::string source_language = "en";
  /// Empty disables the translation stage.
  std::string target_language = "fr";
  bool signing_enabled = true;
  bool emoji_overlay = true;
  double summary_interval_s = 900.0;
  SignSource sign_source = SignSource::SourceText;
  std::size_t replay_capacity = 16;
  std::size_t queue_bound = 64;

  void validate() const;  // INVALID_SETTINGS
  nlohmann::json to_json() const;
  /// Missing keys keep the values of `base`. Errors: INVALID_SETTINGS.
  static SessionSettings from_json(const nlohmann::json& j, const SessionSettings& base);
  static SessionSettings from_json(const nlohmann::json& j);
};

enum class Role { Speaker, Viewer };
std::string_view to_string(Role r) noexcept;
std::optional<Role> parse_role(std::string_view s) noexcept;

/// How sign sequences reach a participant: full keyframes, or gloss ids
/// plus the dictionary version for clients holding a local copy.
enum class SignFormat { Inline, Reference };

struct ParticipantPrefs {
  double signing_speed = 1.0;
  std::string language = "en";
  bool emoji_enabled = true;
  bool signing = true;
  /// Live (non-final) captions.
  bool partials = true;
  SignFormat sign_format = SignFormat::Inline;

  void validate() const;  // INVALID_PREFS
  nlohmann::json to_json() const;
  /// Applies the keys present in `j` on top of `base`. Errors: INVALID_PREFS.
  static ParticipantPrefs merge_json(const nlohmann::json& j, const ParticipantPrefs& base);
  static ParticipantPrefs merge_json(const nlohmann::json& j);
};

struct Participant {
  std::string participant_id;
  std::string display_name;
  Role role = Role::Speaker;
  ParticipantPrefs prefs;

  nlohmann::json to_json() const;
};

struct MembershipToken {
  std::string session_id;
  std::string participant_id;
  std::string token;
};

/// Room state. All members are guarded by one mutex; the participant count
/// is checked and changed under it, so no reader ever sees more than eight.
class Session {
 public:
  Session(std::string session_id, SessionSettings settings);

  const std::string& id() const noexcept { return id_; }
  const SessionSettings& settings() const noexcept { return settings_; }
  std::chrono::system_clock::time_point created_at() const noexcept { return created_at_; }

  /// Errors: SESSION_CLOSED, ROOM_FULL, DUPLICATE_PARTICIPANT, INVALID_PREFS.
  MembershipToken join(Participant p);
  /// False when the participant was not a member.
  bool leave(const std::string& participant_id);

  /// Errors: SESSION_UNKNOWN (no such participant), INVALID_PREFS.
  ParticipantPrefs update_prefs(const std::string& participant_id, const nlohmann::json& patch);

  std::vector<Participant> participants() const;
  std::optional<Participant> participant(const std::string& participant_id) const;
  std::size_t size() const;
  /// Largest membership this session has ever had.
  std::size_t peak_size() const;

  void close();
  bool live() const;

  ReplayBuffer& replay_buffer() noexcept { return replay_; }

  /// Per-(speaker, channel) sequence gate: true and remembered when `seq` is
  /// beyond the last one accepted for that pair.
  bool admit_sequence(const std::string& speaker_id, std::string_view channel, std::uint64_t seq);

 private:
  std::string id_;
  SessionSettings settings_;
  std::chrono::system_clock::time_point created_at_;
  mutable std::mutex mu_;
  std::vector<Participant> members_;
  std::size_t peak_ = 0;
  bool live_ = true;
  ReplayBuffer replay_;
  std::map<std::pair<std::string, std::string>, std::uint64_t, std::less<>> last_seq_;
};

class SessionRegistry {
 public:
  /// Errors: INVALID_SETTINGS, DUPLICATE_ID when `session_id` is taken.
  std::shared_ptr<Session> create_session(const SessionSettings& settings = {},
                                          std::optional<std::string> session_id = std::nullopt);
  /// Existing live session, or a new one with `settings`.
  std::shared_ptr<Session> find_or_create(const std::string& session_id, const SessionSettings& settings);
  std::shared_ptr<Session> find(const std::string& session_id) const;
  /// Closes and forgets the session.
  void close_session(const std::string& session_id);
  std::size_t size() const;
  std::vector<std::string> session_ids() const;

 private:
  mutable std::mutex mu_;
  std::unordered_map<std::string, std::shared_ptr<Session>> sessions_;
};

/// Events entering the routing table.
enum class EventKind { PartialSegment, Utterance, Translation };

struct PipelineEvent {
  EventKind kind = EventKind::Utterance;
  std::string event_id;
  std::string speaker_id;
  std::uint64_t seq = 0;
};

/// A downstream destination: a processing stage, or subscriber displays.
enum class Destination { Translate, Emotion, Signgen, Summary, Display };
std::string_view to_string(Destination d) noexcept;

struct StageSubmission {
  Destination destination = Destination::Display;
  std::string event_id;
  std::string speaker_id;
  std::uint64_t seq = 0;
};

/// The routing table:
///   partial segment -> display only
///   utterance       -> translate, emotion, signgen, summary
///                      (no translate without a target language; no
///                      signgen with signing off or when signing follows
///                      the translation)
///   translation     -> display, plus signgen when signing follows it
/// Errors: SESSION_CLOSED, REORDER_ERROR when the speaker's seq does not
/// advance for this event kind.
std::vector<StageSubmission> route_event(Session& session, const PipelineEvent& event);

}  // namespace axs
