#include "axs/session.hpp"

#include <algorithm>

#include "axs/error.hpp"
#include "axs/ids.hpp"
#include "axs/translator.hpp"

namespace axs {

namespace {

using json = nlohmann::json;

template <typename T>
T get_or(const json& j, const char* key, T fallback, Errc err) {
  if (!j.contains(key) || j[key].is_null()) return fallback;
  try {
    return j[key].get<T>();
  } catch (const json::exception&) {
    throw Error(err, std::string("bad type for '") + key + "'");
  }
}

}  // namespace

void SessionSettings::validate() const {
  if (!(summary_interval_s > 0.0)) throw Error(Errc::InvalidSettings, "summary_interval_s must be > 0");
  if (!is_language_code(source_language)) throw Error(Errc::InvalidSettings, "bad source_language");
  if (!target_language.empty() && !is_language_code(target_language))
    throw Error(Errc::InvalidSettings, "bad target_language");
  if (replay_capacity == 0) throw Error(Errc::InvalidSettings, "replay_capacity must be > 0");
  if (queue_bound == 0) throw Error(Errc::InvalidSettings, "queue_bound must be > 0");
}

json SessionSettings::to_json() const {
  return {{"source_language", source_language},
          {"target_language", target_language},
          {"signing_enabled", signing_enabled},
          {"emoji_overlay", emoji_overlay},
          {"summary_interval_s", summary_interval_s},
          {"sign_source", sign_source == SignSource::SourceText ? "source" : "translation"},
          {"replay_capacity", replay_capacity},
          {"queue_bound", queue_bound}};
}

SessionSettings SessionSettings::from_json(const json& j, const SessionSettings& base) {
  if (!j.is_object()) throw Error(Errc::InvalidSettings, "settings must be an object");
  constexpr auto E = Errc::InvalidSettings;
  SessionSettings s = base;
  s.source_language = get_or(j, "source_language", s.source_language, E);
  s.target_language = get_or(j, "target_language", s.target_language, E);
  s.signing_enabled = get_or(j, "signing_enabled", s.signing_enabled, E);
  s.emoji_overlay = get_or(j, "emoji_overlay", s.emoji_overlay, E);
  s.summary_interval_s = get_or(j, "summary_interval_s", s.summary_interval_s, E);
  s.replay_capacity = get_or(j, "replay_capacity", s.replay_capacity, E);
  s.queue_bound = get_or(j, "queue_bound", s.queue_bound, E);
  const auto src = get_or<std::string>(j, "sign_source", s.sign_source == SignSource::SourceText ? "source" : "translation", E);
  if (src == "source") s.sign_source = SignSource::SourceText;
  else if (src == "translation") s.sign_source = SignSource::Translation;
  else throw Error(E, "sign_source must be 'source' or 'translation'");
  s.validate();
  return s;
}

SessionSettings SessionSettings::from_json(const json& j) { return from_json(j, SessionSettings{}); }

std::string_view to_string(Role r) noexcept { return r == Role::Speaker ? "speaker" : "viewer"; }

std::optional<Role> parse_role(std::string_view s) noexcept {
  if (s == "speaker") return Role::Speaker;
  if (s == "viewer") return Role::Viewer;
  return std::nullopt;
}

void ParticipantPrefs::validate() const {
  if (!(signing_speed >= kMinSigningSpeed && signing_speed <= kMaxSigningSpeed))
    throw Error(Errc::InvalidPrefs, "signing_speed must be within [0.25, 2.0]");
  if (!is_language_code(language)) throw Error(Errc::InvalidPrefs, "bad language code '" + language + "'");
}

json ParticipantPrefs::to_json() const {
  return {{"signing_speed", signing_speed}, {"language", language},
          {"emoji_enabled", emoji_enabled}, {"signing", signing},
          {"partials", partials},           {"sign_format", sign_format == SignFormat::Inline ? "inline" : "reference"}};
}

ParticipantPrefs ParticipantPrefs::merge_json(const json& j, const ParticipantPrefs& base) {
  if (!j.is_object()) throw Error(Errc::InvalidPrefs, "prefs must be an object");
  constexpr auto E = Errc::InvalidPrefs;
  ParticipantPrefs p = base;
  p.signing_speed = get_or(j, "signing_speed", p.signing_speed, E);
  p.language = get_or(j, "language", p.language, E);
  p.emoji_enabled = get_or(j, "emoji_enabled", p.emoji_enabled, E);
  p.signing = get_or(j, "signing", p.signing, E);
  p.partials = get_or(j, "partials", p.partials, E);
  const auto fmt = get_or<std::string>(j, "sign_format", p.sign_format == SignFormat::Inline ? "inline" : "reference", E);
  if (fmt == "inline") p.sign_format = SignFormat::Inline;
  else if (fmt == "reference") p.sign_format = SignFormat::Reference;
  else throw Error(E, "sign_format must be 'inline' or 'reference'");
  p.validate();
  return p;
}

ParticipantPrefs ParticipantPrefs::merge_json(const json& j) { return merge_json(j, ParticipantPrefs{}); }

json Participant::to_json() const {
  return {{"participant_id", participant_id},
          {"display_name", display_name},
          {"role", to_string(role)},
          {"prefs", prefs.to_json()}};
}

Session::Session(std::string session_id, SessionSettings settings)
    : id_(std::move(session_id)),
      settings_(std::move(settings)),
      created_at_(std::chrono::system_clock::now()),
      replay_(settings_.replay_capacity) {}

MembershipToken Session::join(Participant p) {
  p.prefs.validate();
  std::lock_guard lock(mu_);
  if (!live_) throw Error(Errc::SessionClosed, id_);
  const bool dup = std::any_of(members_.begin(), members_.end(),
                               [&](const Participant& m) { return m.participant_id == p.participant_id; });
  if (dup) throw Error(Errc::DuplicateParticipant, p.participant_id);
  if (members_.size() >= kMaxParticipants) throw Error(Errc::RoomFull, id_);
  MembershipToken tok{id_, p.participant_id, next_id()};
  members_.push_back(std::move(p));
  peak_ = std::max(peak_, members_.size());
  return tok;
}

bool Session::leave(const std::string& participant_id) {
  std::lock_guard lock(mu_);
  auto it = std::find_if(members_.begin(), members_.end(),
                         [&](const Participant& m) { return m.participant_id == participant_id; });
  if (it == members_.end()) return false;
  members_.erase(it);
  return true;
}

ParticipantPrefs Session::update_prefs(const std::string& participant_id, const json& patch) {
  std::lock_guard lock(mu_);
  auto it = std::find_if(members_.begin(), members_.end(),
                         [&](const Participant& m) { return m.participant_id == participant_id; });
  if (it == members_.end()) throw Error(Errc::SessionUnknown, "no participant " + participant_id);
  it->prefs = ParticipantPrefs::merge_json(patch, it->prefs);
  return it->prefs;
}

std::vector<Participant> Session::participants() const {
  std::lock_guard lock(mu_);
  return members_;
}

std::optional<Participant> Session::participant(const std::string& participant_id) const {
  std::lock_guard lock(mu_);
  for (const auto& m : members_)
    if (m.participant_id == participant_id) return m;
  return std::nullopt;
}

std::size_t Session::size() const {
  std::lock_guard lock(mu_);
  return members_.size();
}

std::size_t Session::peak_size() const {
  std::lock_guard lock(mu_);
  return peak_;
}

void Session::close() {
  std::lock_guard lock(mu_);
  live_ = false;
}

bool Session::live() const {
  std::lock_guard lock(mu_);
  return live_;
}

bool Session::admit_sequence(const std::string& speaker_id, std::string_view channel, std::uint64_t seq) {
  std::lock_guard lock(mu_);
  auto key = std::make_pair(speaker_id, std::string(channel));
  auto it = last_seq_.find(key);
  if (it != last_seq_.end() && seq <= it->second) return false;
  last_seq_[std::move(key)] = seq;
  return true;
}

std::shared_ptr<Session> SessionRegistry::create_session(const SessionSettings& settings,
                                                         std::optional<std::string> session_id) {
  settings.validate();
  std::lock_guard lock(mu_);
  std::string id = session_id ? *session_id : next_id();
  if (sessions_.contains(id)) throw Error(Errc::DuplicateId, id);
  auto s = std::make_shared<Session>(id, settings);
  sessions_.emplace(std::move(id), s);
  return s;
}

std::shared_ptr<Session> SessionRegistry::find_or_create(const std::string& session_id,
                                                         const SessionSettings& settings) {
  settings.validate();
  std::lock_guard lock(mu_);
  if (auto it = sessions_.find(session_id); it != sessions_.end() && it->second->live()) return it->second;
  auto s = std::make_shared<Session>(session_id, settings);
  sessions_[session_id] = s;
  return s;
}

std::shared_ptr<Session> SessionRegistry::find(const std::string& session_id) const {
  std::lock_guard lock(mu_);
  auto it = sessions_.find(session_id);
  return it == sessions_.end() ? nullptr : it->second;
}

void SessionRegistry::close_session(const std::string& session_id) {
  std::shared_ptr<Session> s;
  {
    std::lock_guard lock(mu_);
    auto it = sessions_.find(session_id);
    if (it == sessions_.end()) return;
    s = std::move(it->second);
    sessions_.erase(it);
  }
  s->close();
}

std::size_t SessionRegistry::size() const {
  std::lock_guard lock(mu_);
  return sessions_.size();
}

std::vector<std::string> SessionRegistry::session_ids() const {
  std::lock_guard lock(mu_);
  std::vector<std::string> ids;
  for (const auto& [id, s] : sessions_) ids.push_back(id);
  std::sort(ids.begin(), ids.end());
  return ids;
}

std::string_view to_string(Destination d) noexcept {
  switch (d) {
    case Destination::Translate: return "translate";
    case Destination::Emotion: return "emotion";
    case Destination::Signgen: return "signgen";
    case Destination::Summary: return "summary";
    case Destination::Display: return "display";
  }
  return "?";
}

std::vector<StageSubmission> route_event(Session& session, const PipelineEvent& event) {
  if (!session.live()) throw Error(Errc::SessionClosed, session.id());
  static constexpr std::string_view kChannel[] = {"partial", "utterance", "translation"};
  if (!session.admit_sequence(event.speaker_id, kChannel[static_cast<int>(event.kind)], event.seq))
    throw Error(Errc::ReorderError, "seq " + std::to_string(event.seq) + " from " + event.speaker_id);

  const auto& st = session.settings();
  std::vector<StageSubmission> out;
  auto add = [&](Destination d) { out.push_back({d, event.event_id, event.speaker_id, event.seq}); };
  switch (event.kind) {
    case EventKind::PartialSegment:
      add(Destination::Display);
      break;
    case EventKind::Utterance:
      if (!st.target_language.empty()) add(Destination::Translate);
      add(Destination::Emotion);
      if (st.signing_enabled && st.sign_source == SignSource::SourceText) add(Destination::Signgen);
      add(Destination::Summary);
      break;
    case EventKind::Translation:
      add(Destination::Display);
      if (st.signing_enabled && st.sign_source == SignSource::Translation) add(Destination::Signgen);
      break;
  }
  return out;
}

}  // namespace axs
