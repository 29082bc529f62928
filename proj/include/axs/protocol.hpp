#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "axs/chunker.hpp"
#include "axs/emotion.hpp"
#include "axs/error.hpp"
#include "axs/session.hpp"
#include "axs/signgen.hpp"
#include "axs/summarizer.hpp"
#include "axs/translator.hpp"

namespace axs::wire {

/// Every message on /ws is one JSON text frame holding an envelope.
struct Envelope {
  std::string type;
  std::string session_id;
  std::string sender_id;
  std::string event_id;
  std::int64_t ts_ms = 0;
  nlohmann::json payload = nlohmann::json::object();

  nlohmann::json to_json() const;
  std::string dump() const;
};

/// join, joined, presence, audio_chunk, text_message, transcript,
/// translation, emotion, sign_sequence, summary, request_summary,
/// replay_request, set_prefs, error
const std::vector<std::string>& message_types();
bool is_message_type(std::string_view type);

/// Errors: MALFORMED_PAYLOAD (not JSON, not an object, missing or mistyped
/// envelope field), UNKNOWN_TYPE.
Envelope parse_envelope(std::string_view text);

/// Server-originated envelope stamped with a fresh event id and the server clock.
Envelope make_envelope(std::string type, std::string session_id, nlohmann::json payload,
                       std::string sender_id = "server");

Envelope make_error(Errc code, std::string_view message, std::string_view session_id = {},
                    std::string_view ref_event_id = {});

std::int64_t now_ms();  // steady clock

// audio_chunk: {seq, sample_rate, audio_b64, oracle_text?}. start_time and
// duration follow from seq and the server's chunk parameters.
nlohmann::json audio_chunk_payload(const AudioChunk& chunk);
/// Errors: MALFORMED_PAYLOAD (fields, base64, sample count != chunk length).
AudioChunk decode_audio_chunk(const nlohmann::json& payload, const ChunkParams& params,
                              const std::string& session_id, const std::string& speaker_id);

nlohmann::json transcript_payload(const Utterance& u);
nlohmann::json partial_transcript_payload(const std::string& speaker_id, std::uint64_t chunk_seq,
                                          const std::string& text, double t0, double t1);
nlohmann::json translation_payload(const Translation& t, const std::string& speaker_id);
nlohmann::json emotion_payload(const EmotionLabel& e, const std::string& speaker_id);

/// Inline form carries keyframes as flat float arrays; reference form
/// carries glosses and the dictionary version only. `speed` retimes the
/// sequence for one recipient.
nlohmann::json sign_sequence_payload(const AnimationSequence& seq, SignFormat format, std::uint64_t source_chunk_seq,
                                     bool replay = false, std::optional<double> speed = std::nullopt);
/// Rebuilds an inline sign_sequence payload. Errors: MALFORMED_PAYLOAD.
AnimationSequence decode_sign_sequence(const nlohmann::json& payload);

nlohmann::json summary_payload(const SummaryRecord& r);

}  // namespace axs::wire
