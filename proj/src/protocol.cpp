#include "axs/protocol.hpp"

#include <algorithm>
#include <chrono>
#include <cstring>

#include "axs/ids.hpp"
#include "axs/text.hpp"

namespace axs::wire {

namespace {

using json = nlohmann::json;

[[noreturn]] void malformed(const std::string& what) { throw Error(Errc::MalformedPayload, what); }

const json& field(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) malformed(std::string("missing field '") + key + "'");
  return *it;
}

std::string str_field(const json& obj, const char* key, bool required) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) {
    if (required) malformed(std::string("missing field '") + key + "'");
    return {};
  }
  if (!it->is_string()) malformed(std::string("field '") + key + "' must be a string");
  return it->get<std::string>();
}

template <std::size_t N>
void put_points(json& out, const std::array<Vec3f, N>& pts) {
  out = json::array();
  auto& arr = out.get_ref<json::array_t&>();
  arr.reserve(N * 3);
  for (const auto& p : pts) {
    arr.emplace_back(p.x);
    arr.emplace_back(p.y);
    arr.emplace_back(p.z);
  }
}

template <std::size_t N>
void get_points(const json& in, std::array<Vec3f, N>& pts, const char* what) {
  if (!in.is_array() || in.size() != N * 3) malformed(std::string(what) + " must hold " + std::to_string(N * 3) + " numbers");
  for (std::size_t i = 0; i < N; ++i) {
    const auto& x = in[3 * i];
    const auto& y = in[3 * i + 1];
    const auto& z = in[3 * i + 2];
    if (!x.is_number() || !y.is_number() || !z.is_number()) malformed(std::string(what) + " holds a non-number");
    pts[i] = {x.get<float>(), y.get<float>(), z.get<float>()};
  }
}

std::string_view kind_name(GlossKind k) { return k == GlossKind::Dictionary ? "dictionary" : "fingerspell"; }

}  // namespace

json Envelope::to_json() const {
  return {{"type", type},         {"session_id", session_id}, {"sender_id", sender_id},
          {"event_id", event_id}, {"ts_ms", ts_ms},           {"payload", payload}};
}

std::string Envelope::dump() const { return to_json().dump(-1, ' ', false, json::error_handler_t::replace); }

const std::vector<std::string>& message_types() {
  static const std::vector<std::string> types = {
      "join",         "joined",        "presence", "audio_chunk",     "text_message",   "transcript", "translation",
      "emotion",      "sign_sequence", "summary",  "request_summary", "replay_request", "set_prefs",  "error"};
  return types;
}

bool is_message_type(std::string_view type) {
  const auto& t = message_types();
  return std::find(t.begin(), t.end(), type) != t.end();
}

Envelope parse_envelope(std::string_view text) {
  json j = json::parse(text.begin(), text.end(), nullptr, false);
  if (j.is_discarded()) malformed("not valid JSON");
  if (!j.is_object()) malformed("envelope must be a JSON object");
  Envelope e;
  e.type = str_field(j, "type", true);
  if (!is_message_type(e.type)) throw Error(Errc::UnknownType, "unknown message type '" + e.type + "'");
  e.session_id = str_field(j, "session_id", false);
  e.sender_id = str_field(j, "sender_id", false);
  e.event_id = str_field(j, "event_id", false);
  if (auto it = j.find("ts_ms"); it != j.end() && !it->is_null()) {
    if (!it->is_number()) malformed("ts_ms must be a number");
    e.ts_ms = it->get<std::int64_t>();
  }
  if (auto it = j.find("payload"); it != j.end() && !it->is_null()) {
    if (!it->is_object()) malformed("payload must be an object");
    e.payload = std::move(*it);
  }
  return e;
}

std::int64_t now_ms() {
  using namespace std::chrono;
  return duration_cast<milliseconds>(steady_clock::now().time_since_epoch()).count();
}

Envelope make_envelope(std::string type, std::string session_id, json payload, std::string sender_id) {
  Envelope e;
  e.type = std::move(type);
  e.session_id = std::move(session_id);
  e.sender_id = std::move(sender_id);
  e.event_id = next_id();
  e.ts_ms = now_ms();
  e.payload = std::move(payload);
  return e;
}

Envelope make_error(Errc code, std::string_view message, std::string_view session_id, std::string_view ref_event_id) {
  json p = {{"code", to_string(code)}, {"message", message}, {"retryable", is_retryable(code)}};
  p["ref_event_id"] = ref_event_id.empty() ? json(nullptr) : json(ref_event_id);
  return make_envelope("error", std::string(session_id), std::move(p));
}

json audio_chunk_payload(const AudioChunk& c) {
  std::vector<std::uint8_t> bytes(c.samples.size() * 2);
  for (std::size_t i = 0; i < c.samples.size(); ++i) {
    const auto v = static_cast<std::uint16_t>(c.samples[i]);
    bytes[2 * i] = static_cast<std::uint8_t>(v & 0xff);
    bytes[2 * i + 1] = static_cast<std::uint8_t>(v >> 8);
  }
  json p = {{"seq", c.seq}, {"sample_rate", c.sample_rate}, {"audio_b64", text::base64_encode(bytes)}};
  if (c.oracle_text) p["oracle_text"] = *c.oracle_text;
  return p;
}

AudioChunk decode_audio_chunk(const json& p, const ChunkParams& params, const std::string& session_id,
                              const std::string& speaker_id) {
  const auto& seq = field(p, "seq");
  if (!seq.is_number_unsigned() && !(seq.is_number_integer() && seq.get<std::int64_t>() >= 0))
    malformed("seq must be a non-negative integer");
  AudioChunk c;
  c.session_id = session_id;
  c.speaker_id = speaker_id;
  c.seq = seq.get<std::uint64_t>();
  c.sample_rate = params.sample_rate;
  if (auto it = p.find("sample_rate"); it != p.end() && !it->is_null()) {
    if (!it->is_number_integer() || it->get<std::int64_t>() != params.sample_rate)
      malformed("sample_rate must be " + std::to_string(params.sample_rate));
  }
  const auto& b64 = field(p, "audio_b64");
  if (!b64.is_string()) malformed("audio_b64 must be a string");
  const auto& s = b64.get_ref<const std::string&>();
  auto bytes = text::base64_decode(s);
  if (!bytes) malformed("audio_b64 is not valid base64");
  if (bytes->size() != params.chunk_samples() * 2)
    malformed("audio must hold " + std::to_string(params.chunk_samples()) + " 16-bit samples");
  c.samples.resize(params.chunk_samples());
  std::memcpy(c.samples.data(), bytes->data(), bytes->size());  // little-endian host
  c.start_time = static_cast<double>(c.seq) * params.stride_seconds();
  c.duration = params.chunk_seconds();
  c.content_duration = c.duration;
  if (auto it = p.find("oracle_text"); it != p.end() && !it->is_null()) {
    if (!it->is_string()) malformed("oracle_text must be a string");
    c.oracle_text = it->get<std::string>();
  }
  return c;
}

json transcript_payload(const Utterance& u) {
  return {{"speaker_id", u.speaker_id}, {"utterance_id", u.utterance_id}, {"text", u.text},
          {"t0", u.t0},                 {"t1", u.t1},                     {"language", u.language},
          {"final", true},              {"chunk_seq", u.last_chunk_seq}};
}

json partial_transcript_payload(const std::string& speaker_id, std::uint64_t chunk_seq, const std::string& text,
                                double t0, double t1) {
  return {{"speaker_id", speaker_id}, {"utterance_id", nullptr}, {"text", text}, {"t0", t0},
          {"t1", t1},                 {"final", false},          {"chunk_seq", chunk_seq}};
}

json translation_payload(const Translation& t, const std::string& speaker_id) {
  return {{"speaker_id", speaker_id},   {"utterance_id", t.utterance_id}, {"source", t.pair.source},
          {"target", t.pair.target},    {"text", t.target_text},          {"source_text", t.source_text},
          {"latency_ms", t.latency_ms}};
}

json emotion_payload(const EmotionLabel& e, const std::string& speaker_id) {
  return {{"speaker_id", speaker_id},
          {"utterance_id", e.utterance_id},
          {"label", to_string(e.label)},
          {"confidence", e.confidence},
          {"emoji", emoji_utf8(e.label)}};
}

json sign_sequence_payload(const AnimationSequence& base, SignFormat format, std::uint64_t source_chunk_seq,
                           bool replay, std::optional<double> speed) {
  std::optional<AnimationSequence> retimed;
  if (speed && *speed != base.speed && format == SignFormat::Inline) retimed = respeed(base, *speed);
  const AnimationSequence& seq = retimed ? *retimed : base;
  const double v = speed ? *speed : seq.speed;
  if (speed) check_signing_speed(v);
  json glosses = json::array();
  for (const auto& g : seq.glosses)
    glosses.push_back({{"gloss_id", g.gloss_id}, {"kind", kind_name(g.kind)}, {"span", {g.span_first, g.span_last}}});
  json clips = json::array();
  for (const auto& c : seq.clips)
    clips.push_back({{"gloss_id", c.gloss_id}, {"first_frame", c.first_frame}, {"frame_count", c.frame_count}});
  json p = {{"sequence_id", seq.sequence_id},
            {"utterance_id", seq.utterance_id},
            {"speaker_id", seq.speaker_id},
            {"dictionary_version", seq.dictionary_version},
            {"format", format == SignFormat::Inline ? "inline" : "reference"},
            {"speed", v},
            {"fps", kClipFps * v},
            {"transition_frames", seq.transition_frames},
            {"frame_count", seq.frames.size()},
            {"total_duration", sequence_duration(seq.frames.size(), v)},
            {"glosses", std::move(glosses)},
            {"clips", std::move(clips)},
            {"source_chunk_seq", source_chunk_seq},
            {"replay", replay}};
  if (format == SignFormat::Inline) {
    json frames = json::array();
    frames.get_ref<json::array_t&>().reserve(seq.frames.size());
    for (const auto& f : seq.frames) {
      json jf = json::object();
      jf["t"] = f.t;
      put_points(jf["pose"], f.pose);
      put_points(jf["left_hand"], f.left_hand);
      put_points(jf["right_hand"], f.right_hand);
      if (f.face) put_points(jf["face"], *f.face);
      else jf["face"] = nullptr;
      frames.push_back(std::move(jf));
    }
    p["frames"] = std::move(frames);
  }
  return p;
}

AnimationSequence decode_sign_sequence(const json& p) {
  if (!p.is_object()) malformed("sign_sequence payload must be an object");
  AnimationSequence s;
  try {
    s.sequence_id = p.at("sequence_id").get<std::string>();
    s.utterance_id = p.value("utterance_id", std::string{});
    s.speaker_id = p.value("speaker_id", std::string{});
    s.dictionary_version = p.at("dictionary_version").get<std::string>();
    s.speed = p.at("speed").get<double>();
    s.transition_frames = p.at("transition_frames").get<int>();
    s.total_duration = p.at("total_duration").get<double>();
    for (const auto& g : p.at("glosses")) {
      Gloss gl;
      gl.gloss_id = g.at("gloss_id").get<std::string>();
      gl.kind = g.at("kind").get<std::string>() == "fingerspell" ? GlossKind::Fingerspell : GlossKind::Dictionary;
      gl.span_first = g.at("span").at(0).get<std::size_t>();
      gl.span_last = g.at("span").at(1).get<std::size_t>();
      s.glosses.push_back(std::move(gl));
    }
    for (const auto& c : p.at("clips"))
      s.clips.push_back({c.at("gloss_id").get<std::string>(), c.at("first_frame").get<std::size_t>(),
                         c.at("frame_count").get<std::size_t>()});
  } catch (const json::exception& e) {
    malformed(std::string("sign_sequence: ") + e.what());
  }
  const auto& frames = field(p, "frames");
  if (!frames.is_array()) malformed("frames must be an array");
  for (const auto& jf : frames) {
    Keyframe k;
    if (!jf.is_object() || !jf.contains("t") || !jf["t"].is_number()) malformed("frame lacks t");
    k.t = jf["t"].get<double>();
    get_points(field(jf, "pose"), k.pose, "pose");
    get_points(field(jf, "left_hand"), k.left_hand, "left_hand");
    get_points(field(jf, "right_hand"), k.right_hand, "right_hand");
    if (auto it = jf.find("face"); it != jf.end() && !it->is_null()) {
      std::array<Vec3f, kFaceLandmarks> face{};
      get_points(*it, face, "face");
      k.face = face;
    }
    s.frames.push_back(std::move(k));
  }
  return s;
}

json summary_payload(const SummaryRecord& r) { return r.to_json(); }

}  // namespace axs::wire
