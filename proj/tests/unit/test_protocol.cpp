#include <doctest.h>

#include <random>

#include "axs/error.hpp"
#include "axs/protocol.hpp"
#include "axs/text.hpp"
#include "test_support.hpp"

using namespace axs;
using json = nlohmann::json;

namespace {

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return Errc::ParseError;
}

}  // namespace

TEST_CASE("fourteen message types") {
  const std::vector<std::string> expect = {"join",          "joined",         "presence",   "audio_chunk", "text_message",
                                           "transcript",    "translation",    "emotion",    "sign_sequence",
                                           "summary",       "request_summary", "replay_request", "set_prefs", "error"};
  CHECK(wire::message_types().size() == 14);
  for (const auto& t : expect) CHECK(wire::is_message_type(t));
  CHECK_FALSE(wire::is_message_type("ping2"));
}

TEST_CASE("envelope round trip") {
  auto e = wire::make_envelope("transcript", "s1", {{"text", "Hi."}});
  auto back = wire::parse_envelope(e.dump());
  CHECK(back.type == "transcript");
  CHECK(back.session_id == "s1");
  CHECK(back.sender_id == "server");
  CHECK(back.event_id == e.event_id);
  CHECK(back.payload == e.payload);
}

TEST_CASE("envelope decode errors") {
  CHECK(code_of([] { wire::parse_envelope("{nope"); }) == Errc::MalformedPayload);
  CHECK(code_of([] { wire::parse_envelope("[1,2]"); }) == Errc::MalformedPayload);
  CHECK(code_of([] { wire::parse_envelope(R"({"session_id":"x"})"); }) == Errc::MalformedPayload);
  CHECK(code_of([] { wire::parse_envelope(R"({"type":7})"); }) == Errc::MalformedPayload);
  CHECK(code_of([] { wire::parse_envelope(R"({"type":"ping2"})"); }) == Errc::UnknownType);
  CHECK(code_of([] { wire::parse_envelope(R"({"type":"join","payload":[1]})"); }) == Errc::MalformedPayload);
  CHECK(code_of([] { wire::parse_envelope(R"({"type":"join","ts_ms":"x"})"); }) == Errc::MalformedPayload);
}

TEST_CASE("random bytes never escape as anything but protocol errors") {
  std::mt19937 rng(3);
  const std::string alphabet = "{}[]\":,ab01 \\tnulretyp";
  for (int i = 0; i < 3000; ++i) {
    std::string s(rng() % 40, ' ');
    for (auto& c : s) c = alphabet[rng() % alphabet.size()];
    try {
      wire::parse_envelope(s);
    } catch (const Error& e) {
      CHECK((e.code() == Errc::MalformedPayload || e.code() == Errc::UnknownType));
    }
  }
}

TEST_CASE("error payload shape") {
  auto e = wire::make_error(Errc::QueueFull, "busy", "s1", "ev-9");
  CHECK(e.type == "error");
  CHECK(e.payload["code"] == "QUEUE_FULL");
  CHECK(e.payload["message"] == "busy");
  CHECK(e.payload["retryable"] == true);
  CHECK(e.payload["ref_event_id"] == "ev-9");
  auto f = wire::make_error(Errc::RoomFull, "full");
  CHECK(f.payload["retryable"] == false);
  CHECK(f.payload["ref_event_id"].is_null());
}

TEST_CASE("audio chunk encode and decode") {
  ChunkParams params;
  AudioChunk c;
  c.seq = 3;
  c.samples.assign(params.chunk_samples(), 0);
  for (std::size_t i = 0; i < c.samples.size(); ++i) c.samples[i] = static_cast<std::int16_t>(i * 7);
  c.oracle_text = "hello there";
  auto p = wire::audio_chunk_payload(c);
  auto d = wire::decode_audio_chunk(p, params, "s", "spk");
  CHECK(d.samples == c.samples);
  CHECK(d.start_time == doctest::Approx(1.5));
  CHECK(d.oracle_text == "hello there");
  CHECK(d.speaker_id == "spk");

  auto bad = p;
  bad["audio_b64"] = "!!";
  CHECK(code_of([&] { wire::decode_audio_chunk(bad, params, "s", "x"); }) == Errc::MalformedPayload);
  bad = p;
  bad["seq"] = -1;
  CHECK(code_of([&] { wire::decode_audio_chunk(bad, params, "s", "x"); }) == Errc::MalformedPayload);
  bad = p;
  bad["sample_rate"] = 8000;
  CHECK(code_of([&] { wire::decode_audio_chunk(bad, params, "s", "x"); }) == Errc::MalformedPayload);
  bad = p;
  bad["audio_b64"] = text::base64_encode(std::vector<std::uint8_t>(10, 0));
  CHECK(code_of([&] { wire::decode_audio_chunk(bad, params, "s", "x"); }) == Errc::MalformedPayload);
}

TEST_CASE("sign sequence payloads") {
  auto dict = axs_test::make_dictionary({"HELLO", "TEAM"}, 12);
  auto seq = assemble_animation(tokenize_to_glosses("hello team", dict), dict);
  auto inl = wire::sign_sequence_payload(seq, SignFormat::Inline, 4);
  auto back = wire::decode_sign_sequence(inl);
  CHECK(back.frames.size() == seq.frames.size());
  CHECK(back.total_duration == doctest::Approx(seq.total_duration));
  CHECK(back.frames[5].pose[3].x == seq.frames[5].pose[3].x);
  CHECK(inl["source_chunk_seq"] == 4);

  auto slow = wire::sign_sequence_payload(seq, SignFormat::Inline, 4, false, 0.5);
  CHECK(slow["total_duration"].get<double>() == doctest::Approx(2 * seq.total_duration));

  auto ref = wire::sign_sequence_payload(seq, SignFormat::Reference, 4);
  CHECK_FALSE(ref.contains("frames"));
  CHECK(ref["dictionary_version"] == "test-dict");
  CHECK(ref["glosses"].size() == 2);
  CHECK(code_of([&] { wire::decode_sign_sequence(ref); }) == Errc::MalformedPayload);
}

TEST_CASE("close statuses used by the gateway") {
  CHECK(4000 + static_cast<int>(Errc::SlowConsumer) == 4029);
  CHECK(4000 + static_cast<int>(Errc::JoinTimeout) == 4030);
  CHECK(to_string(Errc::IncompleteFingerspellSet) == "INCOMPLETE_FINGERSPELL_SET");
}
