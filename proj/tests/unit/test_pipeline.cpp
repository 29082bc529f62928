#include <doctest.h>

#include "axs/error.hpp"
#include "axs/gateway_config.hpp"
#include "axs/loadgen.hpp"
#include "axs/pipeline.hpp"
#include "test_support.hpp"

using namespace axs;

namespace {

std::shared_ptr<const PipelineAssets> assets() {
  static auto a = load_assets(axs_test::bundled_config());
  return a;
}

struct Room {
  std::shared_ptr<Session> session;
  std::shared_ptr<LatencyLedger> ledger = std::make_shared<LatencyLedger>();
  RoomPipeline pipe;

  explicit Room(SessionSettings st = {})
      : session(std::make_shared<Session>("room", st)), pipe(session, assets(), ledger) {
    Participant p;
    p.participant_id = "spk";
    session->join(p);
  }

  std::vector<Outbound> run() {
    std::vector<Outbound> out;
    while (auto r = pipe.step()) {
      CHECK(r->errors.empty());
      out.insert(out.end(), r->outputs.begin(), r->outputs.end());
    }
    return out;
  }
};

AudioChunk chunk(std::uint64_t seq, const std::string& text) {
  ChunkParams params;
  AudioChunk c;
  c.session_id = "room";
  c.speaker_id = "spk";
  c.seq = seq;
  c.start_time = static_cast<double>(seq) * params.stride_seconds();
  c.samples.assign(params.chunk_samples(), 0);
  c.oracle_text = text;
  return c;
}

std::vector<std::string> finals(const std::vector<Outbound>& out) {
  std::vector<std::string> t;
  for (const auto& o : out)
    if (o.type == "transcript" && o.payload.value("final", false)) t.push_back(o.payload["text"]);
  return t;
}

std::size_t count(const std::vector<Outbound>& out, const std::string& type) {
  return static_cast<std::size_t>(std::count_if(out.begin(), out.end(), [&](const Outbound& o) { return o.type == type; }));
}

}  // namespace

TEST_CASE("typed text fans out to every stage") {
  Room room;
  room.pipe.submit_text("spk", "hello team", "e1");
  auto out = room.run();
  CHECK(finals(out) == std::vector<std::string>{"Hello team."});
  CHECK(count(out, "translation") == 1);
  CHECK(count(out, "emotion") == 1);
  CHECK(count(out, "sign_sequence") == 1);
  for (const auto& o : out)
    if (o.type == "translation") CHECK(o.payload["text"] == "Bonjour équipe.");
  auto rep = room.ledger->kpi_report();
  for (const auto& s : rep.stages)
    CHECK(s.count >= 1);
}

TEST_CASE("speech path equals the script") {
  load::LoadProfile profile;
  profile.script = {"good morning everyone", "we agreed to ship friday", "thank you all"};
  profile.msgs_per_client = 60;
  auto plan = load::plan_client(profile, 0);
  Room room;
  for (std::size_t k = 0; k < plan.chunk_text.size(); ++k) room.pipe.submit_chunk(chunk(k, plan.chunk_text[k]), "c");
  std::vector<Outbound> out;
  while (auto r = room.pipe.step()) out.insert(out.end(), r->outputs.begin(), r->outputs.end());

  std::vector<std::string> expect;
  for (const auto& e : plan.expected) expect.push_back(e.text);
  CHECK(finals(out) == expect);
  CHECK(expect.front() == "Good morning everyone.");
  CHECK(room.ledger->end_to_end().count() == expect.size());

  std::vector<std::uint64_t> anchors;
  for (const auto& o : out)
    if (o.type == "sign_sequence") anchors.push_back(o.source_chunk_seq);
  REQUIRE(anchors.size() == plan.expected.size());
  for (std::size_t i = 0; i < anchors.size(); ++i) CHECK(anchors[i] == plan.expected[i].last_chunk_seq);
}

TEST_CASE("departing speaker is flushed") {
  Room room;
  room.pipe.submit_chunk(chunk(0, "hello"), "c0");
  room.run();
  auto out = room.pipe.flush_speaker("spk");
  CHECK(finals(out) == std::vector<std::string>{"Hello."});
}

TEST_CASE("ingress rejects at its bound") {
  Room room;
  std::size_t rejected = 0;
  for (int i = 0; i < 70; ++i)
    if (room.pipe.submit_text("spk", "hi", "e") == Admission::Rejected) ++rejected;
  CHECK(room.pipe.ingress_depth() == 64);
  CHECK(rejected == 6);
}

TEST_CASE("on-demand summary over the session") {
  Room room;
  room.pipe.submit_text("spk", "we agreed to ship friday", "e1");
  room.pipe.submit_text("spk", "the team will review the slides", "e2");
  room.run();
  auto window = room.pipe.request_summary(room.pipe.session_time_s());
  auto rec = room.pipe.summarize(window);
  CHECK(rec.decisions == std::vector<std::string>{"We agreed to ship friday."});
  CHECK(rec.action_items.size() == 1);
  CHECK_THROWS_AS(room.pipe.request_summary(room.pipe.session_time_s()), Error);
}

TEST_CASE("audience filters") {
  SessionSettings st;
  Participant p;
  p.participant_id = "a";
  p.prefs.emoji_enabled = false;
  p.prefs.language = "fr";
  CHECK_FALSE(audience_includes({"emotion", {}, Audience::Emoji}, p, st));
  CHECK(audience_includes({"translation", {}, Audience::Language, "fr"}, p, st));
  CHECK_FALSE(audience_includes({"translation", {}, Audience::Language, "es"}, p, st));
  CHECK(audience_includes({"x", {}, Audience::Participant, "a"}, p, st));
  p.prefs.emoji_enabled = true;
  st.emoji_overlay = false;
  CHECK_FALSE(audience_includes({"emotion", {}, Audience::Emoji}, p, st));
}
