#include <doctest.h>

#include <httplib.h>

#include "axs/error.hpp"
#include "axs/gateway.hpp"
#include "axs/text.hpp"
#include "test_support.hpp"

using namespace axs;
using axs_test::envelope;
using axs_test::WsClient;
using json = nlohmann::json;

namespace {

std::shared_ptr<const PipelineAssets> shared_assets() {
  static auto a = load_assets(axs_test::bundled_config());
  return a;
}

struct Running {
  std::unique_ptr<Gateway> gw;
  explicit Running(GatewayConfig cfg = axs_test::bundled_config()) {
    gw = std::make_unique<Gateway>(std::move(cfg), shared_assets());
    gw->start();
  }
  ~Running() { gw->stop(); }
  unsigned short port() const { return gw->port(); }
};

json join_as(WsClient& c, const std::string& room, const std::string& who, json prefs = json::object()) {
  c.send(envelope("join", room, who, {{"display_name", who}, {"prefs", std::move(prefs)}}));
  auto j = c.recv_type("joined");
  REQUIRE(j);
  return *j;
}

json chunk_payload(std::uint64_t seq, const std::string& text) {
  static const std::string zeros = text::base64_encode(std::vector<std::uint8_t>(32000, 0));
  return {{"seq", seq}, {"sample_rate", 16000}, {"audio_b64", zeros}, {"oracle_text", text}};
}

std::string error_code(const json& e) { return e["payload"]["code"].get<std::string>(); }

}  // namespace

TEST_CASE("health and metrics") {
  Running g;
  httplib::Client http("127.0.0.1", g.port());
  auto h = http.Get("/health");
  REQUIRE(h);
  CHECK(h->status == 200);
  CHECK(json::parse(h->body)["status"] == "ok");
  auto m = http.Get("/metrics");
  REQUIRE(m);
  auto mj = json::parse(m->body);
  CHECK(mj.contains("stages"));
  CHECK(mj.contains("queue_depth"));
  CHECK(mj["dictionary_version"].is_string());
  auto missing = http.Get("/nope");
  REQUIRE(missing);
  CHECK(missing->status == 404);
}

TEST_CASE("join reply carries the session contract") {
  Running g;
  WsClient c(g.port());
  auto j = join_as(c, "r1", "alice");
  CHECK(j["session_id"] == "r1");
  CHECK(j["payload"]["participant_id"] == "alice");
  CHECK(j["payload"]["chunk_len_ms"] == 1000);
  CHECK(j["payload"]["overlap_ms"] == 500);
  CHECK(j["payload"]["participants"].size() == 1);
  auto presence = c.recv_type("presence");
  REQUIRE(presence);
  CHECK(presence->at("payload")["event"] == "joined");
}

TEST_CASE("silent connection times out") {
  auto cfg = axs_test::bundled_config();
  cfg.join_timeout_ms = 200;
  Running g(cfg);
  WsClient c(g.port());
  auto e = c.recv_type("error", 3000);
  REQUIRE(e);
  CHECK(error_code(*e) == "JOIN_TIMEOUT");
  auto code = c.wait_closed(3000);
  REQUIRE(code);
  CHECK(*code == 4000 + static_cast<int>(Errc::JoinTimeout));
}

TEST_CASE("protocol errors keep the connection") {
  Running g;
  WsClient c(g.port());
  c.send(envelope("text_message", "r", "x", {{"text", "hi"}}));
  auto nj = c.recv_type("error");
  REQUIRE(nj);
  CHECK(error_code(*nj) == "NOT_JOINED");
  join_as(c, "r2", "bob");
  c.send(envelope("ping2", "r2", "bob", json::object(), "ev-ping"));
  auto e = c.recv_type("error");
  REQUIRE(e);
  CHECK(error_code(*e) == "UNKNOWN_TYPE");
  CHECK(e->at("payload")["ref_event_id"] == "ev-ping");
  c.send(envelope("transcript", "r2", "bob", json::object()));
  auto t = c.recv_type("error");
  REQUIRE(t);
  CHECK(error_code(*t) == "UNKNOWN_TYPE");
  c.send_text("{not json");
  auto m = c.recv_type("error");
  REQUIRE(m);
  CHECK(error_code(*m) == "MALFORMED_PAYLOAD");
  c.send(envelope("text_message", "r2", "bob", {{"text", "hello"}}));
  CHECK(c.recv_type("transcript"));
}

TEST_CASE("stale chunk seq") {
  Running g;
  WsClient c(g.port());
  join_as(c, "r3", "carol");
  c.send(envelope("audio_chunk", "r3", "carol", chunk_payload(2, "")));
  c.send(envelope("audio_chunk", "r3", "carol", chunk_payload(1, ""), "stale"));
  auto e = c.recv_type("error");
  REQUIRE(e);
  CHECK(error_code(*e) == "REORDER_ERROR");
  CHECK(e->at("payload")["ref_event_id"] == "stale");
}

TEST_CASE("emotion reaches only participants who asked") {
  Running g;
  WsClient a(g.port()), b(g.port()), c(g.port());
  join_as(a, "r4", "a", {{"emoji_enabled", true}});
  join_as(b, "r4", "b", {{"emoji_enabled", false}});
  join_as(c, "r4", "c", {{"emoji_enabled", false}});
  a.send(envelope("text_message", "r4", "a", {{"text", "I am so happy and thrilled today"}}));
  auto fa = a.drain(1500), fb = b.drain(500), fc = c.drain(500);
  auto emotions = [](const std::vector<json>& v) {
    return std::count_if(v.begin(), v.end(), [](const json& j) { return j["type"] == "emotion"; });
  };
  CHECK(emotions(fa) == 1);
  CHECK(emotions(fb) == 0);
  CHECK(emotions(fc) == 0);
  for (const auto& j : fa)
    if (j["type"] == "emotion") CHECK(j["payload"]["label"] == "joy");
}

TEST_CASE("half signing speed doubles the duration") {
  Running g;
  WsClient fast(g.port()), slow(g.port());
  join_as(fast, "r5", "fast");
  join_as(slow, "r5", "slow", {{"signing_speed", 0.5}});
  fast.send(envelope("text_message", "r5", "fast", {{"text", "hello team"}}));
  auto a = fast.recv_type("sign_sequence");
  auto b = slow.recv_type("sign_sequence");
  REQUIRE(a);
  REQUIRE(b);
  CHECK(b->at("payload")["frame_count"] == a->at("payload")["frame_count"]);
  CHECK(b->at("payload")["total_duration"].get<double>() ==
        doctest::Approx(2 * a->at("payload")["total_duration"].get<double>()));

  // set_prefs takes effect on the next sequence; replay retimes a stored one.
  fast.send(envelope("set_prefs", "r5", "fast", {{"signing_speed", 2.0}}));
  CHECK(fast.recv_type("presence"));
  fast.send(envelope("replay_request", "r5", "fast", {{"sequence_id", a->at("payload")["sequence_id"]}}));
  auto r = fast.recv_type("sign_sequence");
  REQUIRE(r);
  CHECK(r->at("payload")["replay"] == true);
  CHECK(r->at("payload")["total_duration"].get<double>() ==
        doctest::Approx(0.5 * a->at("payload")["total_duration"].get<double>()));
  fast.send(envelope("replay_request", "r5", "fast", {{"sequence_id", "never"}}));
  auto e = fast.recv_type("error");
  REQUIRE(e);
  CHECK(error_code(*e) == "NOT_IN_BUFFER");
}

TEST_CASE("ninth participant is refused") {
  Running g;
  std::vector<std::unique_ptr<WsClient>> in;
  for (int i = 0; i < 8; ++i) {
    in.push_back(std::make_unique<WsClient>(g.port()));
    join_as(*in.back(), "r6", "p" + std::to_string(i));
  }
  WsClient extra(g.port());
  extra.send(envelope("join", "r6", "p8", json::object()));
  auto e = extra.recv_type("error");
  REQUIRE(e);
  CHECK(error_code(*e) == "ROOM_FULL");
  CHECK_FALSE(extra.recv_type("joined", 300));
  CHECK(g.gw->metrics()["sessions"] == 1);
}

TEST_CASE("a dropped client does not disturb the room") {
  Running g;
  WsClient keep(g.port());
  join_as(keep, "r7", "keep");
  {
    auto gone = std::make_unique<WsClient>(g.port());
    join_as(*gone, "r7", "gone");
    gone->send(envelope("audio_chunk", "r7", "gone", chunk_payload(0, "hello")));
  }  // socket torn down without a close handshake
  keep.send(envelope("text_message", "r7", "keep", {{"text", "still here"}}));
  bool own = false;
  for (int i = 0; i < 10 && !own; ++i) {
    auto t = keep.recv_type("transcript");
    REQUIRE(t);
    own = t->at("payload")["speaker_id"] == "keep";
  }
  CHECK(own);
}

TEST_CASE("on-demand summary goes to the requester") {
  Running g;
  WsClient a(g.port()), b(g.port());
  join_as(a, "r8", "a");
  join_as(b, "r8", "b");
  a.send(envelope("text_message", "r8", "a", {{"text", "we agreed to ship friday"}}));
  CHECK(a.recv_type("sign_sequence"));
  a.send(envelope("request_summary", "r8", "a", json::object()));
  auto s = a.recv_type("summary");
  REQUIRE(s);
  CHECK(s->at("payload")["decisions"].size() == 1);
  CHECK(s->at("payload")["trigger"] == "on_demand");
  auto others = b.drain(500);
  CHECK(std::none_of(others.begin(), others.end(), [](const json& j) { return j["type"] == "summary"; }));
}

TEST_CASE("occupied port") {
  Running g;
  auto cfg = axs_test::bundled_config();
  cfg.port = g.port();
  Gateway second(cfg, shared_assets());
  try {
    second.start();
    FAIL("expected bind failure");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::BindFailed);
  }
}

TEST_CASE("room closes cleanly when its last member leaves mid-utterance") {
  Running g;
  for (int round = 0; round < 3; ++round) {
    WsClient c(g.port());
    join_as(c, "r9", "solo");
    c.send(envelope("audio_chunk", "r9", "solo", chunk_payload(0, "good morning")));
    CHECK(c.recv_type("transcript"));
    c.close();
    CHECK(c.wait_closed(2000));
  }
  httplib::Client http("127.0.0.1", g.port());
  auto h = http.Get("/health");
  REQUIRE(h);
  CHECK(h->status == 200);
}
