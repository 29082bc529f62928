#include <doctest.h>

#include <fstream>

#include "axs/error.hpp"
#include "axs/gateway.hpp"
#include "axs/loadgen.hpp"
#include "test_support.hpp"

using namespace axs;
using namespace axs::load;

namespace {

std::shared_ptr<const PipelineAssets> shared_assets() {
  static auto a = load_assets(axs_test::bundled_config());
  return a;
}

struct Running {
  std::unique_ptr<Gateway> gw;
  Running() {
    gw = std::make_unique<Gateway>(axs_test::bundled_config(), shared_assets());
    gw->start();
  }
  ~Running() { gw->stop(); }
};

LoadProfile small_profile() {
  LoadProfile p;
  p.script = load_script(axs_test::data_path("load/script.txt"));
  p.pacing = Pacing::MaxRate;
  p.settle_s = 5;
  return p;
}

}  // namespace

TEST_CASE("plan for one line") {
  LoadProfile p;
  p.script = {"good morning everyone"};
  p.msgs_per_client = 10;
  auto plan = plan_client(p, 0);
  CHECK(plan.chunk_text.size() == 10);
  REQUIRE_FALSE(plan.expected.empty());
  CHECK(plan.expected[0].text == "Good morning everyone.");
  // Words span [0,0.4) [0.4,0.8) [0.8,1.2): chunk 0 covers [0,1), chunk 1 covers [0.5,1.5).
  CHECK(plan.chunk_text[0] == "good morning");
  CHECK(plan.chunk_text[1] == "everyone");
  CHECK(plan.expected[0].last_chunk_seq == 1);
  CHECK(plan.expected[0].finalize_seq > plan.expected[0].last_chunk_seq);
}

TEST_CASE("plan rotates through the script") {
  LoadProfile p;
  p.script = {"alpha", "beta"};
  p.msgs_per_client = 40;
  CHECK(plan_client(p, 0).expected[0].text == "Alpha.");
  CHECK(plan_client(p, 1).expected[0].text == "Beta.");
}

TEST_CASE("empty script sends nothing") {
  LoadProfile p;
  auto plan = plan_client(p, 0);
  CHECK(plan.chunk_text.empty());
  CHECK(plan.expected.empty());
  axs_test::TempDir dir("script");
  std::ofstream(dir.path / "s.txt") << "# comment\n\n";
  CHECK(load_script(dir.path / "s.txt").empty());
}

TEST_CASE("thresholds parse and apply") {
  auto t = load_thresholds(axs_test::data_path("load/thresholds.json"));
  CHECK(t.rows.size() == 5);
  LoadReport r;
  r.duration_s = 1;
  r.received = 1000;
  r.throughput_rps = 1000;
  r.latency = summarize_latency({100, 200, 300});
  apply_thresholds(r, t);
  for (const auto& v : r.verdicts)
    if (v.metric == "latency_p95_ms") CHECK(v.pass);
  CHECK(summarize_latency({100, 200, 300}).p50 == 200);
  CHECK_THROWS_AS(summarize_latency({}), Error);
  CHECK(Thresholds::from_json(t.to_json()).rows.size() == 5);
}

TEST_CASE("one client, ten messages") {
  Running g;
  auto p = small_profile();
  p.msgs_per_client = 10;
  p.room_prefix = "lg-one";
  auto r = run_load(p, "127.0.0.1", g.gw->port());
  CHECK(r.sent == 10);
  CHECK(r.connected == 1);
  CHECK(r.errors == 0);
  CHECK(r.mismatches == 0);
  CHECK(r.missing == 0);
  CHECK(r.latency);
  REQUIRE(r.latency);
  CHECK(r.latency->count == r.expected_utterances);
}

TEST_CASE("reorder injection is observed") {
  Running g;
  auto p = small_profile();
  p.clients = 2;
  p.msgs_per_client = 12;
  p.inject_reorder = true;
  p.room_prefix = "lg-reorder";
  auto r = run_load(p, "127.0.0.1", g.gw->port());
  CHECK(r.reorder_observed == 2);
  CHECK(r.errors == 0);
  CHECK(r.mismatches == 0);
}

TEST_CASE("unreachable gateway") {
  auto p = small_profile();
  p.clients = 2;
  p.msgs_per_client = 4;
  try {
    run_load(p, "127.0.0.1", 1);
    FAIL("expected CONNECT_FAILED");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::ConnectFailed);
  }
}

TEST_CASE("report rendering") {
  LoadReport r;
  r.clients = 10;
  r.samples.push_back({0, 3, 12.5});
  const auto csv = render_csv({r});
  CHECK(csv.find("clients") != std::string::npos);
  CHECK(render_samples_csv({r}).find("0,3,12.5") != std::string::npos);
  CHECK(parse_pacing("realtime") == Pacing::Realtime);
  CHECK(parse_pacing("max") == Pacing::MaxRate);
  CHECK_FALSE(parse_pacing("fast"));
}
