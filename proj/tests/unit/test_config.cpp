#include <doctest.h>

#include <fstream>

#include "axs/error.hpp"
#include "axs/gateway_config.hpp"
#include "test_support.hpp"

using namespace axs;
using json = nlohmann::json;

TEST_CASE("env overrides follow the existing value type") {
  json cfg = {{"port", 8080}, {"log_level", "info"}, {"require_fingerspell", true}, {"lexicons", json::array()}};
  auto applied = apply_env_overrides(cfg, {{"AXS_PORT", "9001"},
                                           {"AXS_LOG_LEVEL", "debug"},
                                           {"AXS_REQUIRE_FINGERSPELL", "false"},
                                           {"AXS_LEXICONS", "x"},
                                           {"AXS_DICTIONARY", "/tmp/d.axsdict"},
                                           {"HOME", "/root"}});
  CHECK(cfg["port"] == 9001);
  CHECK(cfg["log_level"] == "debug");
  CHECK(cfg["require_fingerspell"] == false);
  CHECK(cfg["lexicons"].is_array());
  CHECK(cfg["dictionary"] == "/tmp/d.axsdict");
  CHECK(applied.size() == 4);
  json bad = {{"port", 1}};
  CHECK_THROWS_AS(apply_env_overrides(bad, {{"AXS_PORT", "abc"}}), Error);
}

TEST_CASE("config file round trip") {
  auto cfg = axs_test::bundled_config();
  auto again = GatewayConfig::from_json(cfg.to_json());
  CHECK(again.to_json() == cfg.to_json());
  CHECK(cfg.ingress_credit == 4);
  CHECK(cfg.backpressure.queue_bound == 64);
  CHECK(cfg.backpressure.slow_consumer_grace == 32);
}

TEST_CASE("relative paths resolve against the config directory") {
  auto cfg = GatewayConfig::from_json({{"dictionary", "signs.axsdict"}}, "/opt/axs");
  CHECK(cfg.dictionary == "/opt/axs/signs.axsdict");
}

TEST_CASE("missing dictionary names its path") {
  auto cfg = axs_test::bundled_config();
  cfg.dictionary = "/nonexistent/signs.axsdict";
  try {
    load_assets(cfg);
    FAIL("expected failure");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::IoError);
    CHECK(std::string(e.what()).find("/nonexistent/signs.axsdict") != std::string::npos);
  }
}

TEST_CASE("bad settings") {
  CHECK_THROWS_AS(GatewayConfig::from_json({{"overlap_ms", 1000}}), Error);
  CHECK_THROWS_AS(GatewayConfig::from_json({{"port", "x"}}), std::exception);
}

TEST_CASE("config file loading") {
  axs_test::TempDir dir("cfg");
  std::ofstream(dir.path / "bad.json") << "{ nope";
  try {
    load_config_json(dir.path / "bad.json");
    FAIL("expected failure");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::ParseError);
  }
  try {
    load_config_json(dir.path / "missing.json");
    FAIL("expected failure");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::IoError);
  }
}
