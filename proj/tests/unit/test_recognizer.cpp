#include <doctest.h>

#include <httplib.h>
#include <json.hpp>

#include <thread>

#include "axs/error.hpp"
#include "axs/recognizer.hpp"

using namespace axs;

namespace {

AudioChunk chunk_with(std::optional<std::string> oracle) {
  AudioChunk c;
  c.seq = 4;
  c.start_time = 2.0;
  c.samples.assign(16000, 0);
  c.oracle_text = std::move(oracle);
  return c;
}

/// Local model server stub on an ephemeral port.
struct Stub {
  httplib::Server server;
  int port = 0;
  std::thread thread;
  explicit Stub(std::function<void(const httplib::Request&, httplib::Response&)> handler) {
    server.Post("/recognize", std::move(handler));
    port = server.bind_to_any_port("127.0.0.1");
    thread = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
  }
  ~Stub() {
    server.stop();
    thread.join();
  }
  RecognizerConfig config(int timeout_ms = 1500) const {
    RecognizerConfig c;
    c.backend = RecognizerBackend::External;
    c.endpoint = "http://127.0.0.1:" + std::to_string(port);
    c.timeout_ms = timeout_ms;
    return c;
  }
};

}  // namespace

TEST_CASE("mock echoes the oracle channel") {
  MockRecognizer m;
  auto s = m.recognize(chunk_with("good morning"));
  CHECK(s.text == "good morning");
  CHECK(s.confidence == 1.0);
  CHECK(s.chunk_seq == 4);
  CHECK(s.t0 == 2.0);
  CHECK(s.t1 == 3.0);
  CHECK_FALSE(s.final);
}

TEST_CASE("mock without oracle text is silence") {
  MockRecognizer m;
  auto s = m.recognize(chunk_with(std::nullopt));
  CHECK(s.empty());
  CHECK(s.text.empty());
}

TEST_CASE("external field mapping") {
  Stub stub([](const httplib::Request& req, httplib::Response& res) {
    auto j = nlohmann::json::parse(req.body);
    CHECK(j.contains("audio_b64"));
    CHECK(j["sample_rate"] == 16000);
    res.set_content(R"({"text":"hello team","confidence":0.91})", "application/json");
  });
  ExternalRecognizer r(stub.config());
  auto s = r.recognize(chunk_with(std::nullopt));
  CHECK(s.text == "hello team");
  CHECK(s.confidence == doctest::Approx(0.91));
  CHECK(s.tokens.size() == 2);
}

TEST_CASE("external 503 is BACKEND_UNAVAILABLE") {
  Stub stub([](const httplib::Request&, httplib::Response& res) { res.status = 503; });
  ExternalRecognizer r(stub.config());
  try {
    r.recognize(chunk_with(std::nullopt));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::BackendUnavailable);
  }
}

TEST_CASE("external response without text is MALFORMED_RESPONSE") {
  Stub stub([](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"confidence":0.5})", "application/json");
  });
  ExternalRecognizer r(stub.config());
  try {
    r.recognize(chunk_with(std::nullopt));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::MalformedResponse);
  }
}

TEST_CASE("slow external backend times out") {
  Stub stub([](const httplib::Request&, httplib::Response& res) {
    std::this_thread::sleep_for(std::chrono::milliseconds(600));
    res.set_content(R"({"text":"late","confidence":1})", "application/json");
  });
  ExternalRecognizer r(stub.config(200));
  try {
    r.recognize(chunk_with(std::nullopt));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::BackendTimeout);
  }
}

TEST_CASE("unreachable endpoint is BACKEND_UNAVAILABLE") {
  RecognizerConfig c;
  c.backend = RecognizerBackend::External;
  c.endpoint = "http://127.0.0.1:1";
  c.timeout_ms = 300;
  ExternalRecognizer r(c);
  try {
    r.recognize(chunk_with(std::nullopt));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK((e.code() == Errc::BackendUnavailable || e.code() == Errc::BackendTimeout));
  }
}

TEST_CASE("external backend needs an endpoint") {
  RecognizerConfig c;
  c.backend = RecognizerBackend::External;
  CHECK_THROWS_AS(c.validate(), Error);
  CHECK(make_recognizer(RecognizerConfig{})->name() == "mock");
}
