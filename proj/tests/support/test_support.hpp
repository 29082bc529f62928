#pragma once

#include <chrono>
#include <cmath>
#include <deque>
#include <filesystem>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>
#include <json.hpp>

#include "axs/gateway_config.hpp"
#include "axs/signgen.hpp"

namespace axs_test {

inline std::filesystem::path data_path(const std::string& rel) { return std::filesystem::path(AXS_DATA_DIR) / rel; }

/// Scratch directory removed on destruction.
struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path = std::filesystem::temp_directory_path() / ("axs-" + tag + "-" + std::to_string(rd()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
};

/// A clip whose landmarks drift with the frame index; distinct per `salt`.
inline axs::SignClip make_clip(const std::string& gloss, std::size_t frames, float salt = 0.0f) {
  axs::SignClip c;
  c.gloss_id = gloss;
  for (std::size_t k = 0; k < frames; ++k) {
    axs::Keyframe f;
    f.t = static_cast<double>(k) / axs::kClipFps;
    const float s = static_cast<float>(k) * 0.01f + salt;
    for (std::size_t i = 0; i < f.pose.size(); ++i) f.pose[i] = {s + static_cast<float>(i), -s, 0.5f * s};
    for (std::size_t i = 0; i < f.left_hand.size(); ++i) f.left_hand[i] = {s, static_cast<float>(i), 1.0f};
    for (std::size_t i = 0; i < f.right_hand.size(); ++i) f.right_hand[i] = {-s, static_cast<float>(i), -1.0f};
    c.frames.push_back(f);
  }
  return c;
}

/// Dictionary holding the manual alphabet plus `glosses`, every clip
/// `frames` long unless `frames_of` says otherwise.
inline axs::SignDictionary make_dictionary(const std::vector<std::string>& glosses, std::size_t frames = 10,
                                           std::function<std::size_t(const std::string&)> frames_of = {}) {
  std::vector<axs::SignClip> clips;
  float salt = 0.0f;
  auto add = [&](const std::string& g) {
    clips.push_back(make_clip(g, frames_of ? frames_of(g) : frames, salt));
    salt += 0.25f;
  };
  for (const auto& g : axs::fingerspell_glosses()) add(g);
  for (const auto& g : glosses) add(g);
  return axs::SignDictionary(std::move(clips), "test-dict");
}

/// Gateway configuration over the bundled data and the build's dictionary.
inline axs::GatewayConfig bundled_config() {
  nlohmann::json j = {{"host", "127.0.0.1"},
                      {"port", 0},
                      {"threads", 2},
                      {"log_level", "warn"},
                      {"dictionary", AXS_DICTIONARY},
                      {"emotion_lexicon", data_path("emotion/lexicon.txt").string()},
                      {"lexicons",
                       {{{"source", "en"}, {"target", "fr"}, {"file", data_path("lexicons/en-fr.tsv").string()}},
                        {{"source", "en"}, {"target", "es"}, {"file", data_path("lexicons/en-es.tsv").string()}}}}};
  return axs::GatewayConfig::from_json(j);
}

/// Minimal WebSocket client for driving a gateway from tests. Reads run in
/// the background; recv() pumps the I/O loop until a frame or the deadline.
class WsClient {
 public:
  WsClient(unsigned short port, const std::string& path = "/ws") : ws_(ioc_) {
    namespace net = boost::asio;
    net::ip::tcp::endpoint ep(net::ip::make_address("127.0.0.1"), port);
    boost::beast::get_lowest_layer(ws_).connect(ep);
    ws_.handshake("127.0.0.1", path);
    ws_.read_message_max(64 << 20);
    read();
  }

  void send(const nlohmann::json& j) { send_text(j.dump()); }
  void send_text(const std::string& s) {
    ws_.text(true);
    ws_.write(boost::asio::buffer(s));
  }

  std::optional<nlohmann::json> recv(int timeout_ms = 3000) {
    const auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(timeout_ms);
    while (inbox_.empty() && !closed_ && std::chrono::steady_clock::now() < deadline) {
      ioc_.restart();
      ioc_.run_one_until(deadline);
    }
    if (inbox_.empty()) return std::nullopt;
    auto j = std::move(inbox_.front());
    inbox_.pop_front();
    return j;
  }

  /// Next frame of `type`, skipping others (kept in `skipped`).
  std::optional<nlohmann::json> recv_type(const std::string& type, int timeout_ms = 3000) {
    const auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(timeout_ms);
    while (std::chrono::steady_clock::now() < deadline) {
      const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
      auto j = recv(static_cast<int>(std::max<long long>(1, left.count())));
      if (!j) return std::nullopt;
      if ((*j)["type"] == type) return j;
      skipped.push_back(std::move(*j));
    }
    return std::nullopt;
  }

  /// Everything that arrives within `ms`.
  std::vector<nlohmann::json> drain(int ms) {
    std::vector<nlohmann::json> out;
    while (auto j = recv(ms)) out.push_back(std::move(*j));
    return out;
  }

  bool closed() const { return closed_; }
  /// Waits for the server to close the socket; returns the close code.
  std::optional<int> wait_closed(int timeout_ms) {
    const auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(timeout_ms);
    while (!closed_ && std::chrono::steady_clock::now() < deadline) {
      ioc_.restart();
      ioc_.run_one_until(deadline);
    }
    if (!closed_) return std::nullopt;
    return static_cast<int>(ws_.reason().code);
  }

  void close() {
    boost::beast::error_code ec;
    ws_.close(boost::beast::websocket::close_code::normal, ec);
  }

  std::vector<nlohmann::json> skipped;

 private:
  void read() {
    ws_.async_read(buf_, [this](boost::beast::error_code ec, std::size_t) {
      if (ec) {
        closed_ = true;
        return;
      }
      inbox_.push_back(nlohmann::json::parse(boost::beast::buffers_to_string(buf_.data())));
      buf_.consume(buf_.size());
      read();
    });
  }

  boost::asio::io_context ioc_;
  boost::beast::websocket::stream<boost::beast::tcp_stream> ws_;
  boost::beast::flat_buffer buf_;
  std::deque<nlohmann::json> inbox_;
  bool closed_ = false;
};

inline nlohmann::json envelope(const std::string& type, const std::string& session, const std::string& sender,
                               nlohmann::json payload, const std::string& event_id = "") {
  static int counter = 0;
  return {{"type", type},
          {"session_id", session},
          {"sender_id", sender},
          {"event_id", event_id.empty() ? sender + "-" + std::to_string(++counter) : event_id},
          {"ts_ms", 0},
          {"payload", std::move(payload)}};
}

}  // namespace axs_test
