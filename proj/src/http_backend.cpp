#include "axs/http_backend.hpp"

#include <httplib.h>

#include <chrono>

#include "axs/error.hpp"

namespace axs {

nlohmann::json post_json(const std::string& endpoint, const std::string& path,
                         const nlohmann::json& body, int timeout_ms) {
  httplib::Client cli(endpoint);
  const auto secs = timeout_ms / 1000;
  const auto usecs = (timeout_ms % 1000) * 1000;
  cli.set_connection_timeout(secs, usecs);
  cli.set_read_timeout(secs, usecs);
  cli.set_write_timeout(secs, usecs);

  const auto started = std::chrono::steady_clock::now();
  auto res = cli.Post(path, body.dump(), "application/json");
  if (!res) {
    const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                             std::chrono::steady_clock::now() - started)
                             .count();
    const auto err = res.error();
    if (err == httplib::Error::ConnectionTimeout ||
        (err == httplib::Error::Read && elapsed >= timeout_ms * 9 / 10)) {
      throw Error(Errc::BackendTimeout, endpoint + path + " exceeded " + std::to_string(timeout_ms) + " ms");
    }
    throw Error(Errc::BackendUnavailable, endpoint + path + ": " + httplib::to_string(err));
  }
  if (res->status != 200) {
    throw Error(Errc::BackendUnavailable, endpoint + path + " returned HTTP " + std::to_string(res->status));
  }
  auto parsed = nlohmann::json::parse(res->body, nullptr, /*allow_exceptions=*/false);
  if (parsed.is_discarded() || !parsed.is_object()) {
    throw Error(Errc::MalformedResponse, endpoint + path + " returned a non-object body");
  }
  return parsed;
}

}  // namespace axs
