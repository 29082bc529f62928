#include "axs/recognizer.hpp"

#include <cstring>

#include "axs/error.hpp"
#include "axs/http_backend.hpp"
#include "axs/text.hpp"

namespace axs {

void RecognizerConfig::validate() const {
  if (timeout_ms <= 0) throw Error(Errc::InvalidSettings, "recognizer timeout_ms must be positive");
  if (backend == RecognizerBackend::External && endpoint.empty())
    throw Error(Errc::InvalidSettings, "external recognizer requires an endpoint");
  if (backend == RecognizerBackend::Mock && !endpoint.empty())
    throw Error(Errc::InvalidSettings, "mock recognizer takes no endpoint");
}

TranscriptSegment MockRecognizer::recognize(const AudioChunk& chunk) {
  const bool voiced = chunk.oracle_text && !text::split_whitespace(*chunk.oracle_text).empty();
  return make_segment(chunk.seq, voiced ? *chunk.oracle_text : std::string{}, chunk.start_time,
                      chunk.end_time(), voiced ? 1.0 : 0.0);
}

ExternalRecognizer::ExternalRecognizer(RecognizerConfig config) : config_(std::move(config)) {
  config_.validate();
}

TranscriptSegment ExternalRecognizer::recognize(const AudioChunk& chunk) {
  std::vector<std::uint8_t> bytes(chunk.samples.size() * sizeof(std::int16_t));
  std::memcpy(bytes.data(), chunk.samples.data(), bytes.size());

  nlohmann::json req = {{"audio_b64", text::base64_encode(bytes)}, {"sample_rate", chunk.sample_rate}};
  if (config_.language_hint) req["language_hint"] = *config_.language_hint;

  const auto resp = post_json(config_.endpoint, "/recognize", req, config_.timeout_ms);
  if (!resp.contains("text") || !resp["text"].is_string())
    throw Error(Errc::MalformedResponse, "recognize response lacks string field 'text'");
  if (!resp.contains("confidence") || !resp["confidence"].is_number())
    throw Error(Errc::MalformedResponse, "recognize response lacks numeric field 'confidence'");
  const double conf = resp["confidence"].get<double>();
  if (!(conf >= 0.0 && conf <= 1.0)) throw Error(Errc::MalformedResponse, "confidence outside [0,1]");

  return make_segment(chunk.seq, resp["text"].get<std::string>(), chunk.start_time, chunk.end_time(), conf);
}

std::unique_ptr<Recognizer> make_recognizer(const RecognizerConfig& config) {
  config.validate();
  if (config.backend == RecognizerBackend::External) return std::make_unique<ExternalRecognizer>(config);
  return std::make_unique<MockRecognizer>();
}

}  // namespace axs
