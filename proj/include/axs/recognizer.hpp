#pragma once

#include <memory>
#include <optional>
#include <string>

#include "axs/chunker.hpp"

namespace axs {

enum class RecognizerBackend { Mock, External };

struct RecognizerConfig {
  RecognizerBackend backend = RecognizerBackend::Mock;
  std::string endpoint;  // e.g. "http://127.0.0.1:9000"; external only
  int timeout_ms = 1500;
  std::optional<std::string> language_hint;

  /// Throws Error(INVALID_SETTINGS) on a bad combination.
  void validate() const;
};

/// Speech recognition backend contract. Implementations must tolerate
/// concurrent calls; per-speaker ordering is the caller's job.
class Recognizer {
 public:
  virtual ~Recognizer() = default;

  /// Returns a non-final segment spanning exactly the chunk's time span.
  /// Throws Error(BACKEND_TIMEOUT | BACKEND_UNAVAILABLE | MALFORMED_RESPONSE).
  virtual TranscriptSegment recognize(const AudioChunk& chunk) = 0;

  virtual std::string name() const = 0;
};

/// Echoes the chunk's oracle_text channel. A pure function of the chunk.
class MockRecognizer final : public Recognizer {
 public:
  TranscriptSegment recognize(const AudioChunk& chunk) override;
  std::string name() const override { return "mock"; }
};

/// Client for a model server speaking POST /recognize.
class ExternalRecognizer final : public Recognizer {
 public:
  explicit ExternalRecognizer(RecognizerConfig config);

  TranscriptSegment recognize(const AudioChunk& chunk) override;
  std::string name() const override { return "external"; }

 private:
  RecognizerConfig config_;
};

std::unique_ptr<Recognizer> make_recognizer(const RecognizerConfig& config);

}  // namespace axs
