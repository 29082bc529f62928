#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "axs/pipeline.hpp"
#include "axs/session.hpp"

namespace axs {

struct LexiconSpec {
  std::string source;
  std::string target;
  std::string file;      // baseline pairs
  std::string endpoint;  // external pairs
};

struct GatewayConfig {
  std::string host = "0.0.0.0";
  unsigned short port = 8080;
  unsigned threads = 0;  // 0 -> hardware concurrency (at least 2)
  std::string log_level = "info";

  std::string dictionary;
  bool require_fingerspell = true;
  std::string emotion_lexicon;
  std::string emotion_backend = "lexicon";  // lexicon | external
  std::string emotion_endpoint;
  std::vector<LexiconSpec> lexicons;

  RecognizerConfig recognizer;
  std::string summarizer_backend = "extractive";  // extractive | external
  std::string summarizer_endpoint;
  SummaryConfig summary;

  int chunk_len_ms = 1000;
  int overlap_ms = 500;
  int sample_rate = 16000;
  int silence_gap_ms = 1500;
  std::size_t max_tokens = 60;

  BackpressureConfig backpressure;
  int join_timeout_ms = 5000;
  int summary_tick_ms = 1000;
  /// Unprocessed ingress messages one connection may have in flight before
  /// the gateway stops reading from it.
  std::size_t ingress_credit = 4;
  /// Outgoing frames queued for one connection before it counts as a slow consumer.
  std::size_t max_outbox = 8192;
  std::size_t max_message_bytes = 1 << 20;

  SessionSettings session_defaults;

  /// Keys as in the JSON config file; relative paths are resolved against `base_dir`.
  static GatewayConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
  nlohmann::json to_json() const;
  void validate() const;  // INVALID_SETTINGS
};

/// Reads a JSON config file. Errors: IO_ERROR, PARSE_ERROR.
nlohmann::json load_config_json(const std::filesystem::path& path);

/// Overrides top-level scalar keys from AXS_<UPPERCASE_KEY> variables, parsed
/// according to the type of the existing value (unknown keys are taken as
/// strings). Returns the names applied.
std::vector<std::string> apply_env_overrides(nlohmann::json& config, const std::map<std::string, std::string>& env);
std::map<std::string, std::string> process_environment();

/// Loads dictionary, lexicons and backends. Fails fast on the first missing
/// or unreadable asset, naming its path (IO_ERROR / PARSE_ERROR /
/// INCOMPLETE_FINGERSPELL_SET).
std::shared_ptr<const PipelineAssets> load_assets(const GatewayConfig& config);

}  // namespace axs
