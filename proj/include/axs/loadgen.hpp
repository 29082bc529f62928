#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "axs/chunker.hpp"
#include "axs/latency.hpp"

namespace axs::load {

enum class Pacing { Realtime, MaxRate };

std::string_view to_string(Pacing p) noexcept;
std::optional<Pacing> parse_pacing(std::string_view s) noexcept;

struct LoadProfile {
  std::size_t clients = 1;
  double ramp_s = 0.0;
  std::size_t msgs_per_client = 20;
  Pacing pacing = Pacing::Realtime;
  std::vector<std::string> script;  // one utterance per entry
  std::size_t room_size = 8;
  std::string room_prefix = "load-room";
  /// Grace period after the last send for outstanding responses.
  double settle_s = 15.0;
  /// Re-sends one stale seq per client to provoke REORDER_ERROR.
  bool inject_reorder = false;
  ChunkParams chunk;
  int word_ms = 400;
  int trailing_silence_ms = 3000;
  int silence_gap_ms = 1500;

  /// Errors: INVALID_SETTINGS.
  void validate() const;
};

/// One line per utterance; blank lines and '#' comments are skipped.
std::vector<std::string> load_script(const std::filesystem::path& path);

struct ExpectedUtterance {
  std::string text;             // punctuated, as the gateway must emit it
  std::uint64_t last_chunk_seq = 0;
  std::uint64_t finalize_seq = 0;  // first chunk that closes it
};

/// What one client sends and what it must get back.
struct ClientPlan {
  std::vector<std::string> chunk_text;  // oracle_text per seq ("" for silence)
  std::vector<ExpectedUtterance> expected;
};

/// Lays the script (rotated by `rotation`) on a timeline of `word_ms` words
/// followed by `trailing_silence_ms` of silence per utterance, cuts it into
/// exactly `msgs` chunks, and lists the utterances those chunks finalise.
ClientPlan plan_client(const LoadProfile& profile, std::size_t rotation);

struct ThresholdRow {
  std::string name;
  std::string metric;
  std::string op;  // "<", "<=", ">=", "=="
  double value = 0.0;
};

struct Thresholds {
  std::vector<ThresholdRow> rows;
  static Thresholds defaults();
  static Thresholds from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

Thresholds load_thresholds(const std::filesystem::path& path);

struct Verdict {
  std::string name;
  std::string metric;
  std::string op;
  double threshold = 0.0;
  std::optional<double> measured;  // absent when the row could not be tested
  bool pass = false;
};

struct LatencySummary {
  double p50 = 0, p95 = 0, p99 = 0, max = 0, mean = 0;
  std::uint64_t count = 0;
};

/// Errors: NO_SAMPLES.
LatencySummary summarize_latency(const std::vector<double>& samples_ms);

struct Sample {
  std::size_t client = 0;
  std::uint64_t seq = 0;
  double latency_ms = 0.0;
};

struct LoadReport {
  std::size_t clients = 0;
  Pacing pacing = Pacing::Realtime;
  double duration_s = 0.0;
  std::uint64_t connected = 0;
  std::uint64_t connect_failed = 0;
  std::uint64_t sent = 0;
  std::uint64_t received = 0;
  std::uint64_t errors = 0;
  std::uint64_t mismatches = 0;
  std::uint64_t missing = 0;
  std::uint64_t reorder_observed = 0;
  std::uint64_t expected_utterances = 0;
  std::uint64_t peak_in_flight = 0;
  std::map<std::string, std::uint64_t> errors_by_code;
  double throughput_rps = 0.0;  // received / duration
  double request_rps = 0.0;     // sent / duration
  std::optional<LatencySummary> latency;
  nlohmann::json stages;  // gateway per-stage rows, when available
  std::vector<Sample> samples;
  std::vector<Verdict> verdicts;

  bool sustained() const noexcept { return connect_failed == 0; }
  bool kpi_pass() const;
  nlohmann::json to_json() const;
};

/// Fills `verdicts` from the report's measurements.
void apply_thresholds(LoadReport& report, const Thresholds& thresholds);

/// Runs the profile against a gateway. Errors: CONNECT_FAILED when fewer
/// than half the clients manage to join.
LoadReport run_load(const LoadProfile& profile, const std::string& host, unsigned short port);

/// GET /metrics from the gateway; null on failure.
nlohmann::json fetch_metrics(const std::string& host, unsigned short port);

struct SweepResult {
  std::vector<LoadReport> levels;
  std::optional<std::size_t> max_sustained;
  bool pass = false;
  std::string reason;
};

inline const std::vector<std::size_t>& default_sweep_levels() {
  static const std::vector<std::size_t> levels{10, 100, 250, 500, 1000};
  return levels;
}

/// Runs each level in turn and stops after the first level the host cannot
/// sustain. Passes when every sustained level is error- and mismatch-free and
/// the top sustained level reaches `min_rps`.
SweepResult run_sweep(const LoadProfile& base, const std::vector<std::size_t>& levels, const std::string& host,
                      unsigned short port, double min_rps);

std::string render_text(const LoadReport& r);
std::string render_table(const std::vector<LoadReport>& levels);
/// Per-level table.
std::string render_csv(const std::vector<LoadReport>& levels);
/// client,seq,latency_ms rows.
std::string render_samples_csv(const std::vector<LoadReport>& levels);

}  // namespace axs::load
