#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace axs {

enum class Stage : std::uint8_t { Transcription, Translation, Emotion, Signgen, Summary };

inline constexpr std::array<Stage, 5> kAllStages = {Stage::Transcription, Stage::Translation, Stage::Emotion,
                                                    Stage::Signgen, Stage::Summary};

std::string_view to_string(Stage s) noexcept;
std::optional<Stage> parse_stage(std::string_view s) noexcept;

/// Nearest-rank percentile of an ascending sequence: the value at 1-based
/// rank ceil(p/100 * n), clamped to [1, n]. p in [0, 100].
/// Errors: NO_SAMPLES on an empty input.
double percentile_sorted(std::span<const double> sorted, double p);

/// Copies, sorts, and takes the nearest-rank percentile.
double percentile(std::vector<double> samples, double p);

/// Exact streaming distribution of millisecond latencies at microsecond
/// resolution. Percentiles use the same nearest-rank rule as
/// percentile_sorted(), so they agree with a full sort up to the 1 us
/// quantisation.
class LatencyHistogram {
 public:
  void add(double ms);
  void merge(const LatencyHistogram& other);

  std::uint64_t count() const noexcept { return n_; }
  double mean() const;
  double min() const;
  double max() const;
  double percentile(double p) const;

 private:
  std::map<std::int64_t, std::uint64_t> bins_;  // microseconds -> count
  std::uint64_t n_ = 0;
  long double sum_us_ = 0;
};

struct StageLatency {
  Stage stage = Stage::Transcription;
  std::string event_id;
  double enqueue_ms = 0.0;
  double dequeue_ms = 0.0;
  double complete_ms = 0.0;

  double total_ms() const noexcept { return complete_ms - enqueue_ms; }
  double queue_ms() const noexcept { return dequeue_ms - enqueue_ms; }
};

struct KpiBudgets {
  std::optional<double> transcription_ms = 2000.0;
  std::optional<double> translation_ms = 2000.0;
  std::optional<double> emotion_ms = 200.0;
  std::optional<double> signgen_ms;
  std::optional<double> summary_ms;

  std::optional<double> for_stage(Stage s) const noexcept;
};

struct StageKpi {
  Stage stage = Stage::Transcription;
  std::uint64_t count = 0;
  double mean_ms = 0.0;
  double p50_ms = 0.0;
  double p95_ms = 0.0;
  double p99_ms = 0.0;
  double max_ms = 0.0;
  std::optional<double> budget_ms;
  /// Mean under budget (p95 is reported alongside). True without a budget
  /// or without samples.
  bool pass = true;
};

struct KpiReport {
  std::vector<StageKpi> stages;
  std::uint64_t rejected = 0;
  bool pass() const;
  nlohmann::json to_json() const;
};

/// Concurrent append-only record of stage timings.
class LatencyLedger {
 public:
  explicit LatencyLedger(bool keep_records = false) : keep_records_(keep_records) {}

  /// False (and counted as rejected) unless enqueue <= dequeue <= complete.
  bool record(const StageLatency& entry);
  bool record(Stage stage, const std::string& event_id, double enqueue_ms, double dequeue_ms, double complete_ms);

  KpiReport kpi_report(const KpiBudgets& budgets = {}) const;
  LatencyHistogram histogram(Stage stage) const;

  /// Chunk arrival to sign emission, kept apart from the per-stage rows.
  void record_end_to_end(double ms);
  LatencyHistogram end_to_end() const;
  std::vector<StageLatency> records() const;  // empty unless keep_records
  std::uint64_t rejected() const;

 private:
  mutable std::mutex mu_;
  bool keep_records_;
  std::array<LatencyHistogram, 5> hist_;
  LatencyHistogram e2e_;
  std::vector<StageLatency> records_;
  std::uint64_t rejected_ = 0;
};

}  // namespace axs
