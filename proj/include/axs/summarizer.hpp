#pragma once

#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "axs/chunker.hpp"
#include "axs/error.hpp"
#include "axs/translator.hpp"

namespace axs {

struct TranscriptEntry {
  std::string utterance_id;
  std::string speaker_id;
  std::string text;
  double arrival_s = 0.0;  // session-relative
};

struct SummaryConfig {
  double interval_s = 900.0;
  std::size_t k = 5;
  std::vector<std::string> decision_cues = {"decided", "agreed", "approved"};
  /// Single words, or two-word phrases such as "action item".
  std::vector<std::string> action_cues = {"will", "must", "todo", "action item"};
  /// "by monday" .. "by sunday" counts as an action cue.
  bool by_weekday_cue = true;
  std::unordered_set<std::string> stopwords;  // empty -> built-in English list

  void validate() const;  // INVALID_SETTINGS
};

const std::unordered_set<std::string>& default_stopwords();

enum class SummaryTrigger { Scheduled, OnDemand };
std::string_view to_string(SummaryTrigger t) noexcept;

struct SummaryRecord {
  std::string summary_id;
  std::string session_id;
  double t_start = 0.0;
  double t_end = 0.0;
  std::vector<std::string> key_points;
  std::vector<std::string> decisions;
  std::vector<std::string> action_items;
  std::string language = "en";
  SummaryTrigger trigger = SummaryTrigger::Scheduled;

  nlohmann::json to_json() const;
};

/// Sentences as verbatim substrings of `text`: a sentence ends at '.', '!'
/// or '?' followed by whitespace or the end of input. Surrounding whitespace
/// is trimmed; a trailing fragment without a terminator is its own sentence.
std::vector<std::string> split_sentences(std::string_view text);

enum class CueKind { None, Decision, Action };

/// Decision cues take precedence over action cues.
CueKind classify_cue(std::string_view sentence, const SummaryConfig& config);

/// Per-sentence score: sum over its content words of freq(w) / max freq,
/// with frequencies counted over the whole window.
std::vector<double> score_sentences(const std::vector<std::string>& sentences, const SummaryConfig& config);

/// Extractive minutes over a window transcript. Cue sentences go to their
/// cue list; the k best-scoring remaining sentences become key points, in
/// original order (ties favour the earlier sentence).
/// Errors: EMPTY_WINDOW when the window has no sentences.
SummaryRecord extract_summary(std::string_view window_text, const SummaryConfig& config = {});

/// Window transcript: entry texts joined by single spaces.
std::string window_text(const std::vector<TranscriptEntry>& entries);

class SummaryBackend {
 public:
  virtual ~SummaryBackend() = default;
  virtual SummaryRecord summarize(std::string_view window_text, const SummaryConfig& config) = 0;
  virtual std::string name() const = 0;
};

class ExtractiveSummaryBackend final : public SummaryBackend {
 public:
  SummaryRecord summarize(std::string_view window_text, const SummaryConfig& config) override {
    return extract_summary(window_text, config);
  }
  std::string name() const override { return "extractive"; }
};

/// POST /summarize {text} -> {summary}. Key points are the sentences of the
/// returned summary; decisions and action items still come from the cue rules.
class ExternalSummaryBackend final : public SummaryBackend {
 public:
  ExternalSummaryBackend(std::string endpoint, int timeout_ms = 5000);
  SummaryRecord summarize(std::string_view window_text, const SummaryConfig& config) override;
  std::string name() const override { return "external"; }

 private:
  std::string endpoint_;
  int timeout_ms_;
};

struct SummaryWindow {
  double t_start = 0.0;
  double t_end = 0.0;
  std::vector<TranscriptEntry> entries;
  SummaryTrigger trigger = SummaryTrigger::Scheduled;
};

/// One session's transcript and summary schedule. Windows are half-open
/// arrival-time intervals [t_start, t_end); each window starts where the
/// previous one ended, and an empty window never closes.
class TranscriptAccumulator {
 public:
  explicit TranscriptAccumulator(double interval_s = 900.0, double start_s = 0.0);

  /// False (and nothing stored) for an utterance id seen before.
  bool accumulate(const Utterance& utterance, double arrival_s);
  bool accumulate(TranscriptEntry entry);

  /// Scheduled trigger: fires once now - last boundary >= interval and the
  /// open window holds something.
  std::optional<SummaryWindow> schedule_tick(double now_s);

  /// On-demand trigger over everything since the last boundary.
  /// Errors: EMPTY_WINDOW.
  SummaryWindow request(double now_s);

  double window_start() const noexcept { return window_start_; }
  std::size_t pending() const noexcept { return open_.size(); }
  std::size_t total() const noexcept { return total_; }
  double interval_s() const noexcept { return interval_s_; }

 private:
  SummaryWindow close(double now_s, SummaryTrigger trigger);

  double interval_s_;
  double window_start_;
  std::vector<TranscriptEntry> open_;
  std::unordered_set<std::string> seen_;
  std::size_t total_ = 0;
};

/// Accumulators keyed by session id.
class SummaryBook {
 public:
  void open_session(const std::string& session_id, double interval_s, double start_s = 0.0);
  void close_session(const std::string& session_id);

  /// Errors: SESSION_UNKNOWN.
  bool accumulate(const std::string& session_id, const Utterance& utterance, double arrival_s);
  std::optional<SummaryWindow> schedule_tick(const std::string& session_id, double now_s);
  SummaryWindow request(const std::string& session_id, double now_s);

 private:
  TranscriptAccumulator& get(const std::string& session_id);

  std::mutex mu_;
  std::unordered_map<std::string, TranscriptAccumulator> sessions_;
};

struct TargetSummary {
  std::string target;
  std::optional<SummaryRecord> record;
  std::optional<Errc> status;  // set on failure
  std::string message;
};

/// Translates every sentence of `record` into each target; one result per
/// target, failures reported per target.
std::vector<TargetSummary> summarize_multilingual(const SummaryRecord& record,
                                                  const std::vector<std::string>& targets,
                                                  const TranslatorRegistry& translator);

}  // namespace axs
