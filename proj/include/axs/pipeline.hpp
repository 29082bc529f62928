#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include <json.hpp>

#include "axs/backpressure.hpp"
#include "axs/chunker.hpp"
#include "axs/emotion.hpp"
#include "axs/latency.hpp"
#include "axs/recognizer.hpp"
#include "axs/session.hpp"
#include "axs/signgen.hpp"
#include "axs/summarizer.hpp"
#include "axs/translator.hpp"

namespace axs {

/// Shared, read-only models and configuration used by every room.
struct PipelineAssets {
  std::shared_ptr<const SignDictionary> dictionary;
  std::shared_ptr<const TranslatorRegistry> translator;
  std::shared_ptr<EmotionBackend> emotion;
  std::shared_ptr<Recognizer> recognizer;
  std::shared_ptr<SummaryBackend> summarizer;
  SummaryConfig summary;
  ChunkParams chunk;
  AssemblerConfig assembler;
  BackpressureConfig backpressure;
  GlossOptions gloss;
};

/// Who receives an outbound message.
enum class Audience {
  All,
  Partials,     // participants with live captions on
  Language,     // participants whose preferred language == key
  Emoji,        // participants with emoji on (and the session overlay on)
  Signing,      // participants with signing on
  Participant,  // exactly participant `key`
};

struct Outbound {
  std::string type;
  nlohmann::json payload;
  Audience audience = Audience::All;
  std::string key;
  /// sign_sequence only: rendered per recipient (speed, format).
  std::shared_ptr<const AnimationSequence> sequence;
  std::uint64_t source_chunk_seq = 0;
  bool replay = false;
};

bool audience_includes(const Outbound& out, const Participant& p, const SessionSettings& settings);

/// Error to report back to the producer of an ingress item.
struct IngressError {
  Errc code;
  std::string message;
  std::string ref_event_id;
};

struct StepResult {
  std::string origin;  // producing participant
  std::string event_id;
  std::vector<Outbound> outputs;
  std::vector<IngressError> errors;
};

/// One room's processing state. Not synchronised: every call must come from
/// the room's single serial executor, except summarize(), which only reads
/// shared assets.
class RoomPipeline {
 public:
  using Clock = std::function<double()>;  // monotonic milliseconds

  RoomPipeline(std::shared_ptr<Session> session, std::shared_ptr<const PipelineAssets> assets,
               std::shared_ptr<LatencyLedger> ledger, Clock clock = {});

  /// Queue a chunk for transcription. Rejected (QUEUE_FULL) when the
  /// transcription queue is at its bound.
  Admission submit_chunk(AudioChunk chunk, std::string event_id);
  /// Typed text enters the same queue so it stays ordered with speech.
  Admission submit_text(const std::string& speaker_id, std::string text, std::string event_id);

  /// Processes the oldest queued ingress item and its full fan-out.
  std::optional<StepResult> step();

  /// Finalises a departing speaker's pending words.
  std::vector<Outbound> flush_speaker(const std::string& speaker_id);

  std::optional<SummaryWindow> due_summary(double now_s);
  /// Errors: EMPTY_WINDOW.
  SummaryWindow request_summary(double now_s);
  SummaryRecord summarize(const SummaryWindow& window) const;

  /// Seconds since the pipeline was created (the summary timeline).
  double session_time_s() const;

  std::size_t ingress_depth() const noexcept { return ingress_.size(); }
  std::size_t depth(Stage stage) const noexcept;
  std::size_t emotion_dropped() const noexcept { return emotion_q_.dropped(); }
  const LatencyHistogram& end_to_end() const noexcept { return e2e_; }
  Session& session() noexcept { return *session_; }

 private:
  struct TextItem {
    std::string speaker_id;
    std::string text;
  };
  struct Ingress {
    std::variant<AudioChunk, TextItem> item;
    std::string event_id;
    double enqueue_ms = 0.0;
  };
  struct Work {
    std::shared_ptr<const Utterance> utterance;
    std::shared_ptr<const Translation> translation;  // signgen from translation
    std::string event_id;
    double enqueue_ms = 0.0;
  };
  struct Speaker {
    std::unique_ptr<UtteranceAssembler> assembler;
    std::uint64_t utterance_seq = 0;
    std::uint64_t translation_seq = 0;
    std::map<std::uint64_t, double> chunk_arrival_ms;
  };

  Speaker& speaker(const std::string& id);
  double now() const { return clock_(); }
  void transcribe(const AudioChunk& chunk, const Ingress& in, StepResult& out);
  void emit_utterances(std::vector<Utterance> utterances, StepResult& out);
  void fan_out(const std::shared_ptr<const Utterance>& u, const std::string& event_id, StepResult& out);
  void drain_stages(StepResult& out);
  void run_translate(const Work& w, StepResult& out);
  void run_emotion(const Work& w, StepResult& out);
  void run_signgen(const Work& w, StepResult& out);
  void run_summary(const Work& w);

  std::shared_ptr<Session> session_;
  std::shared_ptr<const PipelineAssets> assets_;
  std::shared_ptr<LatencyLedger> ledger_;
  Clock clock_;
  double origin_ms_;
  StageQueue<Ingress> ingress_;
  StageQueue<Work> translate_q_;
  StageQueue<Work> emotion_q_;
  StageQueue<Work> signgen_q_;
  StageQueue<Work> summary_q_;
  std::unordered_map<std::string, Speaker> speakers_;
  TranscriptAccumulator transcript_;
  LatencyHistogram e2e_;
};

}  // namespace axs
