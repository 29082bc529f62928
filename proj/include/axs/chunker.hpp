#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace axs {

/// A fixed-length window of mono 16-bit PCM cut from one speaker's stream.
/// `samples` always holds the nominal chunk length; a trailing chunk is
/// zero-padded and `content_duration` records how much of it is real audio.
struct AudioChunk {
  std::string session_id;
  std::string speaker_id;
  std::uint64_t seq = 0;
  double start_time = 0.0;
  double duration = 1.0;
  double content_duration = 1.0;
  int sample_rate = 16000;
  std::vector<std::int16_t> samples;
  std::optional<std::string> oracle_text;

  double end_time() const noexcept { return start_time + duration; }
};

struct TranscriptSegment {
  std::uint64_t chunk_seq = 0;
  std::string text;
  std::vector<std::string> tokens;
  double t0 = 0.0;
  double t1 = 0.0;
  bool final = false;
  double confidence = 0.0;

  bool empty() const noexcept { return tokens.empty(); }
};

/// Builds a segment whose tokens are the whitespace tokenization of `text`.
TranscriptSegment make_segment(std::uint64_t chunk_seq, std::string text, double t0, double t1,
                               double confidence);

struct Utterance {
  std::string utterance_id;
  std::string speaker_id;
  std::string text;
  std::vector<std::string> tokens;
  double t0 = 0.0;
  double t1 = 0.0;
  std::string language = "en";
  /// seq of the last chunk that contributed words; end-to-end latency anchor.
  std::uint64_t last_chunk_seq = 0;
};

struct ChunkParams {
  int chunk_len_ms = 1000;
  int overlap_ms = 500;
  int sample_rate = 16000;

  /// Throws Error(INVALID_PARAMS) unless 0 <= overlap < chunk_len and sample_rate > 0.
  void validate() const;

  std::size_t chunk_samples() const noexcept;
  std::size_t overlap_samples() const noexcept;
  std::size_t stride_samples() const noexcept { return chunk_samples() - overlap_samples(); }
  double stride_seconds() const noexcept;
  double chunk_seconds() const noexcept;
};

/// Incremental splitter. Feed PCM with push(); complete chunks come out as
/// soon as their last sample arrives. finish() emits the trailing partial
/// chunk when the stream end is not covered yet.
class StreamChunker {
 public:
  StreamChunker(ChunkParams params, std::string session_id, std::string speaker_id);

  std::vector<AudioChunk> push(std::span<const std::int16_t> pcm);
  std::vector<AudioChunk> finish();

  const ChunkParams& params() const noexcept { return params_; }

 private:
  AudioChunk cut(std::uint64_t k, std::size_t available) const;

  ChunkParams params_;
  std::string session_id_;
  std::string speaker_id_;
  std::vector<std::int16_t> buffer_;
  std::size_t buffer_origin_ = 0;  // absolute index of buffer_[0]
  std::size_t total_ = 0;
  std::uint64_t next_k_ = 0;
  bool finished_ = false;
};

/// Splits a whole PCM stream. Chunk k starts at k * (chunk_len - overlap);
/// consecutive chunks share exactly `overlap`; every sample is covered.
std::vector<AudioChunk> chunk_stream(std::span<const std::int16_t> pcm, const ChunkParams& params,
                                     const std::string& session_id = {},
                                     const std::string& speaker_id = {});

/// How two consecutive hypotheses line up: merged = prev[0 .. n - drop_prev)
/// followed by next[skip_next ..).
struct OverlapSplice {
  std::size_t drop_prev = 0;
  std::size_t skip_next = 0;
};

/// Finds the longest run that is both a suffix of `prev` and a prefix of
/// `next` (case-insensitive). Without such a run, a trailing `prev` token that
/// is a strict prefix of the matching `next` token is treated as a word cut
/// at the chunk boundary and dropped; the cut word may follow a shorter agreed
/// run ("a b fra" + "a b fragment").
OverlapSplice splice_overlap(std::span<const std::string> prev, std::span<const std::string> next);

std::vector<std::string> merge_overlaps(std::span<const std::string> prev,
                                        std::span<const std::string> next);

struct AssemblerConfig {
  double silence_gap_s = 1.5;
  std::size_t max_tokens = 60;
  std::string language = "en";
};

/// Applies the capitalise-and-terminate punctuation rule.
std::string punctuate(std::span<const std::string> tokens);

/// Turns one speaker's sequence of segment hypotheses into finalised
/// utterances. An utterance closes when the silence since the last voiced
/// segment reaches `silence_gap_s`, or when `max_tokens` words are pending
/// (one trailing word is held back so the next overlap can still repair it).
class UtteranceAssembler {
 public:
  explicit UtteranceAssembler(std::string speaker_id, AssemblerConfig config = {});

  std::vector<Utterance> push(const TranscriptSegment& segment);
  std::vector<Utterance> flush();

  /// Live caption text of the not-yet-final words.
  std::string pending_text() const;
  bool has_pending() const noexcept { return !pending_.empty(); }

 private:
  Utterance make_utterance(std::span<const std::string> tokens) const;
  void finalize_into(std::vector<Utterance>& out);

  std::string speaker_id_;
  AssemblerConfig config_;
  std::vector<std::string> pending_;
  std::vector<std::string> last_hyp_;
  std::optional<std::uint64_t> last_seq_;
  double last_voiced_t1_ = 0.0;
  std::uint64_t last_voiced_seq_ = 0;
  double utt_t0_ = 0.0;
};

/// Batch form: runs every segment through an assembler. With
/// `flush_at_end`, words still pending after the last segment are emitted.
std::vector<Utterance> assemble_utterances(std::span<const TranscriptSegment> segments,
                                           const std::string& speaker_id,
                                           const AssemblerConfig& config = {},
                                           bool flush_at_end = false);

/// Utterance for text typed by a participant; skips recognition and merging.
Utterance utterance_from_text(const std::string& speaker_id, const std::string& text,
                              const std::string& language, double t0);

}  // namespace axs
