#include "axs/chunker.hpp"

#include <algorithm>
#include <cmath>

#include "axs/error.hpp"
#include "axs/ids.hpp"
#include "axs/text.hpp"

namespace axs {

TranscriptSegment make_segment(std::uint64_t chunk_seq, std::string text, double t0, double t1,
                               double confidence) {
  TranscriptSegment seg;
  seg.chunk_seq = chunk_seq;
  seg.tokens = text::split_whitespace(text);
  seg.text = std::move(text);
  seg.t0 = t0;
  seg.t1 = t1;
  seg.confidence = confidence;
  return seg;
}

// ---------------------------------------------------------------------------
// chunking

void ChunkParams::validate() const {
  if (sample_rate <= 0) throw Error(Errc::InvalidParams, "sample_rate must be positive");
  if (chunk_len_ms <= 0) throw Error(Errc::InvalidParams, "chunk_len_ms must be positive");
  if (overlap_ms < 0 || overlap_ms >= chunk_len_ms)
    throw Error(Errc::InvalidParams, "overlap must satisfy 0 <= overlap < chunk_len");
  if (stride_samples() == 0) throw Error(Errc::InvalidParams, "stride rounds to zero samples");
}

std::size_t ChunkParams::chunk_samples() const noexcept {
  return static_cast<std::size_t>(std::llround(static_cast<double>(chunk_len_ms) * sample_rate / 1000.0));
}

std::size_t ChunkParams::overlap_samples() const noexcept {
  return static_cast<std::size_t>(std::llround(static_cast<double>(overlap_ms) * sample_rate / 1000.0));
}

double ChunkParams::stride_seconds() const noexcept {
  return static_cast<double>(stride_samples()) / sample_rate;
}

double ChunkParams::chunk_seconds() const noexcept {
  return static_cast<double>(chunk_samples()) / sample_rate;
}

StreamChunker::StreamChunker(ChunkParams params, std::string session_id, std::string speaker_id)
    : params_(params), session_id_(std::move(session_id)), speaker_id_(std::move(speaker_id)) {
  params_.validate();
}

AudioChunk StreamChunker::cut(std::uint64_t k, std::size_t available) const {
  const std::size_t n = params_.chunk_samples();
  const std::size_t start = static_cast<std::size_t>(k) * params_.stride_samples();
  AudioChunk c;
  c.session_id = session_id_;
  c.speaker_id = speaker_id_;
  c.seq = k;
  c.sample_rate = params_.sample_rate;
  c.start_time = static_cast<double>(start) / params_.sample_rate;
  c.duration = static_cast<double>(n) / params_.sample_rate;
  c.content_duration = static_cast<double>(available) / params_.sample_rate;
  c.samples.assign(n, 0);
  auto first = buffer_.begin() + static_cast<std::ptrdiff_t>(start - buffer_origin_);
  std::copy(first, first + static_cast<std::ptrdiff_t>(available), c.samples.begin());
  return c;
}

std::vector<AudioChunk> StreamChunker::push(std::span<const std::int16_t> pcm) {
  if (finished_) throw Error(Errc::InvalidParams, "push after finish");
  buffer_.insert(buffer_.end(), pcm.begin(), pcm.end());
  total_ += pcm.size();

  std::vector<AudioChunk> out;
  const std::size_t n = params_.chunk_samples();
  const std::size_t stride = params_.stride_samples();
  while (next_k_ * stride + n <= total_) {
    out.push_back(cut(next_k_, n));
    ++next_k_;
  }
  // Samples before the next chunk's start are no longer needed.
  const std::size_t keep_from = next_k_ * stride;
  if (keep_from > buffer_origin_) {
    buffer_.erase(buffer_.begin(), buffer_.begin() + static_cast<std::ptrdiff_t>(keep_from - buffer_origin_));
    buffer_origin_ = keep_from;
  }
  return out;
}

std::vector<AudioChunk> StreamChunker::finish() {
  std::vector<AudioChunk> out;
  if (finished_) return out;
  finished_ = true;
  const std::size_t n = params_.chunk_samples();
  const std::size_t stride = params_.stride_samples();
  // Chunk k exists while the previous chunk ends before the stream does.
  while (total_ > 0 && (next_k_ == 0 || (next_k_ - 1) * stride + n < total_)) {
    const std::size_t start = next_k_ * stride;
    out.push_back(cut(next_k_, std::min(n, total_ - start)));
    ++next_k_;
  }
  return out;
}

std::vector<AudioChunk> chunk_stream(std::span<const std::int16_t> pcm, const ChunkParams& params,
                                     const std::string& session_id, const std::string& speaker_id) {
  StreamChunker chunker(params, session_id, speaker_id);
  auto out = chunker.push(pcm);
  auto tail = chunker.finish();
  out.insert(out.end(), std::make_move_iterator(tail.begin()), std::make_move_iterator(tail.end()));
  return out;
}

// ---------------------------------------------------------------------------
// overlap reconciliation

namespace {
bool runs_equal(std::span<const std::string> a, std::span<const std::string> b) {
  return std::equal(a.begin(), a.end(), b.begin(), b.end(),
                    [](const std::string& x, const std::string& y) { return text::iequals(x, y); });
}
}  // namespace

OverlapSplice splice_overlap(std::span<const std::string> prev, std::span<const std::string> next) {
  const std::size_t n = prev.size();
  const std::size_t m = next.size();
  for (std::size_t len = std::min(n, m); len > 0; --len) {
    if (runs_equal(prev.subspan(n - len), next.first(len))) return {0, len};
  }
  if (n == 0 || m == 0) return {};
  const std::string& tail = prev[n - 1];
  for (std::size_t j = std::min(n - 1, m - 1) + 1; j-- > 0;) {
    if (runs_equal(prev.subspan(n - 1 - j, j), next.first(j)) && text::is_strict_prefix_ci(tail, next[j]))
      return {1, j};
  }
  return {};
}

std::vector<std::string> merge_overlaps(std::span<const std::string> prev,
                                        std::span<const std::string> next) {
  const auto sp = splice_overlap(prev, next);
  std::vector<std::string> out(prev.begin(), prev.end() - static_cast<std::ptrdiff_t>(sp.drop_prev));
  out.insert(out.end(), next.begin() + static_cast<std::ptrdiff_t>(sp.skip_next), next.end());
  return out;
}

// ---------------------------------------------------------------------------
// utterance assembly

std::string punctuate(std::span<const std::string> tokens) {
  std::string s = text::capitalize_first(text::join(tokens));
  if (s.empty()) return s;
  const char last = s.back();
  if (last == '.' || last == '!' || last == '?') return s;
  if (last == ',' || last == ';' || last == ':') s.pop_back();
  s += '.';
  return s;
}

UtteranceAssembler::UtteranceAssembler(std::string speaker_id, AssemblerConfig config)
    : speaker_id_(std::move(speaker_id)), config_(std::move(config)) {
  if (config_.max_tokens < 1) config_.max_tokens = 1;
}

Utterance UtteranceAssembler::make_utterance(std::span<const std::string> tokens) const {
  Utterance u;
  u.utterance_id = next_id();
  u.speaker_id = speaker_id_;
  u.text = punctuate(tokens);
  u.tokens = text::split_whitespace(u.text);
  u.t0 = utt_t0_;
  u.t1 = std::max(last_voiced_t1_, utt_t0_ + 1e-3);
  u.language = config_.language;
  u.last_chunk_seq = last_voiced_seq_;
  return u;
}

void UtteranceAssembler::finalize_into(std::vector<Utterance>& out) {
  if (!pending_.empty()) out.push_back(make_utterance(pending_));
  pending_.clear();
  last_hyp_.clear();
}

std::vector<Utterance> UtteranceAssembler::push(const TranscriptSegment& seg) {
  std::vector<Utterance> out;
  const bool consecutive = last_seq_ && seg.chunk_seq == *last_seq_ + 1;

  if (seg.empty()) {
    if (!pending_.empty() && seg.t1 - last_voiced_t1_ >= config_.silence_gap_s) finalize_into(out);
    last_hyp_.clear();
    last_seq_ = seg.chunk_seq;
    return out;
  }

  if (!pending_.empty() && seg.t0 - last_voiced_t1_ >= config_.silence_gap_s) finalize_into(out);

  OverlapSplice sp;
  if (consecutive && !last_hyp_.empty()) sp = splice_overlap(last_hyp_, seg.tokens);
  if (sp.drop_prev > 0 && !pending_.empty()) pending_.pop_back();
  if (pending_.empty()) utt_t0_ = seg.t0;
  pending_.insert(pending_.end(), seg.tokens.begin() + static_cast<std::ptrdiff_t>(sp.skip_next),
                  seg.tokens.end());

  last_hyp_ = seg.tokens;
  last_seq_ = seg.chunk_seq;
  last_voiced_t1_ = seg.t1;
  last_voiced_seq_ = seg.chunk_seq;

  while (pending_.size() > config_.max_tokens) {
    std::span<const std::string> head(pending_.data(), config_.max_tokens);
    out.push_back(make_utterance(head));
    pending_.erase(pending_.begin(), pending_.begin() + static_cast<std::ptrdiff_t>(config_.max_tokens));
    utt_t0_ = seg.t0;
  }
  return out;
}

std::vector<Utterance> UtteranceAssembler::flush() {
  std::vector<Utterance> out;
  finalize_into(out);
  last_seq_.reset();
  return out;
}

std::string UtteranceAssembler::pending_text() const { return text::join(pending_); }

std::vector<Utterance> assemble_utterances(std::span<const TranscriptSegment> segments,
                                           const std::string& speaker_id,
                                           const AssemblerConfig& config, bool flush_at_end) {
  UtteranceAssembler assembler(speaker_id, config);
  std::vector<Utterance> out;
  for (const auto& seg : segments) {
    auto u = assembler.push(seg);
    out.insert(out.end(), std::make_move_iterator(u.begin()), std::make_move_iterator(u.end()));
  }
  if (flush_at_end) {
    auto u = assembler.flush();
    out.insert(out.end(), std::make_move_iterator(u.begin()), std::make_move_iterator(u.end()));
  }
  return out;
}

Utterance utterance_from_text(const std::string& speaker_id, const std::string& text,
                              const std::string& language, double t0) {
  constexpr double kSecondsPerWord = 0.4;
  Utterance u;
  u.utterance_id = next_id();
  u.speaker_id = speaker_id;
  const auto words = text::split_whitespace(text);
  u.text = punctuate(words);
  u.tokens = text::split_whitespace(u.text);
  u.t0 = t0;
  u.t1 = t0 + kSecondsPerWord * static_cast<double>(std::max<std::size_t>(1, words.size()));
  u.language = language;
  return u;
}

}  // namespace axs
