// Chunking and summariser properties over randomised inputs.
#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "axs/chunker.hpp"
#include "axs/summarizer.hpp"
#include "axs/text.hpp"
#include "criteria.hpp"

namespace axs_accept {
namespace {

/// First violated chunking invariant for one stream, or "".
std::string check_coverage(const std::vector<std::int16_t>& pcm, const axs::ChunkParams& p) {
  const auto chunks = axs::chunk_stream(pcm, p);
  const std::size_t n = pcm.size(), C = p.chunk_samples(), S = p.stride_samples(), O = p.overlap_samples();
  if (S + O != C) return "stride + overlap != chunk length";
  if (chunks.empty()) return "no chunks";
  for (std::size_t k = 0; k < chunks.size(); ++k) {
    const auto& c = chunks[k];
    const std::size_t s = k * S;
    if (c.seq != k) return "seq gap";
    if (c.samples.size() != C) return "chunk length";
    if (s >= n) return "chunk starts past the stream end";
    if (std::abs(c.start_time - static_cast<double>(s) / p.sample_rate) > 1e-9) return "start time";
    const std::size_t real = std::min(C, n - s);
    if (std::abs(c.content_duration - static_cast<double>(real) / p.sample_rate) > 1e-9) return "content duration";
    for (std::size_t j = 0; j < C; ++j)
      if (c.samples[j] != (j < real ? pcm[s + j] : 0)) return "sample content";
    if (k + 1 < chunks.size()) {
      // Consecutive chunks share exactly the overlap.
      if (s + C >= n) return "chunk after the stream end is covered";
      const auto& d = chunks[k + 1];
      if (!std::equal(c.samples.begin() + static_cast<std::ptrdiff_t>(S), c.samples.end(), d.samples.begin()))
        return "overlap content";
    }
  }
  if ((chunks.size() - 1) * S + C < n) return "stream end not covered";

  // The incremental splitter agrees with the batch one.
  std::mt19937 rng(static_cast<unsigned>(n));
  axs::StreamChunker sc(p, "", "");
  std::vector<axs::AudioChunk> inc;
  for (std::size_t off = 0; off < n;) {
    const std::size_t take = std::min<std::size_t>(n - off, 1 + rng() % (2 * C));
    for (auto& c : sc.push(std::span(pcm).subspan(off, take))) inc.push_back(std::move(c));
    off += take;
  }
  for (auto& c : sc.finish()) inc.push_back(std::move(c));
  if (inc.size() != chunks.size()) return "streaming chunk count";
  for (std::size_t k = 0; k < inc.size(); ++k)
    if (inc[k].samples != chunks[k].samples) return "streaming chunk content";
  return "";
}

/// Synthetic words, none a prefix of another.
std::vector<std::string> make_vocabulary(std::mt19937& rng) {
  static const std::string cons = "bcdfghklmnprstvz", vow = "aeiou";
  std::set<std::string> words;
  while (words.size() < 400) {
    std::string w;
    const int syl = 2 + static_cast<int>(rng() % 3);
    for (int s = 0; s < syl; ++s) {
      w += cons[rng() % cons.size()];
      w += vow[rng() % vow.size()];
    }
    words.insert(w);
  }
  std::vector<std::string> out;
  for (const auto& w : words) {
    const bool prefix = std::any_of(words.begin(), words.end(),
                                    [&](const std::string& o) { return o != w && o.starts_with(w); });
    if (!prefix) out.push_back(w);
  }
  return out;
}

struct TimedWord {
  std::string text;
  double t0, t1;
};

/// Hypothesis for one window: whole words inside it, plus a fragment of a
/// word the window end cuts through. A word cut by the window start is lost.
std::string hypothesis(const std::vector<TimedWord>& words, double c0, double c1) {
  std::vector<std::string> out;
  for (const auto& w : words) {
    if (w.t0 >= c0 && w.t1 <= c1) {
      out.push_back(w.text);
    } else if (w.t0 >= c0 && w.t0 < c1 && w.t1 > c1) {
      const double f = (c1 - w.t0) / (w.t1 - w.t0);
      const auto len = static_cast<std::size_t>(f * static_cast<double>(w.text.size()));
      if (f >= 0.25 && len >= 1 && len < w.text.size()) out.push_back(w.text.substr(0, len));
    }
  }
  return axs::text::join(out);
}

/// First reconstruction mismatch for one ground-truth stream, or "".
std::string check_reconstruction(std::mt19937& rng, const std::vector<std::string>& vocab) {
  const std::size_t n = 1 + rng() % 60;
  std::vector<std::string> truth;
  while (truth.size() < n) {
    const auto& w = vocab[rng() % vocab.size()];
    // No word recurs within six positions, so overlaps are unambiguous.
    const std::size_t from = truth.size() > 6 ? truth.size() - 6 : 0;
    if (std::find(truth.begin() + static_cast<std::ptrdiff_t>(from), truth.end(), w) == truth.end())
      truth.push_back(w);
  }
  std::uniform_real_distribution<double> dur(0.25, 0.45), gap(0.0, 0.1);
  std::vector<TimedWord> words;
  double t = gap(rng);
  for (const auto& w : truth) {
    const double d = dur(rng);
    words.push_back({w, t, t + d});
    t += d + gap(rng);
  }

  std::vector<axs::TranscriptSegment> segs;
  for (std::uint64_t k = 0; 0.5 * static_cast<double>(k) < t; ++k) {
    const double c0 = 0.5 * static_cast<double>(k), c1 = c0 + 1.0;
    segs.push_back(axs::make_segment(k, hypothesis(words, c0, c1), c0, c1, 0.9));
  }
  axs::AssemblerConfig cfg;
  cfg.silence_gap_s = 1e9;
  cfg.max_tokens = 100000;
  const auto utts = axs::assemble_utterances(segs, "spk", cfg, true);
  const auto want = axs::punctuate(truth);
  if (utts.size() != 1) return "expected one utterance, got " + std::to_string(utts.size());
  if (utts[0].text != want) return "'" + utts[0].text + "' != '" + want + "'";
  return "";
}

}  // namespace

Outcome chunking_properties() {
  std::mt19937 rng(20241);
  static const int rates[] = {8000, 16000, 22050, 44100, 48000};
  int coverage_ok = 0;
  std::string first_failure;
  for (int i = 0; i < 1000; ++i) {
    axs::ChunkParams p;
    p.sample_rate = rates[rng() % 5];
    p.chunk_len_ms = 100 + static_cast<int>(rng() % 1901);
    p.overlap_ms = static_cast<int>(rng() % static_cast<unsigned>(p.chunk_len_ms));
    std::vector<std::int16_t> pcm(1 + rng() % (4 * static_cast<unsigned>(p.sample_rate)));
    for (auto& s : pcm) s = static_cast<std::int16_t>(rng());
    const auto why = check_coverage(pcm, p);
    if (why.empty())
      ++coverage_ok;
    else if (first_failure.empty())
      first_failure = fmt("coverage case %d (len %d ms, overlap %d ms, n %zu): %s", i, p.chunk_len_ms, p.overlap_ms,
                          pcm.size(), why.c_str());
  }

  const auto vocab = make_vocabulary(rng);
  int merge_ok = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto why = check_reconstruction(rng, vocab);
    if (why.empty())
      ++merge_ok;
    else if (first_failure.empty())
      first_failure = fmt("merge case %d: %s", i, why.c_str());
  }
  const bool pass = coverage_ok == 1000 && merge_ok == 1000;
  return {pass, fmt("coverage/overlap %d/1000, merge reconstruction %d/1000%s%s", coverage_ok, merge_ok,
                    first_failure.empty() ? "" : "; ", first_failure.c_str())};
}

namespace {

const std::vector<std::string>& sentence_bank() {
  static const std::vector<std::string> bank = {
      "The budget review covers the third quarter",
      "Revenue grew by 3.5 percent over the period",
      "We decided to move the launch to March",
      "The board approved the new hiring plan",
      "Everyone agreed that the pilot went well",
      "Maria will send the revised slides by Friday",
      "Someone must update the risk register",
      "Action item for Tom is the vendor contract",
      "Please finish the survey by monday",
      "Customer feedback on the beta was mostly positive",
      "Support tickets dropped after the last release",
      "Is the data pipeline stable enough",
      "What a great result for the team",
      "The design team showed three mock-ups",
      "Latency on the mobile app is still too high",
      "Our partners in Lyon want a French demo",
      "Training sessions start next week",
      "The accessibility audit found two issues",
      "Captions lag behind the speaker at times",
      "Sign language output looks smooth now",
  };
  return bank;
}

std::string random_entry_text(std::mt19937& rng) {
  static const char* terms[] = {".", "!", "?", ".", ""};
  const auto& bank = sentence_bank();
  std::string out;
  const int n = 1 + static_cast<int>(rng() % 3);
  for (int i = 0; i < n; ++i) {
    if (!out.empty()) out += ' ';
    out += bank[rng() % bank.size()];
    out += (i + 1 == n) ? terms[rng() % 5] : terms[rng() % 4];
  }
  return out;
}

/// First extractiveness violation for one random window, or "".
std::string check_extractive(std::mt19937& rng, int index) {
  std::vector<axs::TranscriptEntry> entries(1 + rng() % 30);
  for (std::size_t i = 0; i < entries.size(); ++i)
    entries[i] = {"u" + std::to_string(index) + "-" + std::to_string(i), "spk", random_entry_text(rng),
                  static_cast<double>(i)};
  const auto window = axs::window_text(entries);
  axs::SummaryConfig cfg;
  cfg.k = 1 + rng() % 6;
  const auto rec = axs::extract_summary(window, cfg);
  const auto sentences = axs::split_sentences(window);
  if (rec.key_points.size() > cfg.k) return "more key points than k";
  for (const auto* list : {&rec.key_points, &rec.decisions, &rec.action_items})
    for (const auto& s : *list) {
      if (s.empty() || window.find(s) == std::string::npos) return "'" + s + "' is not a window substring";
      if (std::find(sentences.begin(), sentences.end(), s) == sentences.end()) return "'" + s + "' is not a sentence";
    }
  if (rec.key_points.empty() && rec.decisions.empty() && rec.action_items.empty()) return "empty summary";
  return "";
}

struct ScheduleStats {
  int fires = 0;
  double max_lag = 0.0;
  std::string failure;
};

/// Drives one accumulator on a one-second tick and checks every window
/// against an independent model of the schedule.
void check_schedule(std::mt19937& rng, int index, ScheduleStats& stats) {
  const double tick = 1.0;
  const double interval = 30.0 + static_cast<double>(rng() % 871);
  const double start = static_cast<double>(rng() % 1000);
  axs::TranscriptAccumulator acc(interval, start);

  std::vector<double> arrivals;
  double t = start;
  std::exponential_distribution<double> gapd(1.0 / (interval / 4.0));
  while (t < start + 6.0 * interval) {
    t += gapd(rng);
    arrivals.push_back(t);
  }

  std::vector<axs::SummaryWindow> windows;
  std::vector<double> open;  // model of arrivals not yet summarised
  double model_start = start;
  std::size_t next = 0;
  const int ticks = static_cast<int>(6.0 * interval / tick) + 2;
  auto fail = [&](const std::string& why) {
    if (stats.failure.empty()) stats.failure = fmt("schedule case %d: %s", index, why.c_str());
  };

  for (int i = 1; i <= ticks; ++i) {
    const double now = start + i * tick;
    for (; next < arrivals.size() && arrivals[next] <= now; ++next) {
      acc.accumulate({"e" + std::to_string(next), "spk", "Entry " + std::to_string(next) + ".", arrivals[next]});
      open.push_back(arrivals[next]);
    }
    // An occasional on-demand request shares the same boundaries.
    if (rng() % 97 == 0 && acc.pending() > 0) {
      const auto w = acc.request(now);
      windows.push_back(w);
      std::erase_if(open, [&](double a) { return a <= now; });
      model_start = w.t_end;
      continue;
    }
    const bool due = now - model_start >= interval - 1e-6 &&
                     std::any_of(open.begin(), open.end(), [&](double a) { return a < now; });
    const auto fired = acc.schedule_tick(now);
    if (fired.has_value() != due) return fail(fmt("tick %.0f: fired %d, expected %d", now, fired.has_value(), due));
    if (!fired) continue;
    ++stats.fires;
    // Content that predates the boundary is summarised on the first tick at or after it.
    const double boundary = model_start + interval;
    if (std::any_of(open.begin(), open.end(), [&](double a) { return a < boundary; })) {
      const double lag = now - boundary;
      stats.max_lag = std::max(stats.max_lag, lag);
      if (lag >= tick) return fail(fmt("fired %.3f s after the boundary", lag));
    }
    std::erase_if(open, [&](double a) { return a < now; });
    model_start = now;
    windows.push_back(*fired);
  }

  // Windows tile [start, last end) and hold every arrival exactly once.
  double edge = start;
  std::set<std::string> seen;
  for (const auto& w : windows) {
    if (w.t_start != edge) return fail(fmt("window starts at %.3f, previous ended at %.3f", w.t_start, edge));
    if (!(w.t_end > w.t_start)) return fail("empty interval");
    for (const auto& e : w.entries) {
      if (e.arrival_s < w.t_start || e.arrival_s >= w.t_end) return fail("entry outside its window");
      if (!seen.insert(e.utterance_id).second) return fail("entry in two windows");
    }
    edge = w.t_end;
  }
  if (seen.size() + acc.pending() != next) return fail("entries lost");
}

}  // namespace

Outcome summariser_properties() {
  std::mt19937 rng(777);
  int extractive_ok = 0;
  std::string first_failure;
  for (int i = 0; i < 500; ++i) {
    const auto why = check_extractive(rng, i);
    if (why.empty())
      ++extractive_ok;
    else if (first_failure.empty())
      first_failure = fmt("window %d: %s", i, why.c_str());
  }
  ScheduleStats stats;
  for (int i = 0; i < 200; ++i) check_schedule(rng, i, stats);
  if (first_failure.empty()) first_failure = stats.failure;

  const bool pass = extractive_ok == 500 && stats.failure.empty() && stats.fires > 0;
  return {pass, fmt("extractive %d/500 windows; 200 schedules, %d scheduled windows, max trigger lag %.3f s "
                    "(< 1 tick), windows tile%s%s",
                    extractive_ok, stats.fires, stats.max_lag, first_failure.empty() ? "" : "; ",
                    first_failure.c_str())};
}

}  // namespace axs_accept
