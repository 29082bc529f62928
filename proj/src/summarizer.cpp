#include "axs/summarizer.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>

#include "axs/http_backend.hpp"
#include "axs/ids.hpp"
#include "axs/text.hpp"

namespace axs {

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

std::vector<std::string> words_of(std::string_view sentence) {
  std::vector<std::string> out;
  for (const auto& tok : text::split_whitespace(sentence)) {
    auto core = text::to_lower(text::trim_punct(tok));
    if (!core.empty()) out.push_back(std::move(core));
  }
  return out;
}

bool has_alnum(const std::string& w) {
  return std::any_of(w.begin(), w.end(), [](unsigned char c) { return std::isalnum(c) || c >= 0x80; });
}

const std::unordered_set<std::string> kWeekdays = {"monday", "tuesday", "wednesday", "thursday",
                                                   "friday", "saturday", "sunday"};

bool contains_phrase(const std::vector<std::string>& words, const std::vector<std::string>& phrase) {
  if (phrase.empty() || phrase.size() > words.size()) return false;
  for (std::size_t i = 0; i + phrase.size() <= words.size(); ++i) {
    bool ok = true;
    for (std::size_t j = 0; j < phrase.size() && ok; ++j) {
      // "action items" matches "action item"
      ok = words[i + j] == phrase[j] || (j + 1 == phrase.size() && words[i + j] == phrase[j] + "s");
    }
    if (ok) return true;
  }
  return false;
}

bool any_cue(const std::vector<std::string>& words, const std::vector<std::string>& cues) {
  return std::any_of(cues.begin(), cues.end(), [&](const std::string& cue) {
    return contains_phrase(words, text::split_whitespace(text::to_lower(cue)));
  });
}

}  // namespace

void SummaryConfig::validate() const {
  if (!(interval_s > 0.0)) throw Error(Errc::InvalidSettings, "summary interval must be > 0");
  if (k == 0) throw Error(Errc::InvalidSettings, "summary k must be >= 1");
}

const std::unordered_set<std::string>& default_stopwords() {
  static const std::unordered_set<std::string> words = {
      "a",     "about", "above", "after", "again", "all",   "also",  "am",    "an",    "and",   "any",
      "are",   "as",    "at",    "be",    "been",  "before", "being", "both",  "but",   "by",    "can",
      "could", "did",   "do",    "does",  "doing", "down",  "during", "each", "few",   "for",   "from",
      "had",   "has",   "have",  "having", "he",   "her",   "here",  "hers",  "him",   "his",   "how",
      "i",     "if",    "in",    "into",  "is",    "it",    "its",   "just",  "me",    "more",  "most",
      "my",    "no",    "nor",   "not",   "now",   "of",    "off",   "on",    "once",  "only",  "or",
      "other", "our",   "ours",  "out",   "over",  "own",   "same",  "she",   "should", "so",   "some",
      "such",  "than",  "that",  "the",   "their", "them",  "then",  "there", "these", "they",  "this",
      "those", "through", "to",  "too",   "under", "until", "up",    "very",  "was",   "we",    "were",
      "what",  "when",  "where", "which", "while", "who",   "whom",  "why",   "with",  "would", "you",
      "your",  "yours", "let",   "lets",  "okay",  "ok",    "yes",   "yeah",  "um",    "uh",    "s",
      "t",     "will",  "must",  "shall", "may",   "might", "get",   "got",   "going", "go"};
  return words;
}

std::string_view to_string(SummaryTrigger t) noexcept {
  return t == SummaryTrigger::Scheduled ? "scheduled" : "on_demand";
}

nlohmann::json SummaryRecord::to_json() const {
  return {{"summary_id", summary_id}, {"session_id", session_id},     {"window", {t_start, t_end}},
          {"key_points", key_points}, {"decisions", decisions},       {"action_items", action_items},
          {"language", language},     {"trigger", to_string(trigger)}};
}

std::vector<std::string> split_sentences(std::string_view s) {
  std::vector<std::string> out;
  auto emit = [&](std::size_t b, std::size_t e) {
    while (b < e && is_space(s[b])) ++b;
    while (e > b && is_space(s[e - 1])) --e;
    if (e > b) out.emplace_back(s.substr(b, e - b));
  };
  std::size_t begin = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (c != '.' && c != '!' && c != '?') continue;
    // swallow runs like "?!" or "..."
    std::size_t j = i + 1;
    while (j < s.size() && (s[j] == '.' || s[j] == '!' || s[j] == '?')) ++j;
    if (j == s.size() || is_space(s[j])) {
      emit(begin, j);
      begin = j;
    }
    i = j - 1;
  }
  emit(begin, s.size());
  return out;
}

CueKind classify_cue(std::string_view sentence, const SummaryConfig& config) {
  const auto words = words_of(sentence);
  if (any_cue(words, config.decision_cues)) return CueKind::Decision;
  if (any_cue(words, config.action_cues)) return CueKind::Action;
  if (config.by_weekday_cue) {
    for (std::size_t i = 0; i + 1 < words.size(); ++i)
      if (words[i] == "by" && kWeekdays.contains(words[i + 1])) return CueKind::Action;
  }
  return CueKind::None;
}

std::vector<double> score_sentences(const std::vector<std::string>& sentences, const SummaryConfig& config) {
  const auto& stop = config.stopwords.empty() ? default_stopwords() : config.stopwords;
  std::vector<std::vector<std::string>> content(sentences.size());
  std::unordered_map<std::string, std::size_t> freq;
  std::size_t max_freq = 0;
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    for (auto& w : words_of(sentences[i])) {
      if (stop.contains(w) || !has_alnum(w)) continue;
      max_freq = std::max(max_freq, ++freq[w]);
      content[i].push_back(std::move(w));
    }
  }
  std::vector<double> scores(sentences.size(), 0.0);
  if (max_freq == 0) return scores;
  for (std::size_t i = 0; i < sentences.size(); ++i)
    for (const auto& w : content[i]) scores[i] += static_cast<double>(freq[w]) / static_cast<double>(max_freq);
  return scores;
}

SummaryRecord extract_summary(std::string_view window, const SummaryConfig& config) {
  const auto sentences = split_sentences(window);
  if (sentences.empty()) throw Error(Errc::EmptyWindow, "window has no sentences");
  const auto scores = score_sentences(sentences, config);

  SummaryRecord rec;
  rec.summary_id = next_id();
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    switch (classify_cue(sentences[i], config)) {
      case CueKind::Decision: rec.decisions.push_back(sentences[i]); break;
      case CueKind::Action: rec.action_items.push_back(sentences[i]); break;
      case CueKind::None: candidates.push_back(i); break;
    }
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  if (candidates.size() > config.k) candidates.resize(config.k);
  std::sort(candidates.begin(), candidates.end());
  for (auto i : candidates) rec.key_points.push_back(sentences[i]);
  return rec;
}

std::string window_text(const std::vector<TranscriptEntry>& entries) {
  std::string out;
  for (const auto& e : entries) {
    if (e.text.empty()) continue;
    if (!out.empty()) out += ' ';
    out += e.text;
  }
  return out;
}

ExternalSummaryBackend::ExternalSummaryBackend(std::string endpoint, int timeout_ms)
    : endpoint_(std::move(endpoint)), timeout_ms_(timeout_ms) {}

SummaryRecord ExternalSummaryBackend::summarize(std::string_view window, const SummaryConfig& config) {
  if (split_sentences(window).empty()) throw Error(Errc::EmptyWindow, "window has no sentences");
  const auto body = post_json(endpoint_, "/summarize", {{"text", std::string(window)}}, timeout_ms_);
  if (!body.contains("summary") || !body["summary"].is_string())
    throw Error(Errc::MalformedResponse, "summarize response lacks string 'summary'");
  SummaryRecord rec;
  rec.summary_id = next_id();
  rec.key_points = split_sentences(body["summary"].get<std::string>());
  for (const auto& s : split_sentences(window)) {
    const auto kind = classify_cue(s, config);
    if (kind == CueKind::Decision) rec.decisions.push_back(s);
    if (kind == CueKind::Action) rec.action_items.push_back(s);
  }
  return rec;
}

namespace {
constexpr double kBoundarySlack_s = 1e-6;
}  // namespace

TranscriptAccumulator::TranscriptAccumulator(double interval_s, double start_s)
    : interval_s_(interval_s), window_start_(start_s) {
  if (!(interval_s > 0.0)) throw Error(Errc::InvalidSettings, "summary interval must be > 0");
}

bool TranscriptAccumulator::accumulate(const Utterance& u, double arrival_s) {
  return accumulate(TranscriptEntry{u.utterance_id, u.speaker_id, u.text, arrival_s});
}

bool TranscriptAccumulator::accumulate(TranscriptEntry entry) {
  if (!entry.utterance_id.empty() && !seen_.insert(entry.utterance_id).second) return false;
  // Late arrivals stamped before the open window still belong to it.
  entry.arrival_s = std::max(entry.arrival_s, window_start_);
  open_.push_back(std::move(entry));
  ++total_;
  return true;
}

SummaryWindow TranscriptAccumulator::close(double now_s, SummaryTrigger trigger) {
  SummaryWindow w;
  w.t_start = window_start_;
  w.t_end = std::max(now_s, window_start_);
  w.trigger = trigger;
  // Entries stamped at or after now stay in the next window.
  auto split = std::stable_partition(open_.begin(), open_.end(),
                                     [&](const TranscriptEntry& e) { return e.arrival_s < w.t_end; });
  w.entries.assign(std::make_move_iterator(open_.begin()), std::make_move_iterator(split));
  open_.erase(open_.begin(), split);
  window_start_ = w.t_end;
  return w;
}

std::optional<SummaryWindow> TranscriptAccumulator::schedule_tick(double now_s) {
  // A boundary a rounding error away still counts as reached.
  if (now_s - window_start_ < interval_s_ - kBoundarySlack_s) return std::nullopt;
  const bool any = std::any_of(open_.begin(), open_.end(),
                               [&](const TranscriptEntry& e) { return e.arrival_s < now_s; });
  if (!any) return std::nullopt;
  return close(now_s, SummaryTrigger::Scheduled);
}

SummaryWindow TranscriptAccumulator::request(double now_s) {
  const bool any = std::any_of(open_.begin(), open_.end(),
                               [&](const TranscriptEntry& e) { return e.arrival_s <= now_s; });
  if (!any) throw Error(Errc::EmptyWindow, "nothing transcribed since the last summary");
  // Closing strictly after `now` keeps an entry that arrived exactly at now.
  return close(std::nextafter(now_s, now_s + 1.0), SummaryTrigger::OnDemand);
}

void SummaryBook::open_session(const std::string& session_id, double interval_s, double start_s) {
  std::lock_guard lock(mu_);
  if (sessions_.contains(session_id)) throw Error(Errc::DuplicateId, session_id);
  sessions_.emplace(session_id, TranscriptAccumulator(interval_s, start_s));
}

void SummaryBook::close_session(const std::string& session_id) {
  std::lock_guard lock(mu_);
  sessions_.erase(session_id);
}

TranscriptAccumulator& SummaryBook::get(const std::string& session_id) {
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) throw Error(Errc::SessionUnknown, session_id);
  return it->second;
}

bool SummaryBook::accumulate(const std::string& session_id, const Utterance& utterance, double arrival_s) {
  std::lock_guard lock(mu_);
  return get(session_id).accumulate(utterance, arrival_s);
}

std::optional<SummaryWindow> SummaryBook::schedule_tick(const std::string& session_id, double now_s) {
  std::lock_guard lock(mu_);
  return get(session_id).schedule_tick(now_s);
}

SummaryWindow SummaryBook::request(const std::string& session_id, double now_s) {
  std::lock_guard lock(mu_);
  return get(session_id).request(now_s);
}

std::vector<TargetSummary> summarize_multilingual(const SummaryRecord& record,
                                                  const std::vector<std::string>& targets,
                                                  const TranslatorRegistry& translator) {
  std::vector<TargetSummary> out;
  for (const auto& target : targets) {
    TargetSummary ts;
    ts.target = target;
    try {
      SummaryRecord r = record;
      r.language = target;
      auto tr = [&](std::vector<std::string>& list) {
        for (auto& s : list) s = translator.translate_text(s, record.language, target);
      };
      tr(r.key_points);
      tr(r.decisions);
      tr(r.action_items);
      ts.record = std::move(r);
    } catch (const Error& e) {
      ts.status = e.code();
      ts.message = e.what();
    }
    out.push_back(std::move(ts));
  }
  return out;
}

}  // namespace axs
