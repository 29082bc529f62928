#include "axs/emotion.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

#include "axs/error.hpp"
#include "axs/http_backend.hpp"
#include "axs/text.hpp"

namespace axs {

std::string_view to_string(Emotion e) noexcept {
  switch (e) {
    case Emotion::Joy: return "joy";
    case Emotion::Sadness: return "sadness";
    case Emotion::Anger: return "anger";
    case Emotion::Fear: return "fear";
    case Emotion::Surprise: return "surprise";
    case Emotion::Neutral: return "neutral";
  }
  return "neutral";
}

std::optional<Emotion> parse_emotion(std::string_view s) noexcept {
  for (auto e : kAllEmotions)
    if (text::iequals(s, to_string(e))) return e;
  return std::nullopt;
}

void EmotionLexicon::add(const std::string& word, const EmotionScores& weights) {
  bool positive = false;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw Error(Errc::ParseError, "negative or non-finite weight for " + word);
    positive = positive || w > 0.0;
  }
  if (!positive) throw Error(Errc::ParseError, "no positive weight for " + word);
  entries_[text::to_lower(word)] = weights;
}

const EmotionScores* EmotionLexicon::find(std::string_view word) const {
  const auto it = entries_.find(std::string(word));
  return it == entries_.end() ? nullptr : &it->second;
}

EmotionLexicon parse_emotion_lexicon(std::istream& in, const std::string& name) {
  EmotionLexicon lex;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto where = name + ":" + std::to_string(lineno);
    auto fields = text::split_whitespace(line);
    if (fields.empty() || fields[0].front() == '#') continue;
    if (fields.size() < 2) throw Error(Errc::ParseError, where + ": expected 'word class:weight[,...]'");

    std::string spec;
    for (std::size_t i = 1; i < fields.size(); ++i) spec += fields[i];
    EmotionScores weights{};
    std::size_t pos = 0;
    while (pos <= spec.size()) {
      const auto comma = std::min(spec.find(',', pos), spec.size());
      const std::string_view item(spec.data() + pos, comma - pos);
      const auto colon = item.find(':');
      if (colon == std::string_view::npos) throw Error(Errc::ParseError, where + ": missing ':' in '" + std::string(item) + "'");
      const auto cls = parse_emotion(item.substr(0, colon));
      if (!cls) throw Error(Errc::ParseError, where + ": unknown class '" + std::string(item.substr(0, colon)) + "'");
      const auto num = item.substr(colon + 1);
      double w = 0.0;
      const auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), w);
      if (ec != std::errc{} || ptr != num.data() + num.size())
        throw Error(Errc::ParseError, where + ": bad weight '" + std::string(num) + "'");
      weights[static_cast<std::size_t>(*cls)] += w;
      pos = comma + 1;
    }
    try {
      lex.add(fields[0], weights);
    } catch (const Error& e) {
      throw Error(Errc::ParseError, where + ": " + e.what());
    }
  }
  return lex;
}

EmotionLexicon load_emotion_lexicon(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot open emotion lexicon " + path.string());
  return parse_emotion_lexicon(in, path.string());
}

EmotionLabel classify_emotion(std::string_view input, const EmotionLexicon& lexicon,
                              const ClassifierOptions& options) {
  std::vector<std::string> words;
  for (const auto& tok : text::split_whitespace(input)) words.push_back(text::to_lower(text::trim_punct(tok)));

  EmotionScores scores{};
  for (std::size_t i = 0; i < words.size(); ++i) {
    const auto* w = lexicon.find(words[i]);
    if (!w) continue;
    bool negated = false;
    for (std::size_t back = 1; back <= options.negation_window && back <= i; ++back)
      negated = negated || options.negators.count(words[i - back]) > 0;
    if (negated) continue;
    for (std::size_t c = 0; c < scores.size(); ++c) scores[c] += (*w)[c];
  }

  double total = 0.0;
  double top = 0.0;
  std::size_t top_idx = static_cast<std::size_t>(Emotion::Neutral);
  std::size_t at_top = 0;
  for (std::size_t c = 0; c < scores.size(); ++c) {
    total += scores[c];
    if (scores[c] > top) {
      top = scores[c];
      top_idx = c;
      at_top = 1;
    } else if (scores[c] == top && top > 0.0) {
      ++at_top;
    }
  }
  EmotionLabel out;
  if (total <= 0.0) return out;
  out.label = at_top == 1 ? static_cast<Emotion>(top_idx) : Emotion::Neutral;
  out.confidence = top / total;
  return out;
}

EmotionLabel classify_emotion(const Utterance& utterance, const EmotionLexicon& lexicon,
                              const ClassifierOptions& options) {
  auto label = classify_emotion(utterance.text, lexicon, options);
  label.utterance_id = utterance.utterance_id;
  return label;
}

char32_t emoji_for(Emotion e) noexcept {
  switch (e) {
    case Emotion::Joy: return U'\U0001F600';
    case Emotion::Sadness: return U'\U0001F622';
    case Emotion::Anger: return U'\U0001F620';
    case Emotion::Fear: return U'\U0001F628';
    case Emotion::Surprise: return U'\U0001F632';
    case Emotion::Neutral: return U'\U0001F610';
  }
  return U'\U0001F610';
}

std::string emoji_utf8(Emotion e) {
  const char32_t cp = emoji_for(e);  // all table entries are 4-byte sequences
  std::string out(4, '\0');
  out[0] = static_cast<char>(0xF0 | ((cp >> 18) & 0x07));
  out[1] = static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
  out[2] = static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
  out[3] = static_cast<char>(0x80 | (cp & 0x3F));
  return out;
}

LexiconEmotionBackend::LexiconEmotionBackend(std::shared_ptr<const EmotionLexicon> lexicon,
                                             ClassifierOptions options)
    : lexicon_(std::move(lexicon)), options_(std::move(options)) {}

EmotionLabel LexiconEmotionBackend::classify(const Utterance& utterance) {
  return classify_emotion(utterance, *lexicon_, options_);
}

ExternalEmotionBackend::ExternalEmotionBackend(std::string endpoint, int timeout_ms)
    : endpoint_(std::move(endpoint)), timeout_ms_(timeout_ms) {}

EmotionLabel ExternalEmotionBackend::classify(const Utterance& utterance) {
  const auto resp = post_json(endpoint_, "/classify", {{"text", utterance.text}}, timeout_ms_);
  if (!resp.contains("label") || !resp["label"].is_string())
    throw Error(Errc::MalformedResponse, "classify response lacks string field 'label'");
  const auto label = parse_emotion(resp["label"].get<std::string>());
  if (!label) throw Error(Errc::MalformedResponse, "classify response has unknown label");
  EmotionLabel out;
  out.label = *label;
  out.confidence = resp.value("confidence", 0.0);
  out.utterance_id = utterance.utterance_id;
  return out;
}

std::vector<LabelledSentence> load_emotion_eval_set(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot open evaluation set " + path.string());
  std::vector<LabelledSentence> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto tab = line.rfind('\t');
    const auto gold = tab == std::string::npos ? std::nullopt : parse_emotion(line.substr(tab + 1));
    if (!gold) throw Error(Errc::ParseError, path.string() + ":" + std::to_string(lineno) + ": bad gold class");
    out.push_back({line.substr(0, tab), *gold});
  }
  return out;
}

double emotion_accuracy(const std::vector<LabelledSentence>& set, const EmotionLexicon& lexicon,
                        const ClassifierOptions& options) {
  if (set.empty()) return 0.0;
  std::size_t hits = 0;
  for (const auto& s : set) hits += classify_emotion(s.text, lexicon, options).label == s.gold ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(set.size());
}

}  // namespace axs
