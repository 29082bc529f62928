#include <doctest.h>

#include <random>
#include <sstream>

#include "axs/emotion.hpp"
#include "axs/error.hpp"
#include "axs/text.hpp"
#include "test_support.hpp"

using namespace axs;

namespace {

const EmotionLexicon& bundled() {
  static const auto lex = load_emotion_lexicon(axs_test::data_path("emotion/lexicon.txt"));
  return lex;
}

/// Straight re-derivation of the scoring rule over the bundled lexicon.
Emotion oracle(const std::string& s, const EmotionLexicon& lex) {
  std::vector<std::string> w;
  for (const auto& t : text::split_whitespace(s)) w.push_back(text::to_lower(text::trim_punct(t)));
  EmotionScores sc{};
  for (std::size_t i = 0; i < w.size(); ++i) {
    const auto* v = lex.find(w[i]);
    if (!v) continue;
    const bool neg = (i >= 1 && (w[i - 1] == "not" || w[i - 1] == "no" || w[i - 1] == "never")) ||
                     (i >= 2 && (w[i - 2] == "not" || w[i - 2] == "no" || w[i - 2] == "never"));
    if (neg) continue;
    for (std::size_t c = 0; c < 6; ++c) sc[c] += (*v)[c];
  }
  const double top = *std::max_element(sc.begin(), sc.end());
  if (top <= 0) return Emotion::Neutral;
  if (std::count(sc.begin(), sc.end(), top) > 1) return Emotion::Neutral;
  return static_cast<Emotion>(std::max_element(sc.begin(), sc.end()) - sc.begin());
}

}  // namespace

TEST_CASE("bundled lexicon has at least 300 entries") { CHECK(bundled().size() >= 300); }

TEST_CASE("line format") {
  std::istringstream in("happy joy:2.0\n# c\nodd surprise:1,fear:0.5\n");
  auto lex = parse_emotion_lexicon(in);
  REQUIRE(lex.find("happy"));
  CHECK((*lex.find("happy"))[static_cast<int>(Emotion::Joy)] == 2.0);
  CHECK((*lex.find("odd"))[static_cast<int>(Emotion::Fear)] == 0.5);
}

TEST_CASE("malformed line is a PARSE_ERROR at that line") {
  std::istringstream in("happy joy:2.0\nsad sadness=1\n");
  try {
    parse_emotion_lexicon(in, "lex");
    FAIL("expected PARSE_ERROR");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::ParseError);
    CHECK(std::string(e.what()).find(":2") != std::string::npos);
  }
}

TEST_CASE("examples") {
  CHECK(classify_emotion("I am so happy we shipped this", bundled()).label == Emotion::Joy);
  const auto empty = classify_emotion("", bundled());
  CHECK(empty.label == Emotion::Neutral);
  CHECK(empty.confidence == 0.0);
  CHECK(classify_emotion("I am not happy", bundled()).label == Emotion::Neutral);
}

TEST_CASE("classifier equals the scoring oracle on the eval sentences") {
  for (const auto& s : load_emotion_eval_set(axs_test::data_path("emotion/eval.tsv")))
    CHECK(classify_emotion(s.text, bundled()).label == oracle(s.text, bundled()));
}

TEST_CASE("accuracy on the bundled labelled set") {
  const auto set = load_emotion_eval_set(axs_test::data_path("emotion/eval.tsv"));
  CHECK(set.size() == 100);
  CHECK(emotion_accuracy(set, bundled()) >= 0.90);
}

TEST_CASE("fuzzed bytes always land in one of the six classes") {
  std::mt19937 rng(5);
  for (int i = 0; i < 2000; ++i) {
    std::string s(rng() % 64, '\0');
    for (auto& c : s) c = static_cast<char>(rng() % 256);
    const auto l = classify_emotion(s, bundled());
    CHECK(static_cast<int>(l.label) < 6);
    CHECK(l.confidence >= 0.0);
    CHECK(l.confidence <= 1.0);
  }
}

TEST_CASE("emoji table") {
  CHECK(emoji_for(Emotion::Joy) == U'\U0001F600');
  CHECK(emoji_for(Emotion::Sadness) == U'\U0001F622');
  CHECK(emoji_for(Emotion::Anger) == U'\U0001F620');
  CHECK(emoji_for(Emotion::Fear) == U'\U0001F628');
  CHECK(emoji_for(Emotion::Surprise) == U'\U0001F632');
  CHECK(emoji_for(Emotion::Neutral) == U'\U0001F610');
  CHECK(emoji_utf8(Emotion::Joy) == "\xF0\x9F\x98\x80");
}
