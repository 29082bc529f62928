#pragma once

#include <array>
#include <filesystem>
#include <istream>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "axs/chunker.hpp"

namespace axs {

enum class Emotion : std::uint8_t { Joy, Sadness, Anger, Fear, Surprise, Neutral };

inline constexpr std::array<Emotion, 6> kAllEmotions = {Emotion::Joy,      Emotion::Sadness,
                                                        Emotion::Anger,    Emotion::Fear,
                                                        Emotion::Surprise, Emotion::Neutral};

std::string_view to_string(Emotion e) noexcept;
std::optional<Emotion> parse_emotion(std::string_view s) noexcept;

/// Per-class weights indexed by Emotion.
using EmotionScores = std::array<double, 6>;

struct EmotionLabel {
  Emotion label = Emotion::Neutral;
  double confidence = 0.0;
  std::string utterance_id;
};

class EmotionLexicon {
 public:
  /// Every vector needs at least one positive weight and no negative ones.
  void add(const std::string& word, const EmotionScores& weights);
  const EmotionScores* find(std::string_view word) const;
  std::size_t size() const noexcept { return entries_.size(); }

 private:
  std::unordered_map<std::string, EmotionScores> entries_;
};

/// Format: one "word class:weight[,class:weight...]" per line, '#' comments.
/// Throws Error(PARSE_ERROR) with the offending line number.
EmotionLexicon parse_emotion_lexicon(std::istream& in, const std::string& name = "<stream>");
EmotionLexicon load_emotion_lexicon(const std::filesystem::path& path);

struct ClassifierOptions {
  std::unordered_set<std::string> negators = {"not", "no", "never"};
  std::size_t negation_window = 2;
};

/// Lexicon scoring with negation. Total over arbitrary bytes; ties and empty
/// evidence resolve to neutral.
EmotionLabel classify_emotion(std::string_view text, const EmotionLexicon& lexicon,
                              const ClassifierOptions& options = {});
EmotionLabel classify_emotion(const Utterance& utterance, const EmotionLexicon& lexicon,
                              const ClassifierOptions& options = {});

char32_t emoji_for(Emotion e) noexcept;
std::string emoji_utf8(Emotion e);

class EmotionBackend {
 public:
  virtual ~EmotionBackend() = default;
  virtual EmotionLabel classify(const Utterance& utterance) = 0;
  virtual std::string name() const = 0;
};

class LexiconEmotionBackend final : public EmotionBackend {
 public:
  explicit LexiconEmotionBackend(std::shared_ptr<const EmotionLexicon> lexicon, ClassifierOptions options = {});
  EmotionLabel classify(const Utterance& utterance) override;
  std::string name() const override { return "lexicon"; }

 private:
  std::shared_ptr<const EmotionLexicon> lexicon_;
  ClassifierOptions options_;
};

/// POST /classify {text} -> {label, confidence}
class ExternalEmotionBackend final : public EmotionBackend {
 public:
  ExternalEmotionBackend(std::string endpoint, int timeout_ms = 200);
  EmotionLabel classify(const Utterance& utterance) override;
  std::string name() const override { return "external"; }

 private:
  std::string endpoint_;
  int timeout_ms_;
};

struct LabelledSentence {
  std::string text;
  Emotion gold = Emotion::Neutral;
};

/// TSV "sentence<TAB>gold_class".
std::vector<LabelledSentence> load_emotion_eval_set(const std::filesystem::path& path);

/// Fraction of sentences whose predicted class equals the gold class.
double emotion_accuracy(const std::vector<LabelledSentence>& set, const EmotionLexicon& lexicon,
                        const ClassifierOptions& options = {});

}  // namespace axs
