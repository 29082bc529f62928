#pragma once

#include <filesystem>
#include <istream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "axs/chunker.hpp"

namespace axs {

enum class TranslationBackend { Baseline, External };

struct LangPair {
  std::string source;
  std::string target;
  TranslationBackend backend = TranslationBackend::Baseline;
  std::string endpoint;  // external only
  int timeout_ms = 2000;
};

/// Lowercased source word -> target word.
using BilingualLexicon = std::unordered_map<std::string, std::string>;

/// Parses "source<TAB>target" lines; '#' starts a comment line. Both sides
/// must be single words. Throws Error(PARSE_ERROR) naming the line.
BilingualLexicon parse_bilingual_lexicon(std::istream& in, const std::string& name = "<stream>");
BilingualLexicon load_bilingual_lexicon(const std::filesystem::path& path);

/// BCP-47-style check: a 2-3 letter primary subtag plus optional subtags.
bool is_language_code(const std::string& code);

struct Translation {
  std::string utterance_id;
  std::string source_text;
  std::string target_text;
  LangPair pair;
  std::int64_t latency_ms = 0;
};

/// Word-for-word dictionary substitution. Unknown words pass through;
/// surrounding punctuation and an initial capital are kept.
std::string baseline_translate(const std::string& text, const BilingualLexicon& lexicon);

/// Language-pair registry. Registration swaps in a new immutable snapshot;
/// translate() works on whichever snapshot it grabbed and never blocks
/// registration for longer than a pointer copy.
class TranslatorRegistry {
 public:
  TranslatorRegistry();

  /// Errors: INVALID_PAIR (bad code or source == target), MISSING_LEXICON
  /// (baseline pair without a dictionary).
  void register_pair(LangPair pair, std::optional<BilingualLexicon> lexicon = std::nullopt);
  void register_pair_from_file(LangPair pair, const std::filesystem::path& lexicon_file);

  bool has_pair(const std::string& source, const std::string& target) const;
  std::vector<LangPair> pairs() const;

  /// Errors: PAIR_NOT_REGISTERED; BACKEND_TIMEOUT / BACKEND_UNAVAILABLE /
  /// MALFORMED_RESPONSE from an external backend.
  Translation translate(const Utterance& utterance, const std::string& target) const;
  std::string translate_text(const std::string& text, const std::string& source,
                             const std::string& target) const;

 private:
  struct Entry {
    LangPair pair;
    std::shared_ptr<const BilingualLexicon> lexicon;
  };
  using Snapshot = std::map<std::pair<std::string, std::string>, Entry>;

  std::shared_ptr<const Snapshot> snapshot() const;
  const Entry& lookup(const Snapshot& snap, const std::string& source, const std::string& target) const;

  mutable std::mutex mu_;
  std::shared_ptr<const Snapshot> snapshot_;
};

}  // namespace axs
