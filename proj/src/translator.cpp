#include "axs/translator.hpp"

#include <chrono>
#include <fstream>
#include <regex>

#include "axs/error.hpp"
#include "axs/http_backend.hpp"
#include "axs/text.hpp"

namespace axs {

BilingualLexicon parse_bilingual_lexicon(std::istream& in, const std::string& name) {
  BilingualLexicon lex;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::split_whitespace(line).empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw Error(Errc::ParseError, name + ":" + std::to_string(lineno) + ": expected source<TAB>target");
    const auto src = text::split_whitespace(line.substr(0, tab));
    const auto dst = text::split_whitespace(line.substr(tab + 1));
    if (src.size() != 1 || dst.size() != 1)
      throw Error(Errc::ParseError, name + ":" + std::to_string(lineno) + ": entries must be single words");
    lex[text::to_lower(src[0])] = dst[0];
  }
  return lex;
}

BilingualLexicon load_bilingual_lexicon(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot open lexicon " + path.string());
  return parse_bilingual_lexicon(in, path.string());
}

bool is_language_code(const std::string& code) {
  static const std::regex re("^[A-Za-z]{2,3}(-[A-Za-z0-9]{2,8})*$");
  return std::regex_match(code, re);
}

std::string baseline_translate(const std::string& input, const BilingualLexicon& lexicon) {
  const auto tokens = text::split_whitespace(input);
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const auto& tok : tokens) {
    const auto parts = text::split_token(tok);
    const auto it = lexicon.find(text::to_lower(parts.core));
    if (parts.core.empty() || it == lexicon.end()) {
      out.push_back(tok);
      continue;
    }
    std::string word = text::starts_upper(parts.core) ? text::capitalize_first(it->second) : it->second;
    out.push_back(std::string(parts.lead) + word + std::string(parts.trail));
  }
  return text::join(out);
}

TranslatorRegistry::TranslatorRegistry() : snapshot_(std::make_shared<const Snapshot>()) {}

std::shared_ptr<const TranslatorRegistry::Snapshot> TranslatorRegistry::snapshot() const {
  std::lock_guard lock(mu_);
  return snapshot_;
}

void TranslatorRegistry::register_pair(LangPair pair, std::optional<BilingualLexicon> lexicon) {
  if (!is_language_code(pair.source) || !is_language_code(pair.target))
    throw Error(Errc::InvalidPair, "malformed language code in " + pair.source + "->" + pair.target);
  if (text::iequals(pair.source, pair.target))
    throw Error(Errc::InvalidPair, "source and target are both " + pair.source);
  if (pair.backend == TranslationBackend::Baseline && !lexicon)
    throw Error(Errc::MissingLexicon, pair.source + "->" + pair.target + " needs a bilingual dictionary");
  if (pair.backend == TranslationBackend::External && pair.endpoint.empty())
    throw Error(Errc::InvalidPair, "external pair " + pair.source + "->" + pair.target + " has no endpoint");

  Entry entry{pair, lexicon ? std::make_shared<const BilingualLexicon>(std::move(*lexicon)) : nullptr};
  std::lock_guard lock(mu_);
  auto next = std::make_shared<Snapshot>(*snapshot_);
  (*next)[{pair.source, pair.target}] = std::move(entry);
  snapshot_ = std::move(next);
}

void TranslatorRegistry::register_pair_from_file(LangPair pair, const std::filesystem::path& lexicon_file) {
  register_pair(std::move(pair), load_bilingual_lexicon(lexicon_file));
}

bool TranslatorRegistry::has_pair(const std::string& source, const std::string& target) const {
  const auto snap = snapshot();
  return snap->count({source, target}) > 0;
}

std::vector<LangPair> TranslatorRegistry::pairs() const {
  const auto snap = snapshot();
  std::vector<LangPair> out;
  for (const auto& [key, entry] : *snap) out.push_back(entry.pair);
  return out;
}

const TranslatorRegistry::Entry& TranslatorRegistry::lookup(const Snapshot& snap, const std::string& source,
                                                            const std::string& target) const {
  const auto it = snap.find({source, target});
  if (it == snap.end()) throw Error(Errc::PairNotRegistered, source + "->" + target);
  return it->second;
}

std::string TranslatorRegistry::translate_text(const std::string& input, const std::string& source,
                                               const std::string& target) const {
  const auto snap = snapshot();
  const Entry& entry = lookup(*snap, source, target);
  if (entry.pair.backend == TranslationBackend::Baseline) return baseline_translate(input, *entry.lexicon);

  const auto resp = post_json(entry.pair.endpoint, "/translate",
                              {{"text", input}, {"source", source}, {"target", target}}, entry.pair.timeout_ms);
  if (!resp.contains("text") || !resp["text"].is_string())
    throw Error(Errc::MalformedResponse, "translate response lacks string field 'text'");
  return resp["text"].get<std::string>();
}

Translation TranslatorRegistry::translate(const Utterance& utterance, const std::string& target) const {
  const auto started = std::chrono::steady_clock::now();
  const auto snap = snapshot();
  Translation t;
  t.pair = lookup(*snap, utterance.language, target).pair;
  t.utterance_id = utterance.utterance_id;
  t.source_text = utterance.text;
  t.target_text = translate_text(utterance.text, utterance.language, target);
  t.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - started)
                     .count();
  return t;
}

}  // namespace axs
