#include "axs/gateway_config.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>

#include "axs/dictionary_io.hpp"
#include "axs/error.hpp"

extern char** environ;

namespace axs {

namespace {

using json = nlohmann::json;

std::string resolve(const std::string& p, const std::filesystem::path& base) {
  if (p.empty() || base.empty() || std::filesystem::path(p).is_absolute()) return p;
  return (base / p).lexically_normal().string();
}

template <typename T>
void take(const json& j, const char* key, T& dst) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return;
  try {
    dst = it->get<T>();
  } catch (const json::exception&) {
    throw Error(Errc::InvalidSettings, std::string("config key '") + key + "' has the wrong type");
  }
}

}  // namespace

GatewayConfig GatewayConfig::from_json(const json& j, const std::filesystem::path& base) {
  if (!j.is_object()) throw Error(Errc::InvalidSettings, "config must be a JSON object");
  GatewayConfig c;
  take(j, "host", c.host);
  take(j, "port", c.port);
  take(j, "threads", c.threads);
  take(j, "log_level", c.log_level);
  take(j, "dictionary", c.dictionary);
  take(j, "require_fingerspell", c.require_fingerspell);
  take(j, "emotion_lexicon", c.emotion_lexicon);
  take(j, "emotion_backend", c.emotion_backend);
  take(j, "emotion_endpoint", c.emotion_endpoint);
  take(j, "summarizer_backend", c.summarizer_backend);
  take(j, "summarizer_endpoint", c.summarizer_endpoint);
  c.dictionary = resolve(c.dictionary, base);
  c.emotion_lexicon = resolve(c.emotion_lexicon, base);

  if (auto it = j.find("lexicons"); it != j.end() && it->is_array()) {
    for (const auto& l : *it) {
      LexiconSpec s;
      take(l, "source", s.source);
      take(l, "target", s.target);
      take(l, "file", s.file);
      take(l, "endpoint", s.endpoint);
      s.file = resolve(s.file, base);
      c.lexicons.push_back(std::move(s));
    }
  }

  std::string rec = "mock";
  take(j, "recognizer", rec);
  if (rec == "mock") c.recognizer.backend = RecognizerBackend::Mock;
  else if (rec == "external") c.recognizer.backend = RecognizerBackend::External;
  else throw Error(Errc::InvalidSettings, "recognizer must be 'mock' or 'external'");
  take(j, "recognizer_endpoint", c.recognizer.endpoint);
  take(j, "recognizer_timeout_ms", c.recognizer.timeout_ms);
  if (c.recognizer.backend == RecognizerBackend::Mock) c.recognizer.endpoint.clear();

  take(j, "summary_k", c.summary.k);
  take(j, "summary_interval_s", c.summary.interval_s);
  take(j, "decision_cues", c.summary.decision_cues);
  take(j, "action_cues", c.summary.action_cues);

  take(j, "chunk_len_ms", c.chunk_len_ms);
  take(j, "overlap_ms", c.overlap_ms);
  take(j, "sample_rate", c.sample_rate);
  take(j, "silence_gap_ms", c.silence_gap_ms);
  take(j, "max_tokens", c.max_tokens);
  take(j, "queue_bound", c.backpressure.queue_bound);
  take(j, "slow_consumer_grace", c.backpressure.slow_consumer_grace);
  take(j, "join_timeout_ms", c.join_timeout_ms);
  take(j, "summary_tick_ms", c.summary_tick_ms);
  take(j, "ingress_credit", c.ingress_credit);
  take(j, "max_outbox", c.max_outbox);
  take(j, "max_message_bytes", c.max_message_bytes);

  if (auto it = j.find("session_defaults"); it != j.end() && it->is_object())
    c.session_defaults = SessionSettings::from_json(*it, c.session_defaults);
  c.session_defaults.summary_interval_s = c.summary.interval_s;
  c.session_defaults.queue_bound = c.backpressure.queue_bound;
  c.validate();
  return c;
}

json GatewayConfig::to_json() const {
  json lex = json::array();
  for (const auto& l : lexicons)
    lex.push_back({{"source", l.source}, {"target", l.target}, {"file", l.file}, {"endpoint", l.endpoint}});
  return {{"host", host},
          {"port", port},
          {"threads", threads},
          {"log_level", log_level},
          {"dictionary", dictionary},
          {"require_fingerspell", require_fingerspell},
          {"emotion_lexicon", emotion_lexicon},
          {"emotion_backend", emotion_backend},
          {"emotion_endpoint", emotion_endpoint},
          {"lexicons", lex},
          {"recognizer", recognizer.backend == RecognizerBackend::Mock ? "mock" : "external"},
          {"recognizer_endpoint", recognizer.endpoint},
          {"recognizer_timeout_ms", recognizer.timeout_ms},
          {"summarizer_backend", summarizer_backend},
          {"summarizer_endpoint", summarizer_endpoint},
          {"summary_k", summary.k},
          {"summary_interval_s", summary.interval_s},
          {"decision_cues", summary.decision_cues},
          {"action_cues", summary.action_cues},
          {"chunk_len_ms", chunk_len_ms},
          {"overlap_ms", overlap_ms},
          {"sample_rate", sample_rate},
          {"silence_gap_ms", silence_gap_ms},
          {"max_tokens", max_tokens},
          {"queue_bound", backpressure.queue_bound},
          {"slow_consumer_grace", backpressure.slow_consumer_grace},
          {"join_timeout_ms", join_timeout_ms},
          {"summary_tick_ms", summary_tick_ms},
          {"ingress_credit", ingress_credit},
          {"max_outbox", max_outbox},
          {"max_message_bytes", max_message_bytes},
          {"session_defaults", session_defaults.to_json()}};
}

void GatewayConfig::validate() const {
  ChunkParams{chunk_len_ms, overlap_ms, sample_rate}.validate();
  recognizer.validate();
  summary.validate();
  backpressure.validate();
  session_defaults.validate();
  if (silence_gap_ms <= 0) throw Error(Errc::InvalidSettings, "silence_gap_ms must be > 0");
  if (join_timeout_ms <= 0) throw Error(Errc::InvalidSettings, "join_timeout_ms must be > 0");
  if (summary_tick_ms <= 0) throw Error(Errc::InvalidSettings, "summary_tick_ms must be > 0");
  if (ingress_credit == 0) throw Error(Errc::InvalidSettings, "ingress_credit must be > 0");
  if (ingress_credit * kMaxParticipants > backpressure.queue_bound)
    throw Error(Errc::InvalidSettings, "ingress_credit * 8 must not exceed queue_bound");
  if (emotion_backend != "lexicon" && emotion_backend != "external")
    throw Error(Errc::InvalidSettings, "emotion_backend must be 'lexicon' or 'external'");
  if (summarizer_backend != "extractive" && summarizer_backend != "external")
    throw Error(Errc::InvalidSettings, "summarizer_backend must be 'extractive' or 'external'");
}

json load_config_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot read config " + path.string());
  json j = json::parse(in, nullptr, false, true);
  if (j.is_discarded()) throw Error(Errc::ParseError, "config " + path.string() + " is not valid JSON");
  return j;
}

std::vector<std::string> apply_env_overrides(json& config, const std::map<std::string, std::string>& env) {
  std::vector<std::string> applied;
  for (const auto& [name, value] : env) {
    if (name.rfind("AXS_", 0) != 0 || name.size() <= 4) continue;
    std::string key = name.substr(4);
    for (auto& ch : key) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    auto it = config.find(key);
    try {
      if (it == config.end() || it->is_string() || it->is_null()) {
        config[key] = value;
      } else if (it->is_boolean()) {
        if (value == "1" || value == "true") *it = true;
        else if (value == "0" || value == "false") *it = false;
        else throw Error(Errc::InvalidSettings, name + " must be true/false");
      } else if (it->is_number_integer()) {
        *it = std::stoll(value);
      } else if (it->is_number()) {
        *it = std::stod(value);
      } else {
        continue;  // arrays and objects are file-only
      }
    } catch (const std::logic_error&) {
      throw Error(Errc::InvalidSettings, name + "='" + value + "' is not a valid value");
    }
    applied.push_back(name);
  }
  return applied;
}

std::map<std::string, std::string> process_environment() {
  std::map<std::string, std::string> env;
  for (char** e = environ; e && *e; ++e) {
    std::string kv(*e);
    auto eq = kv.find('=');
    if (eq != std::string::npos) env.emplace(kv.substr(0, eq), kv.substr(eq + 1));
  }
  return env;
}

std::shared_ptr<const PipelineAssets> load_assets(const GatewayConfig& c) {
  auto a = std::make_shared<PipelineAssets>();
  if (c.dictionary.empty()) throw Error(Errc::IoError, "no sign dictionary configured");
  if (!std::filesystem::exists(c.dictionary)) throw Error(Errc::IoError, "sign dictionary not found: " + c.dictionary);
  a->dictionary = std::make_shared<const SignDictionary>(load_dictionary(c.dictionary, c.require_fingerspell));

  auto translator = std::make_shared<TranslatorRegistry>();
  for (const auto& l : c.lexicons) {
    LangPair pair{l.source, l.target};
    if (!l.endpoint.empty()) {
      pair.backend = TranslationBackend::External;
      pair.endpoint = l.endpoint;
      translator->register_pair(pair);
    } else {
      if (!std::filesystem::exists(l.file)) throw Error(Errc::IoError, "lexicon not found: " + l.file);
      translator->register_pair_from_file(pair, l.file);
    }
  }
  a->translator = translator;

  if (c.emotion_backend == "external") {
    a->emotion = std::make_shared<ExternalEmotionBackend>(c.emotion_endpoint);
  } else {
    if (c.emotion_lexicon.empty() || !std::filesystem::exists(c.emotion_lexicon))
      throw Error(Errc::IoError, "emotion lexicon not found: " + c.emotion_lexicon);
    a->emotion = std::make_shared<LexiconEmotionBackend>(
        std::make_shared<const EmotionLexicon>(load_emotion_lexicon(c.emotion_lexicon)));
  }

  a->recognizer = make_recognizer(c.recognizer);
  if (c.summarizer_backend == "external") a->summarizer = std::make_shared<ExternalSummaryBackend>(c.summarizer_endpoint);
  else a->summarizer = std::make_shared<ExtractiveSummaryBackend>();
  a->summary = c.summary;
  a->chunk = ChunkParams{c.chunk_len_ms, c.overlap_ms, c.sample_rate};
  a->assembler.silence_gap_s = c.silence_gap_ms / 1000.0;
  a->assembler.max_tokens = c.max_tokens;
  a->assembler.language = c.session_defaults.source_language;
  a->backpressure = c.backpressure;
  return a;
}

}  // namespace axs
