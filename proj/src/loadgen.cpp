#include "axs/loadgen.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <deque>
#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>
#include <spdlog/spdlog.h>

#include "axs/error.hpp"
#include "axs/text.hpp"

namespace axs::load {

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;
using json = nlohmann::json;

std::string_view to_string(Pacing p) noexcept { return p == Pacing::Realtime ? "realtime" : "max"; }

std::optional<Pacing> parse_pacing(std::string_view s) noexcept {
  if (s == "realtime") return Pacing::Realtime;
  if (s == "max" || s == "max-rate") return Pacing::MaxRate;
  return std::nullopt;
}

void LoadProfile::validate() const {
  if (clients < 1) throw Error(Errc::InvalidSettings, "clients must be >= 1");
  if (msgs_per_client < 1) throw Error(Errc::InvalidSettings, "msgs_per_client must be >= 1");
  if (ramp_s < 0) throw Error(Errc::InvalidSettings, "ramp_s must be >= 0");
  if (room_size < 1 || room_size > 8) throw Error(Errc::InvalidSettings, "room_size must be in [1, 8]");
  if (word_ms <= 0 || trailing_silence_ms < 0 || silence_gap_ms <= 0)
    throw Error(Errc::InvalidSettings, "word_ms and silence_gap_ms must be > 0");
  chunk.validate();
  for (const auto& line : script)
    if (text::split_whitespace(line).size() > 60)
      throw Error(Errc::InvalidSettings, "script utterances are limited to 60 words");
}

std::vector<std::string> load_script(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot read script " + path.string());
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    auto words = text::split_whitespace(line);
    if (words.empty() || words.front().starts_with("#")) continue;
    out.push_back(text::join(words));
  }
  return out;
}

ClientPlan plan_client(const LoadProfile& p, std::size_t rotation) {
  ClientPlan plan;
  if (p.script.empty()) return plan;
  const std::int64_t len = p.chunk.chunk_len_ms;
  const std::int64_t stride = p.chunk.chunk_len_ms - p.chunk.overlap_ms;
  const auto n = static_cast<std::int64_t>(p.msgs_per_client);
  const std::int64_t horizon = (n - 1) * stride + len;

  struct Word {
    std::int64_t t0, t1;
    std::size_t utt;
    std::string text;
  };
  std::vector<Word> words;
  std::vector<std::vector<std::string>> utt_words;
  std::int64_t t = 0;
  for (std::size_t u = 0; t < horizon; ++u) {
    auto toks = text::split_whitespace(p.script[(rotation + u) % p.script.size()]);
    for (auto& w : toks) {
      words.push_back({t, t + p.word_ms, u, w});
      t += p.word_ms;
    }
    utt_words.push_back(std::move(toks));
    t += p.trailing_silence_ms;
  }

  std::vector<std::optional<std::size_t>> chunk_utt(static_cast<std::size_t>(n));
  plan.chunk_text.resize(static_cast<std::size_t>(n));
  std::size_t wi = 0;
  for (std::int64_t k = 0; k < n; ++k) {
    const std::int64_t c0 = k * stride, c1 = c0 + len;
    while (wi < words.size() && words[wi].t0 < c0) ++wi;
    std::vector<std::string> in;
    for (std::size_t j = wi; j < words.size() && words[j].t1 <= c1; ++j) {
      in.push_back(words[j].text);
      chunk_utt[static_cast<std::size_t>(k)] = words[j].utt;
    }
    plan.chunk_text[static_cast<std::size_t>(k)] = text::join(in);
  }

  for (std::size_t u = 0; u < utt_words.size(); ++u) {
    std::optional<std::int64_t> lv;
    for (std::int64_t k = 0; k < n; ++k)
      if (chunk_utt[static_cast<std::size_t>(k)] == u) lv = k;
    if (!lv) break;
    const std::int64_t lv_t1 = *lv * stride + len;
    for (std::int64_t k = *lv + 1; k < n; ++k) {
      const bool voiced = !plan.chunk_text[static_cast<std::size_t>(k)].empty();
      const std::int64_t gap = voiced ? k * stride - lv_t1 : k * stride + len - lv_t1;
      if (gap >= p.silence_gap_ms) {
        plan.expected.push_back({punctuate(utt_words[u]), static_cast<std::uint64_t>(*lv),
                                 static_cast<std::uint64_t>(k)});
        break;
      }
    }
  }
  return plan;
}

// ---------------------------------------------------------------------------

Thresholds Thresholds::defaults() {
  return {{{"Average response time under load", "latency_p95_ms", "<", 2000.0},
           {"Emotion stage latency", "emotion_p99_ms", "<", 200.0},
           {"Throughput", "throughput_rps", ">=", 900.0},
           {"Error rate under load", "error_rate", "==", 0.0},
           {"Transcript mismatches", "mismatches", "==", 0.0}}};
}

Thresholds Thresholds::from_json(const json& j) {
  const json& rows = j.is_object() && j.contains("rows") ? j["rows"] : j;
  if (!rows.is_array()) throw Error(Errc::ParseError, "thresholds must be an array of rows");
  Thresholds t;
  for (const auto& r : rows) {
    if (!r.is_object() || !r.contains("metric") || !r.contains("op") || !r.contains("value"))
      throw Error(Errc::ParseError, "threshold rows need metric, op and value");
    ThresholdRow row{r.value("name", r["metric"].get<std::string>()), r["metric"].get<std::string>(),
                     r["op"].get<std::string>(), r["value"].get<double>()};
    if (row.op != "<" && row.op != "<=" && row.op != ">=" && row.op != ">" && row.op != "==")
      throw Error(Errc::ParseError, "unsupported threshold op '" + row.op + "'");
    t.rows.push_back(std::move(row));
  }
  return t;
}

json Thresholds::to_json() const {
  json rows = json::array();
  for (const auto& r : this->rows) rows.push_back({{"name", r.name}, {"metric", r.metric}, {"op", r.op}, {"value", r.value}});
  return {{"rows", rows}};
}

Thresholds load_thresholds(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot read thresholds " + path.string());
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw Error(Errc::ParseError, path.string() + " is not valid JSON");
  return Thresholds::from_json(j);
}

LatencySummary summarize_latency(const std::vector<double>& samples) {
  if (samples.empty()) throw Error(Errc::NoSamples, "no latency samples");
  LatencyHistogram h;
  for (double s : samples) h.add(s);
  return {h.percentile(50), h.percentile(95), h.percentile(99), h.max(), h.mean(), h.count()};
}

namespace {

std::optional<double> metric_value(const LoadReport& r, const std::string& metric) {
  auto stage_p = [&](const char* stage, const char* key) -> std::optional<double> {
    if (!r.stages.is_object() || !r.stages.contains(stage)) return std::nullopt;
    const auto& row = r.stages[stage];
    if (row.value("count", 0) == 0) return std::nullopt;
    return row.value(key, 0.0);
  };
  if (metric == "latency_p50_ms") return r.latency ? std::optional(r.latency->p50) : std::nullopt;
  if (metric == "latency_p95_ms") return r.latency ? std::optional(r.latency->p95) : std::nullopt;
  if (metric == "latency_p99_ms") return r.latency ? std::optional(r.latency->p99) : std::nullopt;
  if (metric == "latency_max_ms") return r.latency ? std::optional(r.latency->max) : std::nullopt;
  if (metric == "throughput_rps") return r.throughput_rps;
  if (metric == "request_rps") return r.request_rps;
  if (metric == "errors") return static_cast<double>(r.errors);
  if (metric == "error_rate") return r.sent ? static_cast<double>(r.errors) / static_cast<double>(r.sent) : 0.0;
  if (metric == "mismatches") return static_cast<double>(r.mismatches);
  if (metric == "clients") return static_cast<double>(r.connected);
  if (metric == "emotion_p99_ms") return stage_p("emotion", "p99_ms");
  if (metric == "transcription_mean_ms") return stage_p("transcription", "mean_ms");
  if (metric == "translation_mean_ms") return stage_p("translation", "mean_ms");
  return std::nullopt;
}

bool compare(double m, const std::string& op, double v) {
  if (op == "<") return m < v;
  if (op == "<=") return m <= v;
  if (op == ">") return m > v;
  if (op == ">=") return m >= v;
  return m == v;
}

}  // namespace

void apply_thresholds(LoadReport& r, const Thresholds& t) {
  r.verdicts.clear();
  for (const auto& row : t.rows) {
    Verdict v{row.name, row.metric, row.op, row.value, metric_value(r, row.metric), false};
    v.pass = v.measured && compare(*v.measured, row.op, row.value);
    r.verdicts.push_back(std::move(v));
  }
}

bool LoadReport::kpi_pass() const {
  return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.pass || !v.measured; });
}

json LoadReport::to_json() const {
  json v = json::array();
  for (const auto& x : verdicts)
    v.push_back({{"name", x.name},
                 {"metric", x.metric},
                 {"op", x.op},
                 {"threshold", x.threshold},
                 {"measured", x.measured ? json(*x.measured) : json(nullptr)},
                 {"pass", x.pass}});
  json lat = nullptr;
  if (latency)
    lat = {{"p50", latency->p50}, {"p95", latency->p95}, {"p99", latency->p99}, {"max", latency->max},
           {"mean", latency->mean}, {"count", latency->count}};
  return {{"clients", clients},
          {"pacing", to_string(pacing)},
          {"duration_s", duration_s},
          {"connected", connected},
          {"connect_failed", connect_failed},
          {"sent", sent},
          {"received", received},
          {"errors", errors},
          {"errors_by_code", errors_by_code},
          {"mismatches", mismatches},
          {"missing", missing},
          {"reorder_observed", reorder_observed},
          {"expected_utterances", expected_utterances},
          {"peak_in_flight", peak_in_flight},
          {"throughput_rps", throughput_rps},
          {"request_rps", request_rps},
          {"latency_ms", lat},
          {"stages", stages},
          {"kpi_verdict", v}};
}

// ---------------------------------------------------------------------------

namespace {

double now_ms() {
  using namespace std::chrono;
  return duration<double, std::milli>(steady_clock::now().time_since_epoch()).count();
}

struct RunState {
  const LoadProfile& profile;
  net::io_context& ioc;
  tcp::endpoint endpoint;
  std::string host;
  std::string blob;  // base64 of one silent chunk
  std::size_t resolved = 0;
  std::size_t connected = 0;
  std::size_t finished = 0;
  std::uint64_t in_flight = 0;
  std::uint64_t peak_in_flight = 0;
  bool aborted = false;
  double last_done_ms = 0.0;
};

struct ClientStats {
  std::uint64_t sent = 0, received = 0, errors = 0, mismatches = 0, missing = 0, reorder = 0;
  std::map<std::string, std::uint64_t> by_code;
  std::vector<Sample> samples;
  bool connected = false, failed = false;
};

class Client : public std::enable_shared_from_this<Client> {
 public:
  Client(RunState& run, std::size_t index, ClientPlan plan)
      : run_(run),
        index_(index),
        ws_(net::make_strand(run.ioc)),
        timer_(run.ioc),
        plan_(std::move(plan)),
        send_ms_(plan_.chunk_text.size(), 0.0),
        sign_seen_(plan_.expected.size(), false) {
    id_ = run.profile.room_prefix + "-c" + std::to_string(index);
    room_ = run.profile.room_prefix + "-" + std::to_string(index / run.profile.room_size);
    for (std::size_t i = 0; i < plan_.expected.size(); ++i) {
      by_last_seq_[plan_.expected[i].last_chunk_seq] = i;
      by_finalize_seq_[plan_.expected[i].finalize_seq] = i;
    }
    want_reorder_ = run.profile.inject_reorder && plan_.chunk_text.size() >= 4;
  }

  void start() {
    started_ms_ = now_ms();
    beast::get_lowest_layer(ws_).expires_after(std::chrono::seconds(30));
    beast::get_lowest_layer(ws_).async_connect(run_.endpoint, [self = shared_from_this()](beast::error_code ec) {
      if (ec) return self->fail_connect("connect: " + ec.message());
      beast::get_lowest_layer(self->ws_).expires_never();
      self->ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::client));
      self->ws_.read_message_max(64 << 20);
      self->ws_.async_handshake(self->run_.host, "/ws", [self](beast::error_code ec2) {
        if (ec2) return self->fail_connect("handshake: " + ec2.message());
        self->send_join();
        self->read();
      });
    });
  }

  /// Called periodically; gives up on responses older than the settle window.
  void check_settle(double now) {
    if (done_ || started_ms_ == 0) return;
    if (!joined_) {
      if (now - started_ms_ > run_.profile.settle_s * 1000.0 + 30000.0) fail_connect("join timed out");
      return;
    }
    if (next_chunk_ < plan_.chunk_text.size() || writing_) return;
    if (now - last_send_ms_ > run_.profile.settle_s * 1000.0) {
      stats.missing += (plan_.expected.size() - next_transcript_);
      for (std::size_t i = 0; i < plan_.expected.size(); ++i)
        if (!sign_seen_[i]) {
          ++stats.missing;
          if (requested_[i]) --run_.in_flight;
        }
      finish();
    }
  }

  ClientStats stats;

 private:
  struct Out {
    std::string head;
    bool blob = false;
    std::string tail;
  };

  void fail_connect(const std::string& why) {
    if (done_) return;
    if (!stats.connected) {
      stats.failed = true;
      spdlog::debug("client {} failed: {}", id_, why);
      ++run_.resolved;
    }
    finish();
  }

  void finish() {
    if (done_) return;
    done_ = true;
    timer_.cancel();
    ++run_.finished;
    run_.last_done_ms = now_ms();
    if (ws_.is_open() && !writing_) {
      ws_.async_close(websocket::close_code::normal, [self = shared_from_this()](beast::error_code) {});
    } else {
      beast::error_code ec;
      beast::get_lowest_layer(ws_).socket().close(ec);
    }
    if (run_.finished == run_.profile.clients) run_.ioc.stop();
  }

  void send_join() {
    json prefs = {{"partials", false}, {"sign_format", "reference"}, {"emoji_enabled", true},
                  {"signing", true}, {"language", index_ % 2 ? "fr" : "en"}};
    json env = {{"type", "join"},
                {"session_id", room_},
                {"sender_id", id_},
                {"event_id", id_ + "-join"},
                {"ts_ms", static_cast<std::int64_t>(now_ms())},
                {"payload", {{"display_name", id_}, {"role", "speaker"}, {"prefs", prefs}}}};
    push({env.dump(), false, {}});
  }

  void on_joined() {
    joined_ = true;
    stats.connected = true;
    ++run_.resolved;
    ++run_.connected;
    joined_ms_ = now_ms();
    if (plan_.chunk_text.empty()) return finish();
    if (run_.profile.pacing == Pacing::Realtime) schedule_next();
    else send_chunk();
  }

  void schedule_next() {
    if (done_ || next_chunk_ >= plan_.chunk_text.size()) return;
    const double at = joined_ms_ + static_cast<double>(next_chunk_) * run_.profile.chunk.stride_seconds() * 1000.0;
    timer_.expires_at(std::chrono::steady_clock::time_point(
        std::chrono::duration_cast<std::chrono::steady_clock::duration>(std::chrono::duration<double, std::milli>(at))));
    timer_.async_wait([self = shared_from_this()](beast::error_code ec) {
      if (ec || self->done_) return;
      self->send_chunk();
      self->schedule_next();
    });
  }

  Out chunk_message(std::uint64_t seq, const std::string& tag) {
    json payload = {{"seq", seq}, {"sample_rate", run_.profile.chunk.sample_rate}};
    if (!plan_.chunk_text[seq].empty()) payload["oracle_text"] = plan_.chunk_text[seq];
    json env = {{"type", "audio_chunk"},
                {"session_id", room_},
                {"sender_id", id_},
                {"event_id", id_ + "-" + tag + std::to_string(seq)},
                {"ts_ms", static_cast<std::int64_t>(now_ms())}};
    // Payload goes last so the shared audio blob can be spliced in as a
    // separate buffer instead of being copied into every frame.
    std::string head = env.dump();
    const std::string body = payload.dump();
    head.pop_back();
    head += ",\"payload\":" + body.substr(0, body.size() - 1) + ",\"audio_b64\":\"";
    return {std::move(head), true, "\"}}"};
  }

  void send_chunk() {
    if (done_ || next_chunk_ >= plan_.chunk_text.size()) return;
    const std::uint64_t seq = next_chunk_++;
    push(chunk_message(seq, ""));
    if (want_reorder_ && seq == 3) push(chunk_message(2, "dup"));
  }

  void push(Out o) {
    outbox_.push_back(std::move(o));
    if (!writing_) write();
  }

  void write() {
    if (outbox_.empty() || done_) return;
    writing_ = true;
    const Out& o = outbox_.front();
    if (o.blob) {
      // seq is the first field after "seq": in the payload; recover it for timing.
      const auto p = o.head.find("\"seq\":");
      writing_seq_ = p == std::string::npos ? std::nullopt
                                            : std::optional<std::uint64_t>(std::stoull(o.head.substr(p + 6)));
      const bool dup = o.head.find("-dup") != std::string::npos;
      if (dup) writing_seq_.reset();
      if (writing_seq_) send_ms_[*writing_seq_] = now_ms();
      std::array<net::const_buffer, 3> bufs{net::buffer(o.head), net::buffer(run_.blob), net::buffer(o.tail)};
      ws_.async_write(bufs, beast::bind_front_handler(&Client::on_write, shared_from_this()));
    } else {
      writing_seq_.reset();
      ws_.async_write(net::buffer(o.head), beast::bind_front_handler(&Client::on_write, shared_from_this()));
    }
  }

  void on_write(beast::error_code ec, std::size_t) {
    writing_ = false;
    if (ec) {
      if (!joined_) return fail_connect("write: " + ec.message());
      ++stats.errors;
      ++stats.by_code["SEND_FAILED"];
      return finish();
    }
    const bool was_chunk = outbox_.front().blob;
    outbox_.pop_front();
    if (was_chunk) {
      ++stats.sent;
      last_send_ms_ = now_ms();
      if (writing_seq_) {
        if (auto it = by_finalize_seq_.find(*writing_seq_); it != by_finalize_seq_.end()) {
          requested_[it->second] = true;
          run_.peak_in_flight = std::max(run_.peak_in_flight, ++run_.in_flight);
        }
      }
    }
    if (!outbox_.empty()) return write();
    if (run_.profile.pacing == Pacing::MaxRate && joined_) send_chunk();
    maybe_complete();
  }

  void read() {
    ws_.async_read(buf_, beast::bind_front_handler(&Client::on_read, shared_from_this()));
  }

  void on_read(beast::error_code ec, std::size_t) {
    if (ec) {
      if (!done_) {
        if (!joined_) return fail_connect("read: " + ec.message());
        spdlog::warn("{} disconnected: {}", id_, ec.message());
        ++stats.errors;
        ++stats.by_code["DISCONNECTED"];
        finish();
      }
      return;
    }
    const auto msg = beast::buffers_to_string(buf_.data());
    buf_.consume(buf_.size());
    handle(msg);
    if (!done_) read();
  }

  void handle(const std::string& msg) {
    json env = json::parse(msg, nullptr, false);
    if (env.is_discarded() || !env.is_object()) {
      ++stats.errors;
      ++stats.by_code["BAD_FRAME"];
      return;
    }
    const std::string type = env.value("type", "");
    const json& p = env["payload"];
    if (!joined_) {
      if (type == "joined") return on_joined();
      if (type == "error") return fail_connect("join refused: " + p.value("code", std::string()));
      return;
    }
    ++stats.received;
    if (type == "error") {
      const std::string code = p.value("code", "");
      if (code == "REORDER_ERROR" && want_reorder_ && !reorder_seen_) {
        reorder_seen_ = true;
        ++stats.reorder;
      } else {
        ++stats.errors;
        ++stats.by_code[code];
      }
    } else if (type == "transcript") {
      if (p.value("speaker_id", "") == id_ && p.value("final", false)) {
        if (next_transcript_ >= plan_.expected.size() || p.value("text", "") != plan_.expected[next_transcript_].text) {
          ++stats.mismatches;
          spdlog::debug("{} mismatch: got '{}'", id_, p.value("text", ""));
        }
        ++next_transcript_;
      }
    } else if (type == "sign_sequence") {
      if (p.value("speaker_id", "") == id_) {
        const auto seq = p.value("source_chunk_seq", std::uint64_t{0});
        auto it = by_last_seq_.find(seq);
        if (it != by_last_seq_.end() && !sign_seen_[it->second]) {
          sign_seen_[it->second] = true;
          if (requested_[it->second] && run_.in_flight > 0) --run_.in_flight;
          stats.samples.push_back({index_, seq, now_ms() - send_ms_[seq]});
        }
      }
    }
    maybe_complete();
  }

  void maybe_complete() {
    if (done_ || !joined_ || writing_ || next_chunk_ < plan_.chunk_text.size()) return;
    if (next_transcript_ < plan_.expected.size()) return;
    if (std::find(sign_seen_.begin(), sign_seen_.end(), false) != sign_seen_.end()) return;
    if (want_reorder_ && !reorder_seen_) return;
    finish();
  }

  RunState& run_;
  std::size_t index_;
  std::string id_;
  std::string room_;
  websocket::stream<beast::tcp_stream> ws_;
  beast::flat_buffer buf_;
  net::steady_timer timer_;
  ClientPlan plan_;
  std::vector<double> send_ms_;
  std::vector<bool> sign_seen_;
  std::map<std::uint64_t, bool> requested_;
  std::map<std::uint64_t, std::size_t> by_last_seq_;
  std::map<std::uint64_t, std::size_t> by_finalize_seq_;
  std::deque<Out> outbox_;
  std::optional<std::uint64_t> writing_seq_;
  bool writing_ = false;
  bool joined_ = false;
  bool done_ = false;
  bool want_reorder_ = false;
  bool reorder_seen_ = false;
  std::size_t next_chunk_ = 0;
  std::size_t next_transcript_ = 0;
  double started_ms_ = 0, joined_ms_ = 0, last_send_ms_ = 0;
};

LoadReport run_level(const LoadProfile& profile, const std::string& host, unsigned short port) {
  profile.validate();
  net::io_context ioc(1);
  tcp::resolver resolver(ioc);
  const auto results = resolver.resolve(host, std::to_string(port));
  RunState run{profile, ioc, *results.begin(), host, {}};
  run.blob = text::base64_encode(std::vector<std::uint8_t>(profile.chunk.chunk_samples() * 2, 0));

  std::vector<std::shared_ptr<Client>> clients;
  clients.reserve(profile.clients);
  for (std::size_t i = 0; i < profile.clients; ++i)
    clients.push_back(std::make_shared<Client>(run, i, plan_client(profile, i)));

  const double t0 = now_ms();
  std::vector<std::unique_ptr<net::steady_timer>> starters;
  for (std::size_t i = 0; i < clients.size(); ++i) {
    const double delay = profile.clients > 1 ? profile.ramp_s * 1000.0 * static_cast<double>(i) /
                                                   static_cast<double>(profile.clients)
                                             : 0.0;
    auto t = std::make_unique<net::steady_timer>(ioc, std::chrono::microseconds(static_cast<std::int64_t>(delay * 1000)));
    t->async_wait([c = clients[i]](beast::error_code ec) {
      if (!ec) c->start();
    });
    starters.push_back(std::move(t));
  }

  net::steady_timer watchdog(ioc);
  std::function<void()> arm = [&] {
    watchdog.expires_after(std::chrono::milliseconds(200));
    watchdog.async_wait([&](beast::error_code ec) {
      if (ec) return;
      if (run.resolved == profile.clients && run.connected * 2 < profile.clients) {
        run.aborted = true;
        ioc.stop();
        return;
      }
      const double now = now_ms();
      for (auto& c : clients) c->check_settle(now);
      if (run.finished < profile.clients) arm();
    });
  };
  arm();
  ioc.run();
  const double t1 = run.last_done_ms > t0 ? run.last_done_ms : now_ms();

  LoadReport r;
  r.clients = profile.clients;
  r.pacing = profile.pacing;
  r.duration_s = (t1 - t0) / 1000.0;
  std::vector<double> lat;
  for (std::size_t i = 0; i < clients.size(); ++i) {
    const auto& s = clients[i]->stats;
    r.connected += s.connected;
    r.connect_failed += s.failed || !s.connected;
    r.sent += s.sent;
    r.received += s.received;
    r.errors += s.errors + s.missing;
    r.mismatches += s.mismatches;
    r.missing += s.missing;
    r.reorder_observed += s.reorder;
    for (const auto& [k, v] : s.by_code) r.errors_by_code[k] += v;
    if (s.missing) r.errors_by_code["MISSING_RESPONSE"] += s.missing;
    for (const auto& x : s.samples) {
      r.samples.push_back(x);
      lat.push_back(x.latency_ms);
    }
  }
  for (std::size_t i = 0; i < clients.size(); ++i) r.expected_utterances += plan_client(profile, i).expected.size();
  r.peak_in_flight = run.peak_in_flight;
  if (r.duration_s > 0) {
    r.throughput_rps = static_cast<double>(r.received) / r.duration_s;
    r.request_rps = static_cast<double>(r.sent) / r.duration_s;
  }
  if (!lat.empty()) r.latency = summarize_latency(lat);
  if (run.aborted || r.connected * 2 < profile.clients)
    throw Error(Errc::ConnectFailed, std::to_string(r.connected) + " of " + std::to_string(profile.clients) +
                                         " clients joined");
  return r;
}

}  // namespace

LoadReport run_load(const LoadProfile& profile, const std::string& host, unsigned short port) {
  auto r = run_level(profile, host, port);
  const auto m = fetch_metrics(host, port);
  if (m.is_object()) r.stages = m.value("stages", json());
  return r;
}

json fetch_metrics(const std::string& host, unsigned short port) {
  try {
    net::io_context ioc;
    tcp::resolver resolver(ioc);
    beast::tcp_stream stream(ioc);
    stream.expires_after(std::chrono::seconds(5));
    stream.connect(resolver.resolve(host, std::to_string(port)));
    http::request<http::empty_body> req{http::verb::get, "/metrics", 11};
    req.set(http::field::host, host);
    http::write(stream, req);
    beast::flat_buffer buf;
    http::response<http::string_body> res;
    http::read(stream, buf, res);
    beast::error_code ec;
    stream.socket().shutdown(tcp::socket::shutdown_both, ec);
    if (res.result() != http::status::ok) return nullptr;
    json j = json::parse(res.body(), nullptr, false);
    return j.is_discarded() ? json(nullptr) : j;
  } catch (const std::exception& e) {
    spdlog::warn("metrics fetch failed: {}", e.what());
    return nullptr;
  }
}

SweepResult run_sweep(const LoadProfile& base, const std::vector<std::size_t>& levels, const std::string& host,
                      unsigned short port, double min_rps) {
  SweepResult out;
  const auto nonce = std::to_string(static_cast<long long>(now_ms()));
  bool correct = true;
  for (auto n : levels) {
    LoadProfile p = base;
    p.clients = n;
    p.room_prefix = base.room_prefix + "-" + nonce + "-" + std::to_string(n);
    LoadReport r;
    try {
      r = run_load(p, host, port);
    } catch (const Error& e) {
      if (e.code() != Errc::ConnectFailed) throw;
      spdlog::warn("level {}: {}", n, e.what());
      r.clients = n;
      r.pacing = p.pacing;
      r.connect_failed = n;
    }
    spdlog::info("level {}: sent={} received={} errors={} mismatches={} missing={} rps={:.0f} req/s={:.0f} in {:.1f}s",
                 n, r.sent, r.received, r.errors, r.mismatches, r.missing, r.throughput_rps, r.request_rps,
                 r.duration_s);
    const bool sustained = r.sustained() && r.missing == 0;
    out.levels.push_back(std::move(r));
    if (!sustained) break;
    out.max_sustained = n;
    if (out.levels.back().errors != 0 || out.levels.back().mismatches != 0) correct = false;
  }
  if (!out.max_sustained) {
    out.reason = "no level sustained";
    return out;
  }
  const LoadReport* top = nullptr;
  for (const auto& r : out.levels)
    if (r.clients == *out.max_sustained) top = &r;
  const bool full = *out.max_sustained == levels.back();
  std::ostringstream why;
  why << "max sustained " << *out.max_sustained << " clients; top-level throughput " << std::fixed
      << std::setprecision(0) << top->throughput_rps << " env/s";
  if (!correct) {
    why << "; errors or mismatches at a sustained level";
  } else if (full && top->throughput_rps < min_rps) {
    why << " below " << min_rps;
  } else if (!full) {
    why << "; host-limited below " << levels.back();
  }
  out.reason = why.str();
  out.pass = correct && (!full || top->throughput_rps >= min_rps);
  return out;
}

// ---------------------------------------------------------------------------

std::string render_text(const LoadReport& r) {
  std::ostringstream o;
  o << std::fixed << std::setprecision(1);
  o << "clients " << r.clients << " (" << r.connected << " joined, " << r.connect_failed << " failed), pacing "
    << to_string(r.pacing) << ", " << r.duration_s << " s\n";
  o << "sent " << r.sent << "  received " << r.received << "  errors " << r.errors << "  mismatches "
    << r.mismatches << "  missing " << r.missing << "\n";
  if (!r.errors_by_code.empty()) {
    o << "errors by code:";
    for (const auto& [code, n] : r.errors_by_code) o << " " << code << "=" << n;
    o << "\n";
  }
  o << "throughput " << r.throughput_rps << " env/s received, " << r.request_rps << " req/s sent; peak in-flight "
    << r.peak_in_flight << "\n";
  if (r.latency)
    o << "end-to-end ms  p50 " << r.latency->p50 << "  p95 " << r.latency->p95 << "  p99 " << r.latency->p99
      << "  max " << r.latency->max << "  (n=" << r.latency->count << ")\n";
  else
    o << "end-to-end ms  no samples\n";
  if (r.stages.is_object())
    for (const auto& [name, row] : r.stages.items())
      if (row.is_object() && row.value("count", 0) > 0)
        o << "  " << std::left << std::setw(14) << name << " n=" << row.value("count", 0) << "  mean "
          << row.value("mean_ms", 0.0) << "  p95 " << row.value("p95_ms", 0.0) << "  p99 "
          << row.value("p99_ms", 0.0) << "\n";
  for (const auto& v : r.verdicts) {
    o << (v.measured ? (v.pass ? "  PASS " : "  FAIL ") : "  SKIP ") << v.name << ": " << v.metric << " ";
    if (v.measured) o << *v.measured;
    else o << "n/a";
    o << " " << v.op << " " << v.threshold << "\n";
  }
  return o.str();
}

std::string render_table(const std::vector<LoadReport>& levels) {
  std::ostringstream o;
  o << std::fixed << std::setprecision(1);
  o << std::right << std::setw(8) << "clients" << std::setw(10) << "sent" << std::setw(10) << "recv" << std::setw(8)
    << "errors" << std::setw(9) << "mismatch" << std::setw(10) << "env/s" << std::setw(10) << "req/s" << std::setw(10)
    << "p95 ms" << std::setw(10) << "secs\n";
  for (const auto& r : levels)
    o << std::setw(8) << r.clients << std::setw(10) << r.sent << std::setw(10) << r.received << std::setw(8)
      << r.errors << std::setw(9) << r.mismatches << std::setw(10) << r.throughput_rps << std::setw(10)
      << r.request_rps << std::setw(10) << (r.latency ? r.latency->p95 : 0.0) << std::setw(9) << r.duration_s
      << "\n";
  return o.str();
}

std::string render_csv(const std::vector<LoadReport>& levels) {
  std::ostringstream o;
  o << std::setprecision(10);
  o << "clients,pacing,connected,connect_failed,duration_s,sent,received,errors,mismatches,missing,throughput_rps,"
       "request_rps,p50_ms,p95_ms,p99_ms,max_ms,peak_in_flight,kpi_pass\n";
  for (const auto& r : levels) {
    o << r.clients << ',' << to_string(r.pacing) << ',' << r.connected << ',' << r.connect_failed << ','
      << r.duration_s << ',' << r.sent << ',' << r.received << ',' << r.errors << ',' << r.mismatches << ','
      << r.missing << ',' << r.throughput_rps << ',' << r.request_rps << ',';
    if (r.latency) o << r.latency->p50 << ',' << r.latency->p95 << ',' << r.latency->p99 << ',' << r.latency->max;
    else o << ",,,";
    o << ',' << r.peak_in_flight << ',' << (r.kpi_pass() ? "true" : "false") << '\n';
  }
  return o.str();
}

std::string render_samples_csv(const std::vector<LoadReport>& levels) {
  std::ostringstream o;
  o << std::setprecision(10) << "level,client,seq,latency_ms\n";
  for (const auto& r : levels)
    for (const auto& s : r.samples) o << r.clients << ',' << s.client << ',' << s.seq << ',' << s.latency_ms << '\n';
  return o.str();
}

}  // namespace axs::load
