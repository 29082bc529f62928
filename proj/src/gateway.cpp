#include "axs/gateway.hpp"

#include <atomic>
#include <condition_variable>
#include <deque>
#include <map>
#include <mutex>
#include <thread>
#include <unordered_map>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>
#include <spdlog/spdlog.h>

#include "axs/ids.hpp"
#include "axs/protocol.hpp"

namespace axs {

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;
using json = nlohmann::json;

namespace {

using Frame = std::shared_ptr<const std::string>;

Frame frame_of(const wire::Envelope& e) { return std::make_shared<const std::string>(e.dump()); }

double steady_ms() {
  using namespace std::chrono;
  return duration<double, std::milli>(steady_clock::now().time_since_epoch()).count();
}

/// Close codes in the application range: 4000 + the error's ordinal.
websocket::close_reason close_reason_for(Errc code) {
  return websocket::close_reason(static_cast<websocket::close_code>(4000 + static_cast<int>(code)),
                                 std::string(to_string(code)));
}

}  // namespace

class WsConnection;
class Room;

struct Counters {
  std::atomic<std::uint64_t> connections_open{0};
  std::atomic<std::uint64_t> connections_total{0};
  std::atomic<std::uint64_t> envelopes_in{0};
  std::atomic<std::uint64_t> envelopes_out{0};
  std::atomic<std::uint64_t> disconnects_slow_consumer{0};
  std::atomic<std::uint64_t> join_timeouts{0};
  std::atomic<std::uint64_t> rooms_created{0};
  std::atomic<std::uint64_t> emotion_dropped{0};
  std::atomic<std::uint64_t> max_ingress_depth{0};
  std::mutex mu;
  std::map<std::string, std::uint64_t> errors_by_code;

  void error(Errc code) {
    std::lock_guard lock(mu);
    ++errors_by_code[std::string(to_string(code))];
  }
  void observe_depth(std::uint64_t d) {
    auto cur = max_ingress_depth.load();
    while (d > cur && !max_ingress_depth.compare_exchange_weak(cur, d)) {
    }
  }
};

struct Gateway::Impl : std::enable_shared_from_this<Gateway::Impl> {
  GatewayConfig cfg;
  std::shared_ptr<const PipelineAssets> assets;
  std::shared_ptr<LatencyLedger> ledger = std::make_shared<LatencyLedger>();
  net::io_context ioc;
  std::optional<net::executor_work_guard<net::io_context::executor_type>> work;
  tcp::acceptor acceptor{ioc};
  std::vector<std::thread> threads;
  net::thread_pool background{1};
  SessionRegistry registry;
  Counters counters;

  std::mutex rooms_mu;
  std::unordered_map<std::string, std::shared_ptr<Room>> rooms;

  std::mutex conns_mu;
  /// Owns every live connection, including ones paused with no I/O pending.
  std::unordered_map<WsConnection*, std::shared_ptr<WsConnection>> conns;

  std::mutex stop_mu;
  std::condition_variable stop_cv;
  bool running = false;

  Impl(GatewayConfig c, std::shared_ptr<const PipelineAssets> a) : cfg(std::move(c)), assets(std::move(a)) {}

  void do_accept();
  void on_http(tcp::socket socket);

  struct JoinResult {
    std::shared_ptr<Room> room;
    Participant participant;
    MembershipToken token;
  };
  JoinResult join(const std::shared_ptr<WsConnection>& conn, const wire::Envelope& env);
  void leave(const std::string& session_id, const std::string& participant_id);

  json metrics() const;
};

// ---------------------------------------------------------------------------

class Room : public std::enable_shared_from_this<Room> {
 public:
  Room(std::shared_ptr<Gateway::Impl> gw, std::shared_ptr<Session> session)
      : session(std::move(session)),
        gw_(std::move(gw)),
        strand_(net::make_strand(gw_->ioc)),
        pipeline_(this->session, gw_->assets, gw_->ledger),
        tick_(strand_) {}

  void start() { arm_tick(); }

  void stop() {
    net::post(strand_, [self = shared_from_this()] {
      self->stopped_ = true;
      self->tick_.cancel();
    });
  }

  void add_member(const std::string& pid, std::weak_ptr<WsConnection> conn) {
    std::lock_guard lock(members_mu_);
    members_[pid] = std::move(conn);
  }

  void remove_member(const std::string& pid);

  void submit_chunk(std::shared_ptr<WsConnection> conn, AudioChunk chunk, std::string event_id);
  void submit_text(std::shared_ptr<WsConnection> conn, std::string text, std::string event_id);
  void request_summary(std::shared_ptr<WsConnection> conn, std::string event_id);

  /// Renders and sends outputs to every member in each output's audience.
  void deliver(const std::vector<Outbound>& outputs);
  void send_all(const Frame& f);
  std::shared_ptr<WsConnection> member(const std::string& pid);

  std::size_t depth(Stage s) const { return depth_[static_cast<std::size_t>(s)].load(); }

  std::shared_ptr<Session> session;

 private:
  void admitted(const std::shared_ptr<WsConnection>& conn, Admission a, const std::string& event_id);
  void schedule_drain();
  void drain();
  void publish_depths();
  void arm_tick();

  std::shared_ptr<Gateway::Impl> gw_;
  net::strand<net::io_context::executor_type> strand_;
  RoomPipeline pipeline_;
  net::steady_timer tick_;
  bool draining_ = false;
  bool stopped_ = false;
  std::unordered_map<std::string, SlowConsumerGuard> guards_;
  std::array<std::atomic<std::size_t>, 5> depth_{};

  mutable std::mutex members_mu_;
  std::unordered_map<std::string, std::weak_ptr<WsConnection>> members_;
};

// ---------------------------------------------------------------------------

class WsConnection : public std::enable_shared_from_this<WsConnection> {
 public:
  WsConnection(tcp::socket&& socket, std::shared_ptr<Gateway::Impl> gw)
      : ws_(std::move(socket)), join_timer_(ws_.get_executor()), gw_(std::move(gw)) {}

  void run(http::request<http::string_body> req) {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.read_message_max(gw_->cfg.max_message_bytes);
    ws_.text(true);
    ws_.async_accept(req, beast::bind_front_handler(&WsConnection::on_accept, shared_from_this()));
  }

  /// Thread-safe.
  void send(Frame f) {
    net::post(ws_.get_executor(), [self = shared_from_this(), f = std::move(f)]() mutable { self->enqueue(std::move(f)); });
  }

  void send_error(Errc code, std::string_view message, std::string_view ref_event_id) {
    gw_->counters.error(code);
    send(frame_of(wire::make_error(code, message, session_id_, ref_event_id)));
  }

  void return_credit() {
    net::post(ws_.get_executor(), [self = shared_from_this()] {
      if (self->inflight_ > 0) --self->inflight_;
      if (self->paused_ && self->inflight_ < self->gw_->cfg.ingress_credit) {
        self->paused_ = false;
        self->maybe_read();
      }
    });
  }

  /// Sends an error envelope, then a close frame carrying the same code.
  void close_with(Errc code, std::string message) {
    net::post(ws_.get_executor(), [self = shared_from_this(), code, message = std::move(message)] {
      self->begin_close(code, message);
    });
  }

  void shutdown() {
    net::post(ws_.get_executor(), [self = shared_from_this()] {
      beast::error_code ec;
      beast::get_lowest_layer(self->ws_).socket().close(ec);
    });
  }

  const std::string& participant_id() const { return participant_id_; }
  const ParticipantPrefs& prefs() const { return prefs_; }

 private:
  void on_accept(beast::error_code ec) {
    if (ec) return on_disconnect();
    gw_->counters.connections_open++;
    gw_->counters.connections_total++;
    counted_ = true;
    join_timer_.expires_after(std::chrono::milliseconds(gw_->cfg.join_timeout_ms));
    join_timer_.async_wait([self = shared_from_this()](beast::error_code e) {
      if (e || self->joined_) return;
      self->gw_->counters.join_timeouts++;
      self->begin_close(Errc::JoinTimeout, "no join within " + std::to_string(self->gw_->cfg.join_timeout_ms) + " ms");
    });
    maybe_read();
  }

  void maybe_read() {
    if (reading_ || paused_ || closing_ || gone_) return;
    reading_ = true;
    ws_.async_read(buf_, beast::bind_front_handler(&WsConnection::on_read, shared_from_this()));
  }

  void on_read(beast::error_code ec, std::size_t) {
    reading_ = false;
    if (ec) return on_disconnect();
    gw_->counters.envelopes_in++;
    std::string text = beast::buffers_to_string(buf_.data());
    buf_.consume(buf_.size());
    handle(text);
    maybe_read();
  }

  void enqueue(Frame f) {
    if (gone_ || close_sent_) return;
    outbox_.push_back(std::move(f));
    if (outbox_.size() > gw_->cfg.max_outbox && !closing_) {
      gw_->counters.disconnects_slow_consumer++;
      outbox_.clear();
      begin_close(Errc::SlowConsumer, "outgoing queue exceeded " + std::to_string(gw_->cfg.max_outbox));
      return;
    }
    if (!writing_) do_write();
  }

  void do_write() {
    if (outbox_.empty()) {
      if (pending_close_) do_close();
      return;
    }
    writing_ = true;
    ws_.async_write(net::buffer(*outbox_.front()), beast::bind_front_handler(&WsConnection::on_write, shared_from_this()));
  }

  void on_write(beast::error_code ec, std::size_t) {
    writing_ = false;
    if (ec) return on_disconnect();
    outbox_.pop_front();
    gw_->counters.envelopes_out++;
    do_write();
  }

  void begin_close(Errc code, const std::string& message) {
    if (closing_ || gone_) return;
    closing_ = true;
    gw_->counters.error(code);
    outbox_.push_back(frame_of(wire::make_error(code, message, session_id_, {})));
    pending_close_ = close_reason_for(code);
    if (!writing_) do_write();
  }

  void do_close() {
    if (close_sent_ || gone_) return;
    close_sent_ = true;
    ws_.async_close(*pending_close_, [self = shared_from_this()](beast::error_code) { self->on_disconnect(); });
  }

  void on_disconnect() {
    if (gone_) return;
    gone_ = true;
    join_timer_.cancel();
    if (counted_) gw_->counters.connections_open--;
    if (joined_) gw_->leave(session_id_, participant_id_);
    room_.reset();
    {
      std::lock_guard lock(gw_->conns_mu);
      gw_->conns.erase(this);
    }
    beast::error_code ec;
    beast::get_lowest_layer(ws_).socket().close(ec);
  }

  void handle(const std::string& text) {
    wire::Envelope env;
    try {
      env = wire::parse_envelope(text);
    } catch (const Error& e) {
      const json raw = json::parse(text, nullptr, false);
      std::string ref;
      if (raw.is_object() && raw.contains("event_id") && raw["event_id"].is_string()) ref = raw["event_id"];
      send_error(e.code(), e.what(), ref);
      return;
    }
    try {
      dispatch(env);
    } catch (const Error& e) {
      send_error(e.code(), e.what(), env.event_id);
    } catch (const std::exception& e) {
      send_error(Errc::MalformedPayload, e.what(), env.event_id);
    }
  }

  void dispatch(wire::Envelope& env) {
    if (env.type == "join") {
      if (joined_) throw Error(Errc::MalformedPayload, "already joined");
      auto r = gw_->join(shared_from_this(), env);
      joined_ = true;
      join_timer_.cancel();
      room_ = r.room;
      session_id_ = r.token.session_id;
      participant_id_ = r.participant.participant_id;
      prefs_ = r.participant.prefs;
      json members = json::array();
      for (const auto& p : room_->session->participants()) members.push_back(p.to_json());
      json payload = {{"participant_id", participant_id_},
                      {"session_id", session_id_},
                      {"token", r.token.token},
                      {"participants", std::move(members)},
                      {"settings", room_->session->settings().to_json()},
                      {"dictionary_version", gw_->assets->dictionary->version()},
                      {"chunk_len_ms", gw_->cfg.chunk_len_ms},
                      {"overlap_ms", gw_->cfg.overlap_ms},
                      {"sample_rate", gw_->cfg.sample_rate}};
      enqueue(frame_of(wire::make_envelope("joined", session_id_, std::move(payload))));
      room_->send_all(frame_of(wire::make_envelope(
          "presence", session_id_, {{"event", "joined"}, {"participant", r.participant.to_json()}})));
      return;
    }
    if (!joined_) throw Error(Errc::NotJoined, "send join first");

    if (env.type == "audio_chunk") {
      auto chunk = wire::decode_audio_chunk(env.payload, gw_->assets->chunk, session_id_, participant_id_);
      if (last_seq_ && chunk.seq <= *last_seq_)
        throw Error(Errc::ReorderError, "seq " + std::to_string(chunk.seq) + " after " + std::to_string(*last_seq_));
      last_seq_ = chunk.seq;
      take_credit();
      room_->submit_chunk(shared_from_this(), std::move(chunk), env.event_id);
    } else if (env.type == "text_message") {
      auto it = env.payload.find("text");
      if (it == env.payload.end() || !it->is_string()) throw Error(Errc::MalformedPayload, "text_message needs 'text'");
      take_credit();
      room_->submit_text(shared_from_this(), it->get<std::string>(), env.event_id);
    } else if (env.type == "request_summary") {
      room_->request_summary(shared_from_this(), env.event_id);
    } else if (env.type == "replay_request") {
      auto it = env.payload.find("sequence_id");
      if (it == env.payload.end() || !it->is_string()) throw Error(Errc::MalformedPayload, "replay_request needs 'sequence_id'");
      double speed = prefs_.signing_speed;
      if (auto s = env.payload.find("speed"); s != env.payload.end() && !s->is_null()) {
        if (!s->is_number()) throw Error(Errc::MalformedPayload, "speed must be a number");
        speed = s->get<double>();
        check_signing_speed(speed);
      }
      auto seq = room_->session->replay_buffer().replay(it->get<std::string>());
      enqueue(frame_of(wire::make_envelope(
          "sign_sequence", session_id_, wire::sign_sequence_payload(seq, prefs_.sign_format, 0, true, speed))));
    } else if (env.type == "set_prefs") {
      const json& patch = env.payload.contains("prefs") ? env.payload["prefs"] : env.payload;
      prefs_ = room_->session->update_prefs(participant_id_, patch);
      auto p = room_->session->participant(participant_id_);
      enqueue(frame_of(wire::make_envelope("presence", session_id_,
                                           {{"event", "prefs_updated"}, {"participant", p ? p->to_json() : json()}})));
    } else {
      throw Error(Errc::UnknownType, "'" + env.type + "' is sent by the server only");
    }
  }

  void take_credit() {
    if (++inflight_ >= gw_->cfg.ingress_credit) paused_ = true;
  }

  websocket::stream<beast::tcp_stream> ws_;
  beast::flat_buffer buf_;
  net::steady_timer join_timer_;
  std::shared_ptr<Gateway::Impl> gw_;
  std::deque<Frame> outbox_;
  std::optional<websocket::close_reason> pending_close_;
  bool writing_ = false;
  bool reading_ = false;
  bool paused_ = false;
  bool closing_ = false;
  bool close_sent_ = false;
  bool gone_ = false;
  bool joined_ = false;
  bool counted_ = false;
  std::size_t inflight_ = 0;
  std::optional<std::uint64_t> last_seq_;
  std::string session_id_;
  std::string participant_id_;
  ParticipantPrefs prefs_;
  std::shared_ptr<Room> room_;
};

// ---------------------------------------------------------------------------

void Room::remove_member(const std::string& pid) {
  {
    std::lock_guard lock(members_mu_);
    members_.erase(pid);
  }
  net::post(strand_, [self = shared_from_this(), pid] {
    self->guards_.erase(pid);
    if (!self->session->live()) return;
    try {
      self->deliver(self->pipeline_.flush_speaker(pid));
    } catch (const std::exception& e) {
      spdlog::warn("flushing {} failed: {}", pid, e.what());
    }
  });
}

std::shared_ptr<WsConnection> Room::member(const std::string& pid) {
  std::lock_guard lock(members_mu_);
  auto it = members_.find(pid);
  return it == members_.end() ? nullptr : it->second.lock();
}

void Room::send_all(const Frame& f) {
  std::vector<std::shared_ptr<WsConnection>> targets;
  {
    std::lock_guard lock(members_mu_);
    for (const auto& [pid, w] : members_)
      if (auto c = w.lock()) targets.push_back(std::move(c));
  }
  for (auto& c : targets) c->send(f);
}

void Room::submit_chunk(std::shared_ptr<WsConnection> conn, AudioChunk chunk, std::string event_id) {
  net::post(strand_, [self = shared_from_this(), conn = std::move(conn), chunk = std::move(chunk),
                      event_id = std::move(event_id)]() mutable {
    const auto a = self->pipeline_.submit_chunk(std::move(chunk), event_id);
    self->admitted(conn, a, event_id);
  });
}

void Room::submit_text(std::shared_ptr<WsConnection> conn, std::string text, std::string event_id) {
  net::post(strand_, [self = shared_from_this(), conn = std::move(conn), text = std::move(text),
                      event_id = std::move(event_id)]() mutable {
    const auto a = self->pipeline_.submit_text(conn->participant_id(), std::move(text), event_id);
    self->admitted(conn, a, event_id);
  });
}

void Room::admitted(const std::shared_ptr<WsConnection>& conn, Admission a, const std::string& event_id) {
  const bool kick = guards_.try_emplace(conn->participant_id(), gw_->cfg.backpressure.slow_consumer_grace)
                        .first->second.observe(a);
  gw_->counters.observe_depth(pipeline_.ingress_depth());
  if (a == Admission::Rejected) {
    conn->send_error(Errc::QueueFull, "transcription queue full", event_id);
    conn->return_credit();
    if (kick) {
      gw_->counters.disconnects_slow_consumer++;
      conn->close_with(Errc::SlowConsumer, "too many consecutive QUEUE_FULL rejections");
    }
  }
  publish_depths();
  schedule_drain();
}

void Room::schedule_drain() {
  if (draining_) return;
  draining_ = true;
  net::post(strand_, [self = shared_from_this()] { self->drain(); });
}

void Room::drain() {
  // Bounded batch, then yield so other rooms' work interleaves.
  for (int i = 0; i < 16; ++i) {
    auto r = pipeline_.step();
    if (!r) break;
    deliver(r->outputs);
    auto origin = member(r->origin);
    if (origin) {
      for (const auto& e : r->errors) origin->send_error(e.code, e.message, e.ref_event_id);
      origin->return_credit();
    }
  }
  gw_->counters.emotion_dropped.store(pipeline_.emotion_dropped());
  publish_depths();
  if (pipeline_.ingress_depth() > 0) {
    net::post(strand_, [self = shared_from_this()] { self->drain(); });
  } else {
    draining_ = false;
  }
}

void Room::publish_depths() {
  for (auto s : kAllStages) depth_[static_cast<std::size_t>(s)].store(pipeline_.depth(s));
}

void Room::deliver(const std::vector<Outbound>& outputs) {
  if (outputs.empty()) return;
  const auto participants = session->participants();
  const auto& settings = session->settings();
  std::unordered_map<std::string, std::shared_ptr<WsConnection>> conns;
  {
    std::lock_guard lock(members_mu_);
    for (const auto& [pid, w] : members_)
      if (auto c = w.lock()) conns.emplace(pid, std::move(c));
  }
  for (const auto& out : outputs) {
    if (out.sequence) {
      std::map<std::pair<double, int>, Frame> rendered;
      for (const auto& p : participants) {
        if (!audience_includes(out, p, settings)) continue;
        auto c = conns.find(p.participant_id);
        if (c == conns.end()) continue;
        const auto key = std::make_pair(p.prefs.signing_speed, static_cast<int>(p.prefs.sign_format));
        auto& f = rendered[key];
        if (!f)
          f = frame_of(wire::make_envelope(
              "sign_sequence", session->id(),
              wire::sign_sequence_payload(*out.sequence, p.prefs.sign_format, out.source_chunk_seq, out.replay,
                                          p.prefs.signing_speed)));
        c->second->send(f);
      }
      continue;
    }
    Frame f;
    for (const auto& p : participants) {
      if (!audience_includes(out, p, settings)) continue;
      auto c = conns.find(p.participant_id);
      if (c == conns.end()) continue;
      if (!f) f = frame_of(wire::make_envelope(out.type, session->id(), out.payload));
      c->second->send(f);
    }
  }
}

void Room::request_summary(std::shared_ptr<WsConnection> conn, std::string event_id) {
  net::post(strand_, [self = shared_from_this(), conn = std::move(conn), event_id = std::move(event_id)] {
    SummaryWindow window;
    try {
      window = self->pipeline_.request_summary(self->pipeline_.session_time_s());
    } catch (const Error& e) {
      conn->send_error(e.code(), e.what(), event_id);
      return;
    }
    net::post(self->gw_->background, [self, conn, event_id, window = std::move(window)] {
      try {
        auto rec = self->pipeline_.summarize(window);
        conn->send(frame_of(wire::make_envelope("summary", self->session->id(), wire::summary_payload(rec))));
      } catch (const Error& e) {
        conn->send_error(e.code(), e.what(), event_id);
      }
    });
  });
}

void Room::arm_tick() {
  tick_.expires_after(std::chrono::milliseconds(gw_->cfg.summary_tick_ms));
  tick_.async_wait([self = shared_from_this()](beast::error_code ec) {
    if (ec || self->stopped_) return;
    if (auto window = self->pipeline_.due_summary(self->pipeline_.session_time_s())) {
      net::post(self->gw_->background, [self, window = std::move(*window)] {
        try {
          auto rec = self->pipeline_.summarize(window);
          self->send_all(frame_of(wire::make_envelope("summary", self->session->id(), wire::summary_payload(rec))));
        } catch (const Error& e) {
          spdlog::warn("scheduled summary for {} failed: {}", self->session->id(), e.what());
        }
      });
    }
    self->arm_tick();
  });
}

// ---------------------------------------------------------------------------

Gateway::Impl::JoinResult Gateway::Impl::join(const std::shared_ptr<WsConnection>& conn, const wire::Envelope& env) {
  const auto& p = env.payload;
  Participant part;
  part.participant_id = env.sender_id.empty() ? next_id() : env.sender_id;
  part.display_name = p.value("display_name", part.participant_id);
  if (auto it = p.find("role"); it != p.end() && !it->is_null()) {
    auto role = it->is_string() ? parse_role(it->get<std::string>()) : std::nullopt;
    if (!role) throw Error(Errc::MalformedPayload, "role must be 'speaker' or 'viewer'");
    part.role = *role;
  }
  if (auto it = p.find("prefs"); it != p.end() && !it->is_null()) part.prefs = ParticipantPrefs::merge_json(*it);
  SessionSettings settings = cfg.session_defaults;
  if (auto it = p.find("settings"); it != p.end() && !it->is_null())
    settings = SessionSettings::from_json(*it, settings);
  const std::string sid = env.session_id.empty() ? next_id() : env.session_id;

  std::lock_guard lock(rooms_mu);
  auto& slot = rooms[sid];
  const bool fresh = !slot;
  if (fresh) {
    auto session = registry.find_or_create(sid, settings);
    slot = std::make_shared<Room>(shared_from_this(), std::move(session));
    slot->start();
    counters.rooms_created++;
  }
  try {
    auto token = slot->session->join(part);
    slot->add_member(part.participant_id, conn);
    return {slot, part, token};
  } catch (...) {
    if (fresh) {
      slot->stop();
      registry.close_session(sid);
      rooms.erase(sid);
    }
    throw;
  }
}

void Gateway::Impl::leave(const std::string& session_id, const std::string& participant_id) {
  std::shared_ptr<Room> room;
  bool empty = false;
  {
    std::lock_guard lock(rooms_mu);
    auto it = rooms.find(session_id);
    if (it == rooms.end()) return;
    room = it->second;
    room->session->leave(participant_id);
    if (room->session->size() == 0) {
      empty = true;
      rooms.erase(it);
      registry.close_session(session_id);
    }
  }
  room->remove_member(participant_id);
  if (empty) {
    room->stop();
  } else {
    room->send_all(frame_of(
        wire::make_envelope("presence", session_id, {{"event", "left"}, {"participant_id", participant_id}})));
  }
}

void Gateway::Impl::do_accept() {
  acceptor.async_accept(net::make_strand(ioc), [self = shared_from_this()](beast::error_code ec, tcp::socket socket) {
    if (ec) {
      if (ec == net::error::operation_aborted || !self->acceptor.is_open()) return;
      spdlog::warn("accept failed: {}", ec.message());
    } else {
      self->on_http(std::move(socket));
    }
    self->do_accept();
  });
}

namespace {

class HttpSession : public std::enable_shared_from_this<HttpSession> {
 public:
  HttpSession(tcp::socket&& socket, std::shared_ptr<Gateway::Impl> gw) : stream_(std::move(socket)), gw_(std::move(gw)) {}

  void run() { read(); }

 private:
  void read() {
    req_ = {};
    stream_.expires_after(std::chrono::seconds(30));
    http::async_read(stream_, buf_, req_, beast::bind_front_handler(&HttpSession::on_read, shared_from_this()));
  }

  void on_read(beast::error_code ec, std::size_t) {
    if (ec) return;
    const std::string target(req_.target());
    const auto path = target.substr(0, target.find('?'));
    if (websocket::is_upgrade(req_)) {
      if (path != "/ws") return respond(http::status::not_found, R"({"error":"websocket endpoint is /ws"})");
      stream_.expires_never();
      auto conn = std::make_shared<WsConnection>(stream_.release_socket(), gw_);
      {
        std::lock_guard lock(gw_->conns_mu);
        gw_->conns.emplace(conn.get(), conn);
      }
      conn->run(std::move(req_));
      return;
    }
    if (req_.method() != http::verb::get) return respond(http::status::method_not_allowed, R"({"error":"GET only"})");
    if (path == "/health") return respond(http::status::ok, R"({"status":"ok"})");
    if (path == "/metrics") return respond(http::status::ok, gw_->metrics().dump());
    respond(http::status::not_found, R"({"error":"not found"})");
  }

  void respond(http::status status, std::string body) {
    auto res = std::make_shared<http::response<http::string_body>>(status, req_.version());
    res->set(http::field::server, "axs-gateway");
    res->set(http::field::content_type, "application/json");
    res->keep_alive(req_.keep_alive());
    res->body() = std::move(body);
    res->prepare_payload();
    http::async_write(stream_, *res, [self = shared_from_this(), res](beast::error_code ec, std::size_t) {
      if (ec) return;
      if (res->keep_alive()) return self->read();
      beast::error_code ignored;
      self->stream_.socket().shutdown(tcp::socket::shutdown_send, ignored);
    });
  }

  beast::tcp_stream stream_;
  beast::flat_buffer buf_;
  http::request<http::string_body> req_;
  std::shared_ptr<Gateway::Impl> gw_;
};

}  // namespace

void Gateway::Impl::on_http(tcp::socket socket) {
  std::make_shared<HttpSession>(std::move(socket), shared_from_this())->run();
}

json Gateway::Impl::metrics() const {
  json depth = json::object();
  json max_depth = json::object();
  {
    std::lock_guard lock(const_cast<std::mutex&>(rooms_mu));
    for (auto s : kAllStages) {
      std::size_t total = 0, peak = 0;
      for (const auto& [id, r] : rooms) {
        total += r->depth(s);
        peak = std::max(peak, r->depth(s));
      }
      depth[std::string(to_string(s))] = {{"total", total}, {"max_room", peak}};
    }
  }
  auto& c = const_cast<Counters&>(counters);
  json errors;
  {
    std::lock_guard lock(c.mu);
    errors = c.errors_by_code;
  }
  json e2e = nullptr;
  const auto h = ledger->end_to_end();
  if (h.count() > 0)
    e2e = {{"count", h.count()},          {"mean_ms", h.mean()},         {"p50_ms", h.percentile(50)},
           {"p95_ms", h.percentile(95)}, {"p99_ms", h.percentile(99)}, {"max_ms", h.max()}};
  return {{"connections_open", c.connections_open.load()},
          {"connections_total", c.connections_total.load()},
          {"sessions", registry.size()},
          {"rooms_created", c.rooms_created.load()},
          {"envelopes_in", c.envelopes_in.load()},
          {"envelopes_out", c.envelopes_out.load()},
          {"errors", std::move(errors)},
          {"disconnects_slow_consumer", c.disconnects_slow_consumer.load()},
          {"join_timeouts", c.join_timeouts.load()},
          {"emotion_dropped", c.emotion_dropped.load()},
          {"max_ingress_depth", c.max_ingress_depth.load()},
          {"queue_depth", std::move(depth)},
          {"stages", ledger->kpi_report().to_json()},
          {"end_to_end", std::move(e2e)},
          {"dictionary_version", assets->dictionary->version()}};
}

// ---------------------------------------------------------------------------

Gateway::Gateway(GatewayConfig config, std::shared_ptr<const PipelineAssets> assets)
    : impl_(std::make_shared<Impl>(std::move(config), std::move(assets))) {}

Gateway::~Gateway() { stop(); }

void Gateway::start() {
  auto& I = *impl_;
  beast::error_code ec;
  const auto addr = net::ip::make_address(I.cfg.host, ec);
  if (ec) throw Error(Errc::BindFailed, "bad host '" + I.cfg.host + "'");
  const tcp::endpoint ep(addr, I.cfg.port);
  I.acceptor.open(ep.protocol(), ec);
  if (!ec) I.acceptor.set_option(net::socket_base::reuse_address(true), ec);
  if (!ec) I.acceptor.bind(ep, ec);
  if (!ec) I.acceptor.listen(net::socket_base::max_listen_connections, ec);
  if (ec) throw Error(Errc::BindFailed, I.cfg.host + ":" + std::to_string(I.cfg.port) + ": " + ec.message());

  I.work.emplace(net::make_work_guard(I.ioc));
  I.do_accept();
  unsigned n = I.cfg.threads ? I.cfg.threads : std::max(2u, std::thread::hardware_concurrency());
  for (unsigned i = 0; i < n; ++i)
    I.threads.emplace_back([impl = impl_] {
      for (;;) {
        try {
          impl->ioc.run();
          return;
        } catch (const std::exception& e) {
          spdlog::error("handler failed: {}", e.what());
        }
      }
    });
  {
    std::lock_guard lock(I.stop_mu);
    I.running = true;
  }
  spdlog::info("gateway listening on {}:{} ({} threads, dictionary {})", I.cfg.host, port(), n,
               I.assets->dictionary->version());
}

void Gateway::stop() {
  auto& I = *impl_;
  {
    std::lock_guard lock(I.stop_mu);
    if (!I.running) return;
    I.running = false;
  }
  net::post(I.ioc, [impl = impl_] {
    beast::error_code ec;
    impl->acceptor.close(ec);
  });
  {
    std::vector<std::shared_ptr<WsConnection>> conns;
    {
      std::lock_guard lock(I.conns_mu);
      for (auto& [p, c] : I.conns) conns.push_back(std::move(c));
      I.conns.clear();
    }
    for (auto& c : conns) c->shutdown();
  }
  {
    std::lock_guard lock(I.rooms_mu);
    for (auto& [id, r] : I.rooms) r->stop();
  }
  I.work.reset();
  // Give in-flight handlers a moment, then force the loop down.
  std::this_thread::sleep_for(std::chrono::milliseconds(50));
  I.ioc.stop();
  for (auto& t : I.threads)
    if (t.joinable()) t.join();
  I.threads.clear();
  I.background.join();
  {
    std::lock_guard lock(I.rooms_mu);
    I.rooms.clear();
  }
  I.stop_cv.notify_all();
}

void Gateway::wait() {
  std::unique_lock lock(impl_->stop_mu);
  impl_->stop_cv.wait(lock, [&] { return !impl_->running; });
}

unsigned short Gateway::port() const {
  beast::error_code ec;
  auto ep = impl_->acceptor.local_endpoint(ec);
  return ec ? impl_->cfg.port : ep.port();
}

json Gateway::metrics() const { return impl_->metrics(); }
std::shared_ptr<LatencyLedger> Gateway::ledger() const { return impl_->ledger; }
const GatewayConfig& Gateway::config() const { return impl_->cfg; }

}  // namespace axs
