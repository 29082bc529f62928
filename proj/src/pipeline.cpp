#include "axs/pipeline.hpp"

#include <chrono>
#include <set>

#include "axs/ids.hpp"
#include "axs/protocol.hpp"

namespace axs {

namespace {

double steady_ms() {
  using namespace std::chrono;
  return duration<double, std::milli>(steady_clock::now().time_since_epoch()).count();
}

}  // namespace

bool audience_includes(const Outbound& out, const Participant& p, const SessionSettings& settings) {
  switch (out.audience) {
    case Audience::All: return true;
    case Audience::Partials: return p.prefs.partials;
    case Audience::Language: return p.prefs.language == out.key;
    case Audience::Emoji: return settings.emoji_overlay && p.prefs.emoji_enabled;
    case Audience::Signing: return settings.signing_enabled && p.prefs.signing;
    case Audience::Participant: return p.participant_id == out.key;
  }
  return false;
}

RoomPipeline::RoomPipeline(std::shared_ptr<Session> session, std::shared_ptr<const PipelineAssets> assets,
                           std::shared_ptr<LatencyLedger> ledger, Clock clock)
    : session_(std::move(session)),
      assets_(std::move(assets)),
      ledger_(std::move(ledger)),
      clock_(clock ? std::move(clock) : Clock(steady_ms)),
      origin_ms_(clock_()),
      ingress_(session_->settings().queue_bound, BackpressureConfig::policy_for(Stage::Transcription)),
      translate_q_(session_->settings().queue_bound, BackpressureConfig::policy_for(Stage::Translation)),
      emotion_q_(session_->settings().queue_bound, BackpressureConfig::policy_for(Stage::Emotion)),
      signgen_q_(session_->settings().queue_bound, BackpressureConfig::policy_for(Stage::Signgen)),
      summary_q_(session_->settings().queue_bound, BackpressureConfig::policy_for(Stage::Summary)),
      transcript_(session_->settings().summary_interval_s) {
  if (!ledger_) ledger_ = std::make_shared<LatencyLedger>();
}

RoomPipeline::Speaker& RoomPipeline::speaker(const std::string& id) {
  auto it = speakers_.find(id);
  if (it == speakers_.end()) {
    Speaker sp;
    auto cfg = assets_->assembler;
    cfg.language = session_->settings().source_language;
    sp.assembler = std::make_unique<UtteranceAssembler>(id, cfg);
    it = speakers_.emplace(id, std::move(sp)).first;
  }
  return it->second;
}

Admission RoomPipeline::submit_chunk(AudioChunk chunk, std::string event_id) {
  const double t = now();
  return ingress_.offer(Ingress{std::move(chunk), std::move(event_id), t});
}

Admission RoomPipeline::submit_text(const std::string& speaker_id, std::string text, std::string event_id) {
  const double t = now();
  return ingress_.offer(Ingress{TextItem{speaker_id, std::move(text)}, std::move(event_id), t});
}

std::size_t RoomPipeline::depth(Stage stage) const noexcept {
  switch (stage) {
    case Stage::Transcription: return ingress_.size();
    case Stage::Translation: return translate_q_.size();
    case Stage::Emotion: return emotion_q_.size();
    case Stage::Signgen: return signgen_q_.size();
    case Stage::Summary: return summary_q_.size();
  }
  return 0;
}

std::optional<StepResult> RoomPipeline::step() {
  auto in = ingress_.pop();
  if (!in) return std::nullopt;
  StepResult out;
  out.event_id = in->event_id;
  try {
    if (const auto* chunk = std::get_if<AudioChunk>(&in->item)) {
      out.origin = chunk->speaker_id;
      transcribe(*chunk, *in, out);
    } else {
      const auto& ti = std::get<TextItem>(in->item);
      out.origin = ti.speaker_id;
      const double dq = now();
      auto& sp = speaker(ti.speaker_id);
      auto pending = sp.assembler->flush();
      auto typed = utterance_from_text(ti.speaker_id, ti.text, session_->settings().source_language, session_time_s());
      if (!typed.text.empty()) pending.push_back(std::move(typed));
      ledger_->record(Stage::Transcription, in->event_id, in->enqueue_ms, dq, now());
      emit_utterances(std::move(pending), out);
    }
  } catch (const Error& e) {
    out.errors.push_back({e.code(), e.what(), in->event_id});
  }
  drain_stages(out);
  return out;
}

void RoomPipeline::transcribe(const AudioChunk& chunk, const Ingress& in, StepResult& out) {
  const double dq = now();
  auto& sp = speaker(chunk.speaker_id);
  sp.chunk_arrival_ms[chunk.seq] = in.enqueue_ms;
  const auto seg = assets_->recognizer->recognize(chunk);
  auto utterances = sp.assembler->push(seg);
  ledger_->record(Stage::Transcription, in.event_id, in.enqueue_ms, dq, now());

  if (!seg.empty() || !utterances.empty()) {
    const auto caption = sp.assembler->pending_text();
    if (!caption.empty()) {
      PipelineEvent ev{EventKind::PartialSegment, in.event_id, chunk.speaker_id, chunk.seq};
      for (const auto& sub : route_event(*session_, ev)) {
        if (sub.destination != Destination::Display) continue;
        out.outputs.push_back({"transcript",
                               wire::partial_transcript_payload(chunk.speaker_id, chunk.seq, caption, seg.t0, seg.t1),
                               Audience::Partials});
      }
    }
  }
  emit_utterances(std::move(utterances), out);
}

void RoomPipeline::emit_utterances(std::vector<Utterance> utterances, StepResult& out) {
  for (auto& u : utterances) {
    auto shared = std::make_shared<const Utterance>(std::move(u));
    out.outputs.push_back({"transcript", wire::transcript_payload(*shared), Audience::All});
    fan_out(shared, next_id(), out);
  }
}

void RoomPipeline::fan_out(const std::shared_ptr<const Utterance>& u, const std::string& event_id, StepResult& out) {
  auto& sp = speaker(u->speaker_id);
  PipelineEvent ev{EventKind::Utterance, event_id, u->speaker_id, ++sp.utterance_seq};
  const double t = now();
  for (const auto& sub : route_event(*session_, ev)) {
    Work w{u, nullptr, event_id, t};
    Admission a = Admission::Accepted;
    switch (sub.destination) {
      case Destination::Translate: a = translate_q_.offer(std::move(w)); break;
      case Destination::Emotion: a = emotion_q_.offer(std::move(w)); break;
      case Destination::Signgen: a = signgen_q_.offer(std::move(w)); break;
      case Destination::Summary: a = summary_q_.offer(std::move(w)); break;
      case Destination::Display: break;
    }
    if (a == Admission::Rejected)
      out.errors.push_back({Errc::QueueFull, std::string(to_string(sub.destination)) + " queue full", event_id});
  }
}

void RoomPipeline::drain_stages(StepResult& out) {
  // Emotion first: it has the tightest budget and never waits on the others.
  while (!emotion_q_.empty() || !translate_q_.empty() || !signgen_q_.empty() || !summary_q_.empty()) {
    if (auto w = emotion_q_.pop()) run_emotion(*w, out);
    if (auto w = translate_q_.pop()) run_translate(*w, out);
    if (auto w = signgen_q_.pop()) run_signgen(*w, out);
    if (auto w = summary_q_.pop()) run_summary(*w);
  }
}

void RoomPipeline::run_translate(const Work& w, StepResult& out) {
  const double dq = now();
  const auto& settings = session_->settings();
  std::set<std::string> targets;
  if (!settings.target_language.empty()) targets.insert(settings.target_language);
  for (const auto& p : session_->participants())
    if (p.prefs.language != settings.source_language &&
        assets_->translator->has_pair(settings.source_language, p.prefs.language))
      targets.insert(p.prefs.language);
  for (const auto& target : targets) {
    if (target == settings.source_language) continue;
    try {
      auto tr = std::make_shared<const Translation>(assets_->translator->translate(*w.utterance, target));
      out.outputs.push_back({"translation", wire::translation_payload(*tr, w.utterance->speaker_id),
                             Audience::Language, target});
      auto& sp = speaker(w.utterance->speaker_id);
      PipelineEvent ev{EventKind::Translation, w.event_id, w.utterance->speaker_id, ++sp.translation_seq};
      for (const auto& sub : route_event(*session_, ev)) {
        if (sub.destination == Destination::Signgen && target == settings.target_language)
          signgen_q_.offer(Work{w.utterance, tr, w.event_id, now()});
      }
    } catch (const Error& e) {
      out.errors.push_back({e.code(), e.what(), w.event_id});
    }
  }
  ledger_->record(Stage::Translation, w.event_id, w.enqueue_ms, dq, now());
}

void RoomPipeline::run_emotion(const Work& w, StepResult& out) {
  const double dq = now();
  try {
    auto label = assets_->emotion->classify(*w.utterance);
    label.utterance_id = w.utterance->utterance_id;
    ledger_->record(Stage::Emotion, w.event_id, w.enqueue_ms, dq, now());
    out.outputs.push_back({"emotion", wire::emotion_payload(label, w.utterance->speaker_id), Audience::Emoji});
  } catch (const Error& e) {
    out.errors.push_back({e.code(), e.what(), w.event_id});
  }
}

void RoomPipeline::run_signgen(const Work& w, StepResult& out) {
  const double dq = now();
  const auto& text = w.translation ? w.translation->target_text : w.utterance->text;
  auto glosses = tokenize_to_glosses(text, *assets_->dictionary, assets_->gloss);
  if (glosses.empty()) {
    ledger_->record(Stage::Signgen, w.event_id, w.enqueue_ms, dq, now());
    return;  // nothing signable (only stopwords)
  }
  try {
    auto seq = assemble_animation(glosses, *assets_->dictionary);
    seq.utterance_id = w.utterance->utterance_id;
    seq.speaker_id = w.utterance->speaker_id;
    auto shared = std::make_shared<const AnimationSequence>(std::move(seq));
    session_->replay_buffer().push(shared);
    const double done = now();
    ledger_->record(Stage::Signgen, w.event_id, w.enqueue_ms, dq, done);

    auto& sp = speaker(w.utterance->speaker_id);
    const auto anchor = w.utterance->last_chunk_seq;
    if (auto it = sp.chunk_arrival_ms.find(anchor); it != sp.chunk_arrival_ms.end()) {
      e2e_.add(done - it->second);
      ledger_->record_end_to_end(done - it->second);
      sp.chunk_arrival_ms.erase(sp.chunk_arrival_ms.begin(), std::next(it));
    }
    Outbound o{"sign_sequence", nullptr, Audience::Signing};
    o.sequence = shared;
    o.source_chunk_seq = anchor;
    out.outputs.push_back(std::move(o));
  } catch (const Error& e) {
    out.errors.push_back({e.code(), e.what(), w.event_id});
  }
}

void RoomPipeline::run_summary(const Work& w) {
  const double dq = now();
  transcript_.accumulate(*w.utterance, session_time_s());
  ledger_->record(Stage::Summary, w.event_id, w.enqueue_ms, dq, now());
}

std::vector<Outbound> RoomPipeline::flush_speaker(const std::string& speaker_id) {
  auto it = speakers_.find(speaker_id);
  if (it == speakers_.end()) return {};
  StepResult out;
  emit_utterances(it->second.assembler->flush(), out);
  drain_stages(out);
  return std::move(out.outputs);
}

std::optional<SummaryWindow> RoomPipeline::due_summary(double now_s) { return transcript_.schedule_tick(now_s); }

SummaryWindow RoomPipeline::request_summary(double now_s) { return transcript_.request(now_s); }

SummaryRecord RoomPipeline::summarize(const SummaryWindow& window) const {
  const double t0 = clock_();
  auto rec = assets_->summarizer->summarize(window_text(window.entries), assets_->summary);
  rec.session_id = session_->id();
  rec.t_start = window.t_start;
  rec.t_end = window.t_end;
  rec.trigger = window.trigger;
  rec.language = session_->settings().source_language;
  ledger_->record(Stage::Summary, rec.summary_id, t0, t0, clock_());
  return rec;
}

double RoomPipeline::session_time_s() const { return (clock_() - origin_ms_) / 1000.0; }

}  // namespace axs
