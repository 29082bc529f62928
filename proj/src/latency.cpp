#include "axs/latency.hpp"

#include <algorithm>
#include <cmath>

#include "axs/error.hpp"

namespace axs {

std::string_view to_string(Stage s) noexcept {
  switch (s) {
    case Stage::Transcription: return "transcription";
    case Stage::Translation: return "translation";
    case Stage::Emotion: return "emotion";
    case Stage::Signgen: return "signgen";
    case Stage::Summary: return "summary";
  }
  return "?";
}

std::optional<Stage> parse_stage(std::string_view s) noexcept {
  for (auto st : kAllStages)
    if (to_string(st) == s) return st;
  return std::nullopt;
}

namespace {

std::uint64_t nearest_rank(double p, std::uint64_t n) {
  const double r = std::ceil(std::clamp(p, 0.0, 100.0) / 100.0 * static_cast<double>(n));
  return std::clamp<std::uint64_t>(static_cast<std::uint64_t>(r), 1, n);
}

}  // namespace

double percentile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw Error(Errc::NoSamples, "percentile of an empty sample");
  return sorted[nearest_rank(p, sorted.size()) - 1];
}

double percentile(std::vector<double> samples, double p) {
  std::sort(samples.begin(), samples.end());
  return percentile_sorted(samples, p);
}

void LatencyHistogram::add(double ms) {
  const auto us = static_cast<std::int64_t>(std::llround(ms * 1000.0));
  ++bins_[us];
  ++n_;
  sum_us_ += us;
}

void LatencyHistogram::merge(const LatencyHistogram& other) {
  for (const auto& [us, c] : other.bins_) bins_[us] += c;
  n_ += other.n_;
  sum_us_ += other.sum_us_;
}

double LatencyHistogram::mean() const {
  if (n_ == 0) throw Error(Errc::NoSamples, "mean of an empty histogram");
  return static_cast<double>(sum_us_ / n_) / 1000.0;
}

double LatencyHistogram::min() const {
  if (n_ == 0) throw Error(Errc::NoSamples, "min of an empty histogram");
  return static_cast<double>(bins_.begin()->first) / 1000.0;
}

double LatencyHistogram::max() const {
  if (n_ == 0) throw Error(Errc::NoSamples, "max of an empty histogram");
  return static_cast<double>(bins_.rbegin()->first) / 1000.0;
}

double LatencyHistogram::percentile(double p) const {
  if (n_ == 0) throw Error(Errc::NoSamples, "percentile of an empty histogram");
  const auto rank = nearest_rank(p, n_);
  std::uint64_t seen = 0;
  for (const auto& [us, c] : bins_) {
    seen += c;
    if (seen >= rank) return static_cast<double>(us) / 1000.0;
  }
  return max();
}

std::optional<double> KpiBudgets::for_stage(Stage s) const noexcept {
  switch (s) {
    case Stage::Transcription: return transcription_ms;
    case Stage::Translation: return translation_ms;
    case Stage::Emotion: return emotion_ms;
    case Stage::Signgen: return signgen_ms;
    case Stage::Summary: return summary_ms;
  }
  return std::nullopt;
}

bool KpiReport::pass() const {
  return std::all_of(stages.begin(), stages.end(), [](const StageKpi& k) { return k.pass; });
}

nlohmann::json KpiReport::to_json() const {
  nlohmann::json out = nlohmann::json::object();
  for (const auto& k : stages) {
    nlohmann::json row = {{"count", k.count}, {"mean_ms", k.mean_ms}, {"p50_ms", k.p50_ms}, {"p95_ms", k.p95_ms},
                          {"p99_ms", k.p99_ms}, {"max_ms", k.max_ms}, {"pass", k.pass}};
    row["budget_ms"] = k.budget_ms ? nlohmann::json(*k.budget_ms) : nlohmann::json(nullptr);
    out[std::string(to_string(k.stage))] = std::move(row);
  }
  out["rejected"] = rejected;
  return out;
}

bool LatencyLedger::record(const StageLatency& e) {
  std::lock_guard lock(mu_);
  if (!(e.enqueue_ms <= e.dequeue_ms && e.dequeue_ms <= e.complete_ms)) {
    ++rejected_;
    return false;
  }
  hist_[static_cast<std::size_t>(e.stage)].add(e.total_ms());
  if (keep_records_) records_.push_back(e);
  return true;
}

bool LatencyLedger::record(Stage stage, const std::string& event_id, double enqueue_ms, double dequeue_ms,
                           double complete_ms) {
  return record(StageLatency{stage, event_id, enqueue_ms, dequeue_ms, complete_ms});
}

KpiReport LatencyLedger::kpi_report(const KpiBudgets& budgets) const {
  std::lock_guard lock(mu_);
  KpiReport rep;
  rep.rejected = rejected_;
  for (auto st : kAllStages) {
    const auto& h = hist_[static_cast<std::size_t>(st)];
    StageKpi k;
    k.stage = st;
    k.count = h.count();
    k.budget_ms = budgets.for_stage(st);
    if (k.count > 0) {
      k.mean_ms = h.mean();
      k.p50_ms = h.percentile(50);
      k.p95_ms = h.percentile(95);
      k.p99_ms = h.percentile(99);
      k.max_ms = h.max();
      if (k.budget_ms) k.pass = k.mean_ms < *k.budget_ms;
    }
    rep.stages.push_back(k);
  }
  return rep;
}

LatencyHistogram LatencyLedger::histogram(Stage stage) const {
  std::lock_guard lock(mu_);
  return hist_[static_cast<std::size_t>(stage)];
}

void LatencyLedger::record_end_to_end(double ms) {
  std::lock_guard lock(mu_);
  e2e_.add(ms);
}

LatencyHistogram LatencyLedger::end_to_end() const {
  std::lock_guard lock(mu_);
  return e2e_;
}

std::vector<StageLatency> LatencyLedger::records() const {
  std::lock_guard lock(mu_);
  return records_;
}

std::uint64_t LatencyLedger::rejected() const {
  std::lock_guard lock(mu_);
  return rejected_;
}

}  // namespace axs
