#pragma once

#include <cstddef>
#include <deque>
#include <optional>
#include <string_view>

#include "axs/error.hpp"
#include "axs/latency.hpp"

namespace axs {

enum class OverflowPolicy { Reject, DropOldest };

enum class Admission { Accepted, Rejected, DroppedOldest };
std::string_view to_string(Admission a) noexcept;

struct BackpressureConfig {
  std::size_t queue_bound = 64;
  /// Consecutive QUEUE_FULL rejections tolerated before SLOW_CONSUMER.
  std::size_t slow_consumer_grace = 32;

  void validate() const;  // INVALID_SETTINGS
  /// transcription, translation, signgen and summary are lossless; emotion drops.
  static OverflowPolicy policy_for(Stage stage) noexcept;
};

/// Bounded FIFO with a fixed overflow policy. Not synchronised: owned by the
/// session's serial executor.
template <typename T>
class StageQueue {
 public:
  StageQueue(std::size_t bound, OverflowPolicy policy) : bound_(bound), policy_(policy) {
    if (bound == 0) throw Error(Errc::InvalidSettings, "queue bound must be > 0");
  }

  Admission offer(T item) {
    if (items_.size() < bound_) {
      items_.push_back(std::move(item));
      return Admission::Accepted;
    }
    if (policy_ == OverflowPolicy::Reject) {
      ++rejected_;
      return Admission::Rejected;
    }
    items_.pop_front();
    items_.push_back(std::move(item));
    ++dropped_;
    return Admission::DroppedOldest;
  }

  std::optional<T> pop() {
    if (items_.empty()) return std::nullopt;
    T item = std::move(items_.front());
    items_.pop_front();
    return item;
  }

  const T* front() const { return items_.empty() ? nullptr : &items_.front(); }
  std::size_t size() const noexcept { return items_.size(); }
  bool empty() const noexcept { return items_.empty(); }
  std::size_t bound() const noexcept { return bound_; }
  OverflowPolicy policy() const noexcept { return policy_; }
  std::size_t rejected() const noexcept { return rejected_; }
  std::size_t dropped() const noexcept { return dropped_; }

 private:
  std::size_t bound_;
  OverflowPolicy policy_;
  std::deque<T> items_;
  std::size_t rejected_ = 0;
  std::size_t dropped_ = 0;
};

/// Counts a producer's consecutive rejections; any acceptance resets it.
class SlowConsumerGuard {
 public:
  explicit SlowConsumerGuard(std::size_t grace = 32) : grace_(grace) {}

  /// True when this outcome exhausts the grace (the producer must go).
  bool observe(Admission a) noexcept {
    if (a == Admission::Rejected) return ++streak_ > grace_;
    streak_ = 0;
    return false;
  }
  std::size_t streak() const noexcept { return streak_; }

 private:
  std::size_t grace_;
  std::size_t streak_ = 0;
};

}  // namespace axs
