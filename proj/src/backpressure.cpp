#include "axs/backpressure.hpp"

namespace axs {

std::string_view to_string(Admission a) noexcept {
  switch (a) {
    case Admission::Accepted: return "accepted";
    case Admission::Rejected: return "rejected";
    case Admission::DroppedOldest: return "dropped_oldest";
  }
  return "?";
}

void BackpressureConfig::validate() const {
  if (queue_bound == 0) throw Error(Errc::InvalidSettings, "queue_bound must be > 0");
  if (slow_consumer_grace == 0) throw Error(Errc::InvalidSettings, "slow_consumer_grace must be > 0");
}

OverflowPolicy BackpressureConfig::policy_for(Stage stage) noexcept {
  return stage == Stage::Emotion ? OverflowPolicy::DropOldest : OverflowPolicy::Reject;
}

}  // namespace axs
