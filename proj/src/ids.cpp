#include "axs/ids.hpp"

#include <chrono>

namespace axs {

namespace {
constexpr char kCrockford[] = "0123456789ABCDEFGHJKMNPQRSTVWXYZ";

std::uint64_t wall_ms() {
  using namespace std::chrono;
  return static_cast<std::uint64_t>(
      duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count());
}
}  // namespace

IdGenerator::IdGenerator() : rng_(std::random_device{}()) {}

IdGenerator::IdGenerator(std::uint64_t seed) : rng_(seed) {}

std::string IdGenerator::encode(std::uint64_t ms, std::uint16_t rand_hi, std::uint64_t rand_lo) {
  // 128 bits = 48 time + 80 random, emitted as 26 five-bit groups (top 2 bits zero).
  unsigned __int128 v = (static_cast<unsigned __int128>(ms & 0xFFFFFFFFFFFFull) << 80) |
                        (static_cast<unsigned __int128>(rand_hi) << 64) | rand_lo;
  std::string out(26, '0');
  for (int i = 25; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = kCrockford[static_cast<unsigned>(v & 0x1F)];
    v >>= 5;
  }
  return out;
}

std::string IdGenerator::next() {
  std::lock_guard lock(mu_);
  std::uint64_t ms = wall_ms();
  if (ms <= last_ms_) {
    ms = last_ms_;
    if (++lo_ == 0) ++hi_;
  } else {
    last_ms_ = ms;
    lo_ = rng_();
    hi_ = static_cast<std::uint16_t>(rng_() & 0x7FFF);  // headroom for increments
  }
  return encode(ms, hi_, lo_);
}

std::string next_id() {
  static IdGenerator gen;
  return gen.next();
}

}  // namespace axs
