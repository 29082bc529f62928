#pragma once

#include <cstdint>
#include <mutex>
#include <random>
#include <string>

namespace axs {

/// Generates ULID-style identifiers: 26 Crockford base32 characters, a 48-bit
/// millisecond timestamp followed by 80 random bits. Ids from one generator
/// sort lexicographically in creation order, including within the same
/// millisecond (the random part is incremented instead of redrawn).
class IdGenerator {
 public:
  IdGenerator();
  explicit IdGenerator(std::uint64_t seed);

  std::string next();

  /// Encode an explicit timestamp and 80-bit payload (hi 16 bits, lo 64 bits).
  static std::string encode(std::uint64_t ms, std::uint16_t rand_hi, std::uint64_t rand_lo);

 private:
  std::mutex mu_;
  std::mt19937_64 rng_;
  std::uint64_t last_ms_ = 0;
  std::uint16_t hi_ = 0;
  std::uint64_t lo_ = 0;
};

/// Process-wide generator used for session and event ids.
std::string next_id();

}  // namespace axs
