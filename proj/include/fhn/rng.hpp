#pragma once

#include <cstdint>
#include <cmath>
#include <numbers>

namespace fhn {

// Philox 4x32-10 counter-based generator. A (key, counter) pair maps to four
// independent 32-bit words, so every (seed, stream) owns a reproducible
// sequence that does not depend on execution order or thread count.
struct Philox4x32 {
  struct Block {
    std::uint32_t x[4];
  };

  static Block generate(std::uint64_t key, std::uint64_t counter_hi,
                        std::uint64_t counter_lo) {
    std::uint32_t k0 = static_cast<std::uint32_t>(key);
    std::uint32_t k1 = static_cast<std::uint32_t>(key >> 32);
    std::uint32_t c0 = static_cast<std::uint32_t>(counter_lo);
    std::uint32_t c1 = static_cast<std::uint32_t>(counter_lo >> 32);
    std::uint32_t c2 = static_cast<std::uint32_t>(counter_hi);
    std::uint32_t c3 = static_cast<std::uint32_t>(counter_hi >> 32);
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = std::uint64_t(0xD2511F53u) * c0;
      const std::uint64_t p1 = std::uint64_t(0xCD9E8D57u) * c2;
      const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
      const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
      const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
      const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
      c0 = hi1 ^ c1 ^ k0;
      c1 = lo1;
      c2 = hi0 ^ c3 ^ k1;
      c3 = lo0;
      k0 += 0x9E3779B9u;
      k1 += 0xBB67AE85u;
    }
    return {{c0, c1, c2, c3}};
  }
};

// 64 random bits -> double in (0, 1]; never 0, so log() is safe.
inline double uniform_from_bits(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits = (std::uint64_t(hi) << 32) | lo;
  return double((bits >> 11) + 1) * 0x1p-53;
}

// Standard normal samples via Box-Muller on Philox blocks. Sample 2k and
// 2k+1 of stream (seed, stream_id) always come from counter block k.
class NormalStream {
 public:
  NormalStream(std::uint64_t seed, std::uint64_t stream_id)
      : key_(seed), stream_(stream_id) {}

  double next() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const auto blk = Philox4x32::generate(key_, stream_, block_++);
    const double u1 = uniform_from_bits(blk.x[0], blk.x[1]);
    const double u2 = uniform_from_bits(blk.x[2], blk.x[3]);
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

 private:
  std::uint64_t key_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  double spare_ = 0;
  bool have_spare_ = false;
};

}  // namespace fhn
