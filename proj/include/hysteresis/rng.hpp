#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace hyst {

// Philox4x64-10 counter-based generator. The key is
// (seed, stream): each replication or search run uses its own stream, and
// successive 256-bit blocks are produced by incrementing the counter before
// each block (same convention as numpy.random.Philox).
class Philox {
 public:
  using result_type = uint64_t;

  explicit Philox(uint64_t seed = 0, uint64_t stream = 0) : key_{seed, stream} {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~uint64_t{0}; }

  result_type operator()() {
    if (pos_ == 4) {
      increment();
      block_ = generate(counter_, key_);
      pos_ = 0;
    }
    return block_[pos_++];
  }

  // Uniform on (0,1) with 53 random bits, never exactly 0.
  double uniform() { return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53; }

  double exponential(double rate) { return -std::log(uniform()) / rate; }

  // Uniform integer in [lo, hi] by rejection (unbiased).
  int64_t uniform_int(int64_t lo, int64_t hi) {
    const uint64_t span = static_cast<uint64_t>(hi - lo) + 1;
    if (span == 0) return static_cast<int64_t>((*this)());
    const uint64_t limit = max() - max() % span;
    uint64_t x;
    do x = (*this)();
    while (x >= limit);
    return lo + static_cast<int64_t>(x % span);
  }

  static std::array<uint64_t, 4> generate(std::array<uint64_t, 4> ctr, std::array<uint64_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += 0x9E3779B97F4A7C15ULL;
        key[1] += 0xBB67AE8584CAA73BULL;
      }
      const unsigned __int128 p0 = static_cast<unsigned __int128>(0xD2E7470EE14C6C93ULL) * ctr[0];
      const unsigned __int128 p1 = static_cast<unsigned __int128>(0xCA5A826395121157ULL) * ctr[2];
      const uint64_t hi0 = static_cast<uint64_t>(p0 >> 64), lo0 = static_cast<uint64_t>(p0);
      const uint64_t hi1 = static_cast<uint64_t>(p1 >> 64), lo1 = static_cast<uint64_t>(p1);
      ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
  }

 private:
  void increment() {
    for (auto& w : counter_)
      if (++w != 0) break;
  }

  std::array<uint64_t, 2> key_;
  std::array<uint64_t, 4> counter_{};
  std::array<uint64_t, 4> block_{};
  int pos_ = 4;
};

}  // namespace hyst
