#pragma once

// Counter-based random streams (Philox4x32-10). A stream is fully described by
// (seed, stream id, position), so draws never depend on execution order.

#include <array>
#include <cstdint>
#include <limits>

namespace cmvno {

namespace detail {

inline std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key) {
  constexpr std::uint32_t kMul0 = 0xD2511F53u;
  constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
    ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
           static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

}  // namespace detail

/// Philox-backed stream. Satisfies UniformRandomBitGenerator.
class CounterRng {
 public:
  using result_type = std::uint32_t;

  CounterRng(std::uint64_t seed, std::uint64_t stream)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)}, stream_(stream) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    if (lane_ == 4) refill();
    return block_[lane_++];
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double next_double() {
    const std::uint64_t hi = (*this)() >> 5;
    const std::uint64_t lo = (*this)() >> 6;
    return static_cast<double>(hi * 67108864ull + lo) * 0x1.0p-53;
  }

  std::uint64_t position() const { return counter_ * 4 + lane_ - 4; }

 private:
  void refill() {
    block_ = detail::philox4x32_10({static_cast<std::uint32_t>(counter_), static_cast<std::uint32_t>(counter_ >> 32),
                                    static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)},
                                   key_);
    ++counter_;
    lane_ = 0;
  }

  std::array<std::uint32_t, 2> key_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
  std::array<std::uint32_t, 4> block_{};
  int lane_ = 4;
};

}  // namespace cmvno
