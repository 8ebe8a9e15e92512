#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>

namespace fep {

/// Philox4x32-10 counter-based block function (Salmon et al., Random123).
/// Maps a 128-bit counter and a 64-bit key to 128 random bits.
struct Philox4x32 {
  using counter_type = std::array<std::uint32_t, 4>;
  using key_type = std::array<std::uint32_t, 2>;

  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

  static constexpr counter_type round(const counter_type& c, const key_type& k) {
    const std::uint64_t p0 = std::uint64_t{kMul0} * c[0];
    const std::uint64_t p1 = std::uint64_t{kMul1} * c[2];
    return {static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ k[0], static_cast<std::uint32_t>(p1),
            static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ k[1], static_cast<std::uint32_t>(p0)};
  }

  static constexpr counter_type apply(counter_type c, key_type k) {
    c = round(c, k);
    for (int r = 1; r < 10; ++r) {
      k[0] += kWeyl0;
      k[1] += kWeyl1;
      c = round(c, k);
    }
    return c;
  }
};

/// One reproducible random stream per (master seed, stream index).
///
/// The key is the master seed; the upper half of the counter is the stream
/// index and the lower half counts blocks. Streams never share state, so
/// replicas can run on any thread in any order and still draw identical
/// numbers.
class RandomStream {
 public:
  using result_type = std::uint64_t;

  RandomStream(std::uint64_t seed, std::uint64_t stream)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        stream_(stream) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    if (used_ == 2) refill();
    return buffer_[used_++];
  }

  /// Uniform double in the open interval (0, 1), 53 bits of resolution.
  double uniform() {
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Exponential variate with the given rate.
  double exponential(double rate) { return -std::log(uniform()) / rate; }

  /// Uniform integer in [0, n), n > 0, using Lemire's nearly-divisionless method.
  std::uint64_t below(std::uint64_t n) {
    for (;;) {
      const unsigned __int128 m = static_cast<unsigned __int128>((*this)()) * n;
      const auto low = static_cast<std::uint64_t>(m);
      if (low >= n || low >= (-n) % n) return static_cast<std::uint64_t>(m >> 64);
    }
  }

  std::uint64_t blocks_used() const { return block_; }

 private:
  void refill() {
    const Philox4x32::counter_type ctr{static_cast<std::uint32_t>(block_),
                                       static_cast<std::uint32_t>(block_ >> 32),
                                       static_cast<std::uint32_t>(stream_),
                                       static_cast<std::uint32_t>(stream_ >> 32)};
    const auto out = Philox4x32::apply(ctr, key_);
    buffer_[0] = (std::uint64_t{out[1]} << 32) | out[0];
    buffer_[1] = (std::uint64_t{out[3]} << 32) | out[2];
    ++block_;
    used_ = 0;
  }

  Philox4x32::key_type key_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  int used_ = 2;
};

}  // namespace fep
