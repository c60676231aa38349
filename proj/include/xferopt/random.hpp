#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace xferopt {

// Philox4x32-10 counter-based generator (Salmon et al., SC'11). Output is a pure function of
// (key, counter), so any stream position can be produced without sequential state.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static constexpr Counter generate(Counter ctr, Key key) {
    for (int round = 0; round < 10; ++round) {
      ctr = single_round(ctr, key);
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

  static constexpr Counter single_round(const Counter& c, const Key& k) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * c[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * c[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
  }
};

/// Standard normal variates addressed by (seed, stream, index).
///
/// Each (stream, index) pair maps to one Philox block; two 53-bit uniforms from the block feed a
/// Box-Muller transform. Streams are typically trajectory indices, indices are time steps.
class CounterNormal {
 public:
  explicit CounterNormal(std::uint64_t seed)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)} {}

  double operator()(std::uint64_t stream, std::uint64_t index) const {
    const auto out = Philox4x32::generate(
        {static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
         static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)},
        key_);
    // (0, 1] keeps the log finite
    const double u1 = (static_cast<double>(to53(out[0], out[1])) + 1.0) * 0x1p-53;
    const double u2 = static_cast<double>(to53(out[2], out[3])) * 0x1p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  static std::uint64_t to53(std::uint32_t a, std::uint32_t b) {
    return ((static_cast<std::uint64_t>(a) << 32) | b) >> 11;
  }

  Philox4x32::Key key_;
};

}  // namespace xferopt
