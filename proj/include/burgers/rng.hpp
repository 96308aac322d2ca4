#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace burgers {

/// Philox4x32-10 block function: a keyed bijection on
/// 128-bit counters. Stateless, so any (key, counter) can be drawn in any order.
inline std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                               std::array<std::uint32_t, 2> key) noexcept {
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

/// Standard normal variates addressed by (seed, stream, index). Indices
/// 4q..4q+3 come from Marsaglia polar draws on the Philox blocks with counter
/// (q_lo, q_hi + r * 2^16, stream_lo, stream_hi), r = 0, 1, ...; each block
/// holds two 32-bit candidate pairs. Any index is reproducible on its own.
/// Indices must stay below 2^50.
class NormalStream {
 public:
  NormalStream(std::uint64_t seed, std::uint64_t stream) noexcept
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        stream_lo_(static_cast<std::uint32_t>(stream)),
        stream_hi_(static_cast<std::uint32_t>(stream >> 32)) {}

  double operator()(std::uint64_t index) noexcept {
    const std::uint64_t quad = index >> 2;
    if (quad != cached_quad_) {
      fill(quad);
      cached_quad_ = quad;
    }
    return values_[index & 3];
  }

 private:
  void fill(std::uint64_t quad) noexcept {
    constexpr double kUnit = 0x1.0p-31;
    int filled = 0;
    for (std::uint32_t attempt = 0;; ++attempt) {
      const auto r = philox4x32({static_cast<std::uint32_t>(quad),
                                 static_cast<std::uint32_t>(quad >> 32) + (attempt << 16), stream_lo_,
                                 stream_hi_},
                                key_);
      for (int half = 0; half < 2; ++half) {
        // Odd multiples of 2^-32 in (-1, 1).
        const double v1 = (static_cast<double>(r[2 * half]) + 0.5) * kUnit - 1.0;
        const double v2 = (static_cast<double>(r[2 * half + 1]) + 0.5) * kUnit - 1.0;
        const double s = v1 * v1 + v2 * v2;
        if (s >= 1.0) continue;
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        values_[filled] = v1 * f;
        values_[filled + 1] = v2 * f;
        filled += 2;
        if (filled == 4) return;
      }
    }
  }

  std::array<std::uint32_t, 2> key_;
  std::uint32_t stream_lo_;
  std::uint32_t stream_hi_;
  std::uint64_t cached_quad_ = ~std::uint64_t{0};
  std::array<double, 4> values_{};
};

}  // namespace burgers
