#pragma once

// Philox4x32-10 counter-based generator (Salmon et al., SC'11, as shipped in
// Random123). A stream is addressed by (seed, substream); every substream is
// an independent sequence, so per-trial streams need no shared state.

#include <array>
#include <cstdint>
#include <limits>

namespace tasnoma::random {

using philox_block = std::array<std::uint32_t, 4>;
using philox_key = std::array<std::uint32_t, 2>;

namespace detail {

inline constexpr std::uint32_t philox_m0 = 0xD2511F53u;
inline constexpr std::uint32_t philox_m1 = 0xCD9E8D57u;
inline constexpr std::uint32_t philox_w0 = 0x9E3779B9u;
inline constexpr std::uint32_t philox_w1 = 0xBB67AE85u;

constexpr philox_block philox_round(const philox_block& c, const philox_key& k) noexcept {
  const std::uint64_t p0 = std::uint64_t{philox_m0} * c[0];
  const std::uint64_t p1 = std::uint64_t{philox_m1} * c[2];
  const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
  const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
  return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
}

}  // namespace detail

// The raw bijection: 10 rounds with the Weyl key schedule.
constexpr philox_block philox4x32_10(philox_block ctr, philox_key key) noexcept {
  ctr = detail::philox_round(ctr, key);
  for (int r = 1; r < 10; ++r) {
    key[0] += detail::philox_w0;
    key[1] += detail::philox_w1;
    ctr = detail::philox_round(ctr, key);
  }
  return ctr;
}

// UniformRandomBitGenerator over one substream. The seed is the key, the
// substream index fills counter words 2-3 and words 0-1 count blocks.
// Each block yields two 64-bit outputs.
class philox_stream {
 public:
  using result_type = std::uint64_t;

  philox_stream(std::uint64_t seed, std::uint64_t substream) noexcept
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        hi_{static_cast<std::uint32_t>(substream), static_cast<std::uint32_t>(substream >> 32)} {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    if (pos_ % 2 == 0) fill(pos_ / 2);
    return buffer_[pos_++ % 2];
  }

  // Skips n outputs.
  void discard(std::uint64_t n) noexcept {
    pos_ += n;
    if (pos_ % 2 == 1) fill(pos_ / 2);
  }

  // Number of outputs consumed so far.
  std::uint64_t position() const noexcept { return pos_; }

 private:
  void fill(std::uint64_t block) noexcept {
    const philox_block ctr{static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32), hi_[0], hi_[1]};
    const auto out = philox4x32_10(ctr, key_);
    buffer_[0] = (std::uint64_t{out[1]} << 32) | out[0];
    buffer_[1] = (std::uint64_t{out[3]} << 32) | out[2];
  }

  philox_key key_;
  std::array<std::uint32_t, 2> hi_;
  std::array<std::uint64_t, 2> buffer_{};
  std::uint64_t pos_ = 0;
};

// Decorrelated companion seed, e.g. for a second independent sample set.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) noexcept {
  // splitmix64 finalizer
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (tag + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace tasnoma::random
