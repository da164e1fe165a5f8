#pragma once

#include <array>
#include <cstdint>

namespace pdsape {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11). A draw is a
/// pure function of (key, counter), so streams can be split across threads
/// and replayed in any order.
class Philox {
 public:
  using Block = std::array<std::uint32_t, 4>;

  explicit Philox(std::uint64_t seed) : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)} {}

  Block operator()(std::uint64_t hi, std::uint64_t lo) const {
    Block ctr{static_cast<std::uint32_t>(lo), static_cast<std::uint32_t>(lo >> 32), static_cast<std::uint32_t>(hi),
              static_cast<std::uint32_t>(hi >> 32)};
    std::array<std::uint32_t, 2> key = key_;
    for (int r = 0; r < 10; ++r) {
      if (r) {
        key[0] += 0x9E3779B9u;
        key[1] += 0xBB67AE85u;
      }
      const std::uint64_t p0 = std::uint64_t{0xD2511F53u} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * ctr[2];
      ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
             static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
    }
    return ctr;
  }

 private:
  std::array<std::uint32_t, 2> key_;
};

/// Uniform in (0, 1) from the top 52 bits of a 64-bit word, on the midpoints
/// of a 2^-52 grid; never 0 or 1.
inline double bits_to_unit(std::uint64_t bits) { return (static_cast<double>(bits >> 12) + 0.5) * 0x1.0p-52; }

/// Standard normal keyed by (seed, a, b), by inverse CDF.
double counter_normal(std::uint64_t seed, std::uint64_t a, std::uint64_t b);

/// Sequential draws from one Philox stream: block index increments, each
/// block yields two uniforms.
class PhiloxStream {
 public:
  PhiloxStream(std::uint64_t seed, std::uint64_t stream) : gen_(seed), stream_(stream) {}

  double uniform() {
    if (avail_ == 0) refill();
    return buffer_[static_cast<std::size_t>(--avail_)];
  }
  double normal();
  double normal(double mean, double sd) { return mean + sd * normal(); }
  bool bernoulli(double prob) { return uniform() < prob; }
  /// Integer in [0, m).
  std::uint64_t below(std::uint64_t m);

 private:
  void refill() {
    const Philox::Block b = gen_(stream_, counter_++);
    buffer_[1] = bits_to_unit((std::uint64_t{b[1]} << 32) | b[0]);
    buffer_[0] = bits_to_unit((std::uint64_t{b[3]} << 32) | b[2]);
    avail_ = 2;
  }

  Philox gen_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
  std::array<double, 2> buffer_{};
  int avail_ = 0;
};

/// SplitMix64 finalizer, for deriving child seeds.
inline std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

}  // namespace pdsape
