#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace slb {

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

// Philox4x32 with 10 rounds (Salmon et al., SC'11). Pure function of
// counter and key.
PhiloxCounter philox4x32_10(PhiloxCounter counter, PhiloxKey key);

std::uint64_t splitmix64(std::uint64_t x);

// Maps the top 53 bits to [0, 1).
inline double to_unit_double(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// Uniform integer in [0, bound) by multiply-high; bias is below bound / 2^64.
inline std::uint64_t to_bounded(std::uint64_t bits, std::uint64_t bound) {
  return static_cast<std::uint64_t>((static_cast<unsigned __int128>(bits) * bound) >> 64);
}

// Sequential stream over one (key, round, node, slot) coordinate. Satisfies
// UniformRandomBitGenerator so it can drive <random> distributions.
class KeyedStream {
 public:
  using result_type = std::uint64_t;

  KeyedStream(PhiloxKey key, std::uint32_t round, std::uint32_t node, std::uint32_t slot)
      : key_(key), round_(round), node_(node), slot_(slot) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();
  double uniform() { return to_unit_double((*this)()); }

 private:
  PhiloxKey key_;
  std::uint32_t round_;
  std::uint32_t node_;
  std::uint32_t slot_;
  std::uint32_t block_index_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  int buffered_ = 0;
};

// Counter-based generator keyed by (seed, trial). Every draw is addressed by
// (round, node, slot), so results never depend on evaluation order. Rounds
// and slots are taken modulo 2^32.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t trial);

  // Two independent uniforms in [0, 1) for one coordinate.
  std::array<double, 2> uniform_pair(std::uint64_t round, std::uint32_t node,
                                     std::uint64_t slot) const;

  KeyedStream stream(std::uint64_t round, std::uint32_t node, std::uint64_t slot) const {
    return KeyedStream(key_, static_cast<std::uint32_t>(round), node,
                       static_cast<std::uint32_t>(slot));
  }

  PhiloxKey key() const { return key_; }

 private:
  PhiloxKey key_;
};

}  // namespace slb
