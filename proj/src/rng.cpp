#include "slb/rng.hpp"

namespace slb {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  std::uint64_t product = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(product >> 32);
  lo = static_cast<std::uint32_t>(product);
}

}  // namespace

PhiloxCounter philox4x32_10(PhiloxCounter ctr, PhiloxKey key) {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kPhiloxW0;
      key[1] += kPhiloxW1;
    }
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kPhiloxM0, ctr[0], hi0, lo0);
    mulhilo(kPhiloxM1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

KeyedStream::result_type KeyedStream::operator()() {
  if (buffered_ == 0) {
    auto out = philox4x32_10({round_, node_, slot_, block_index_++}, key_);
    buffer_[0] = (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
    buffer_[1] = (static_cast<std::uint64_t>(out[2]) << 32) | out[3];
    buffered_ = 2;
  }
  return buffer_[2 - buffered_--];
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t trial) {
  std::uint64_t mixed = splitmix64(seed ^ splitmix64(trial));
  key_ = {static_cast<std::uint32_t>(mixed), static_cast<std::uint32_t>(mixed >> 32)};
}

std::array<double, 2> CounterRng::uniform_pair(std::uint64_t round, std::uint32_t node,
                                               std::uint64_t slot) const {
  auto out = philox4x32_10(
      {static_cast<std::uint32_t>(round), node, static_cast<std::uint32_t>(slot), 0}, key_);
  std::uint64_t a = (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
  std::uint64_t b = (static_cast<std::uint64_t>(out[2]) << 32) | out[3];
  return {to_unit_double(a), to_unit_double(b)};
}

}  // namespace slb
