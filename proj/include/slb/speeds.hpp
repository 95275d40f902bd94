#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "slb/graph.hpp"

namespace slb {

// Exact speeds are int64 rationals; Ratio comes from graph.hpp.

// Parses "p", "p/q" or a finite decimal such as "1.25" into an exact
// rational. Anything else (exponents, inf, nan, empty) is a ConfigError,
// since granularity is undefined for inexact input.
Ratio parse_rational(std::string_view text);
std::string format_rational(const Ratio& r);

struct Granularity {
  Ratio epsilon;
  std::vector<std::int64_t> multipliers;  // s_i = multipliers[i] * epsilon
};

// Greatest common rational divisor of positive rationals.
Granularity granularity_of(std::span<const Ratio> speeds);

// Per-node processor speeds, normalized so that the slowest node has speed 1.
//
// Alongside the exact rationals the profile keeps an integer representation
// s_i = scaled(i) / scale(), with scale() the least common denominator. All
// exact load comparisons are done on those integers.
class SpeedProfile {
 public:
  // Divides every speed by the minimum. ConfigError on empty or
  // non-positive input.
  static SpeedProfile from_rationals(std::vector<Ratio> raw);
  static SpeedProfile uniform(int n);
  static SpeedProfile from_integers(std::span<const std::int64_t> raw);

  int size() const { return static_cast<int>(exact_.size()); }

  const Ratio& exact(int i) const { return exact_[i]; }
  double speed(int i) const { return speeds_[i]; }
  std::span<const double> speeds() const { return speeds_; }

  std::int64_t scaled(int i) const { return scaled_[i]; }
  std::int64_t scale() const { return scale_; }
  std::int64_t scaled_total() const { return scaled_total_; }

  double total_capacity() const { return total_; }
  double s_max() const { return s_max_; }
  double s_min() const { return s_min_; }
  double arithmetic_mean() const { return total_ / size(); }
  double harmonic_mean() const { return size() / inverse_sum_; }
  // Sum of 1/s_i.
  double inverse_sum() const { return inverse_sum_; }
  bool is_uniform() const { return s_max_ == s_min_; }

  const Granularity& granularity() const { return granularity_; }
  double epsilon() const { return boost::rational_cast<double>(granularity_.epsilon); }

 private:
  SpeedProfile() = default;

  std::vector<Ratio> exact_;
  std::vector<double> speeds_;
  std::vector<std::int64_t> scaled_;
  std::int64_t scale_ = 1;
  std::int64_t scaled_total_ = 0;
  double total_ = 0;
  double s_max_ = 0;
  double s_min_ = 0;
  double inverse_sum_ = 0;
  Granularity granularity_;
};

// Whitespace- or comma-separated list of rationals, one per node.
SpeedProfile parse_speed_list(std::string_view text);

// n speeds drawn uniformly from the integers [1, max_speed] with a seeded
// keyed generator.
SpeedProfile random_integer_speeds(int n, std::int64_t max_speed, std::uint64_t seed);

// Repeats pattern over n nodes: pattern {1, 2} on 5 nodes gives 1,2,1,2,1.
SpeedProfile cyclic_speed_pattern(int n, std::span<const std::int64_t> pattern);

}  // namespace slb
