#include "slb/speeds.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "slb/error.hpp"
#include "slb/rng.hpp"

namespace slb {

namespace {

std::int64_t checked_lcm(std::int64_t a, std::int64_t b) {
  std::int64_t g = std::gcd(a, b);
  __int128 result = static_cast<__int128>(a / g) * b;
  if (result > std::numeric_limits<std::int64_t>::max()) {
    throw ConfigError("speed denominators too large: common denominator overflows int64");
  }
  return static_cast<std::int64_t>(result);
}

std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
  __int128 result = static_cast<__int128>(a) * b;
  if (result > std::numeric_limits<std::int64_t>::max() ||
      result < std::numeric_limits<std::int64_t>::min()) {
    throw ConfigError("speed value overflows int64 after scaling");
  }
  return static_cast<std::int64_t>(result);
}

std::int64_t parse_digits(std::string_view digits, std::string_view whole) {
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
  if (ec != std::errc() || ptr != digits.data() + digits.size()) {
    throw ConfigError(fmt::format("'{}' is not an exact rational", whole));
  }
  return value;
}

bool all_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

}  // namespace

Ratio parse_rational(std::string_view text) {
  auto first = text.find_first_not_of(" \t");
  auto last = text.find_last_not_of(" \t");
  if (first == std::string_view::npos) throw ConfigError("empty rational");
  std::string_view s = text.substr(first, last - first + 1);

  bool negative = false;
  std::string_view body = s;
  if (!body.empty() && (body[0] == '-' || body[0] == '+')) {
    negative = body[0] == '-';
    body.remove_prefix(1);
  }

  Ratio value;
  if (auto slash = body.find('/'); slash != std::string_view::npos) {
    auto num = body.substr(0, slash);
    auto den = body.substr(slash + 1);
    if (!all_digits(num) || !all_digits(den)) {
      throw ConfigError(fmt::format("'{}' is not an exact rational", s));
    }
    std::int64_t d = parse_digits(den, s);
    if (d == 0) throw ConfigError(fmt::format("'{}' has a zero denominator", s));
    value = Ratio(parse_digits(num, s), d);
  } else if (auto dot = body.find('.'); dot != std::string_view::npos) {
    auto int_part = body.substr(0, dot);
    auto frac_part = body.substr(dot + 1);
    if ((!int_part.empty() && !all_digits(int_part)) || !all_digits(frac_part) ||
        frac_part.size() > 15) {
      throw ConfigError(fmt::format("'{}' is not an exact rational", s));
    }
    std::int64_t den = 1;
    for (std::size_t k = 0; k < frac_part.size(); ++k) den *= 10;
    std::int64_t whole = int_part.empty() ? 0 : parse_digits(int_part, s);
    value = Ratio(checked_mul(whole, den) + parse_digits(frac_part, s), den);
  } else {
    if (!all_digits(body)) throw ConfigError(fmt::format("'{}' is not an exact rational", s));
    value = Ratio(parse_digits(body, s));
  }
  return negative ? -value : value;
}

std::string format_rational(const Ratio& r) {
  if (r.denominator() == 1) return fmt::format("{}", r.numerator());
  return fmt::format("{}/{}", r.numerator(), r.denominator());
}

Granularity granularity_of(std::span<const Ratio> speeds) {
  if (speeds.empty()) throw ConfigError("granularity of an empty speed list");
  std::int64_t common_den = 1;
  for (const auto& s : speeds) {
    if (s <= 0) throw ConfigError(fmt::format("speed {} is not positive", format_rational(s)));
    common_den = checked_lcm(common_den, s.denominator());
  }
  std::vector<std::int64_t> numerators;
  numerators.reserve(speeds.size());
  std::int64_t g = 0;
  for (const auto& s : speeds) {
    std::int64_t a = checked_mul(s.numerator(), common_den / s.denominator());
    numerators.push_back(a);
    g = std::gcd(g, a);
  }
  Granularity out;
  out.epsilon = Ratio(g, common_den);
  out.multipliers.reserve(numerators.size());
  for (auto a : numerators) out.multipliers.push_back(a / g);
  return out;
}

SpeedProfile SpeedProfile::from_rationals(std::vector<Ratio> raw) {
  if (raw.empty()) throw ConfigError("speed profile is empty");
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (raw[i] <= 0) {
      throw ConfigError(fmt::format("speed of node {} must be positive, got {}", i,
                                    format_rational(raw[i])));
    }
  }
  const Ratio lowest = *std::min_element(raw.begin(), raw.end());

  SpeedProfile p;
  p.exact_.reserve(raw.size());
  for (const auto& r : raw) p.exact_.push_back(r / lowest);

  p.scale_ = 1;
  for (const auto& s : p.exact_) p.scale_ = checked_lcm(p.scale_, s.denominator());
  p.scaled_total_ = 0;
  for (const auto& s : p.exact_) {
    std::int64_t k = checked_mul(s.numerator(), p.scale_ / s.denominator());
    p.scaled_.push_back(k);
    if (p.scaled_total_ > std::numeric_limits<std::int64_t>::max() - k) {
      throw ConfigError("total scaled capacity overflows int64");
    }
    p.scaled_total_ += k;
  }

  p.speeds_.reserve(p.exact_.size());
  for (const auto& s : p.exact_) p.speeds_.push_back(boost::rational_cast<double>(s));
  p.total_ = 0;
  p.inverse_sum_ = 0;
  for (double s : p.speeds_) {
    p.total_ += s;
    p.inverse_sum_ += 1.0 / s;
  }
  p.s_max_ = *std::max_element(p.speeds_.begin(), p.speeds_.end());
  p.s_min_ = *std::min_element(p.speeds_.begin(), p.speeds_.end());
  p.granularity_ = granularity_of(p.exact_);
  return p;
}

SpeedProfile SpeedProfile::uniform(int n) {
  if (n < 1) throw ConfigError("speed profile needs at least one node");
  return from_rationals(std::vector<Ratio>(n, Ratio(1)));
}

SpeedProfile SpeedProfile::from_integers(std::span<const std::int64_t> raw) {
  std::vector<Ratio> r;
  r.reserve(raw.size());
  for (auto v : raw) r.emplace_back(v);
  return from_rationals(std::move(r));
}

SpeedProfile parse_speed_list(std::string_view text) {
  std::vector<Ratio> values;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto start = text.find_first_not_of(" \t,\r\n", pos);
    if (start == std::string_view::npos) break;
    auto end = text.find_first_of(" \t,\r\n", start);
    if (end == std::string_view::npos) end = text.size();
    values.push_back(parse_rational(text.substr(start, end - start)));
    pos = end;
  }
  return SpeedProfile::from_rationals(std::move(values));
}

SpeedProfile random_integer_speeds(int n, std::int64_t max_speed, std::uint64_t seed) {
  if (n < 1) throw ConfigError("speed profile needs at least one node");
  if (max_speed < 1) throw ConfigError("random speeds need max >= 1");
  CounterRng rng(seed, 0);
  auto stream = rng.stream(0, 0, 0);
  std::vector<std::int64_t> values(n);
  for (auto& v : values) v = 1 + static_cast<std::int64_t>(to_bounded(stream(), max_speed));
  return SpeedProfile::from_integers(values);
}

SpeedProfile cyclic_speed_pattern(int n, std::span<const std::int64_t> pattern) {
  if (pattern.empty()) throw ConfigError("speed pattern is empty");
  std::vector<std::int64_t> values(n);
  for (int i = 0; i < n; ++i) values[i] = pattern[i % pattern.size()];
  return SpeedProfile::from_integers(values);
}

}  // namespace slb
