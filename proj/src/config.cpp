#include "slb/config.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <fmt/format.h>

#include "slb/error.hpp"

namespace slb {

std::string_view to_string(SpeedMode m) {
  switch (m) {
    case SpeedMode::uniform: return "uniform";
    case SpeedMode::explicit_list: return "explicit";
    case SpeedMode::random_integers: return "random-integers";
  }
  throw InternalError("unknown speed mode");
}

std::string_view to_string(TaskSource m) {
  switch (m) {
    case TaskSource::uniform_count: return "uniform-count";
    case TaskSource::weighted_random: return "weighted-random";
    case TaskSource::explicit_state: return "explicit";
  }
  throw InternalError("unknown task mode");
}

namespace {

std::string_view trim(std::string_view s) {
  auto a = s.find_first_not_of(" \t\r");
  if (a == std::string_view::npos) return {};
  auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string_view> split_list(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    auto pos = s.find(',', start);
    auto part = trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos
                                                                   : pos - start));
    if (!part.empty()) out.push_back(part);
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <class T>
T parse_integer(std::string_view v) {
  T value{};
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), value);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError(fmt::format("'{}' is not a valid integer", v));
  }
  return value;
}

double parse_real(std::string_view v) {
  double value = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), value);
  if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(value)) {
    throw ConfigError(fmt::format("'{}' is not a finite number", v));
  }
  return value;
}

bool parse_bool(std::string_view v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(fmt::format("'{}' is not a boolean (true/false)", v));
}

SpeedMode parse_speed_mode(std::string_view v) {
  if (v == "uniform") return SpeedMode::uniform;
  if (v == "explicit") return SpeedMode::explicit_list;
  if (v == "random-integers") return SpeedMode::random_integers;
  throw ConfigError(fmt::format("unknown speed mode '{}' (uniform, explicit, random-integers)", v));
}

TaskSource parse_task_source(std::string_view v) {
  if (v == "uniform-count") return TaskSource::uniform_count;
  if (v == "weighted-random") return TaskSource::weighted_random;
  if (v == "explicit") return TaskSource::explicit_state;
  throw ConfigError(
      fmt::format("unknown task mode '{}' (uniform-count, weighted-random, explicit)", v));
}

using Setter = std::function<void(ExperimentConfig&, std::string_view)>;

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = {
      {"graph.family", [](auto& c, auto v) { c.family = parse_graph_family(v); }},
      {"graph.size",
       [](auto& c, auto v) {
         c.size.clear();
         for (auto part : split_list(v)) c.size.push_back(parse_integer<int>(part));
       }},
      {"graph.edge_list", [](auto& c, auto v) { c.edge_list = std::string(v); }},
      {"speeds.mode", [](auto& c, auto v) { c.speed_mode = parse_speed_mode(v); }},
      {"speeds.values",
       [](auto& c, auto v) {
         c.speed_values.clear();
         for (auto part : split_list(v)) {
           c.speed_values.push_back(format_rational(parse_rational(part)));
         }
       }},
      {"speeds.max", [](auto& c, auto v) { c.speed_max = parse_integer<std::int64_t>(v); }},
      {"speeds.seed", [](auto& c, auto v) { c.speed_seed = parse_integer<std::uint64_t>(v); }},
      {"tasks.mode", [](auto& c, auto v) { c.task_source = parse_task_source(v); }},
      {"tasks.count", [](auto& c, auto v) { c.task_count = parse_integer<std::int64_t>(v); }},
      {"tasks.placement",
       [](auto& c, auto v) {
         auto kind = parse_init_kind(v);
         if (kind != InitKind::all_on_one_node && kind != InitKind::uniform_random &&
             kind != InitKind::proportional) {
           throw ConfigError(fmt::format(
               "'{}' is not a placement (all-on-one-node, uniform-random, proportional)", v));
         }
         c.placement = kind;
       }},
      {"tasks.node", [](auto& c, auto v) { c.task_node = parse_integer<int>(v); }},
      {"tasks.seed", [](auto& c, auto v) { c.task_seed = parse_integer<std::uint64_t>(v); }},
      {"tasks.state",
       [](auto& c, auto v) {
         c.task_state = format_state(parse_state(v));
       }},
      {"protocol.variant", [](auto& c, auto v) { c.variant = parse_variant(v); }},
      {"protocol.alpha", [](auto& c, auto v) { c.alpha = parse_real(v); }},
      {"protocol.approx_eps", [](auto& c, auto v) { c.approx_eps = parse_real(v); }},
      {"protocol.delta", [](auto& c, auto v) { c.delta = parse_real(v); }},
      {"protocol.sampler", [](auto& c, auto v) { c.sampler = parse_sampler(v); }},
      {"protocol.printed_weighted_rule",
       [](auto& c, auto v) { c.printed_weighted_rule = parse_bool(v); }},
      {"protocol.psi_constant", [](auto& c, auto v) { c.psi_constant = parse_real(v); }},
      {"run.trials", [](auto& c, auto v) { c.trials = parse_integer<std::int64_t>(v); }},
      {"run.round_cap", [](auto& c, auto v) { c.round_cap = parse_integer<std::int64_t>(v); }},
      {"run.stop", [](auto& c, auto v) { c.stop = parse_stop(v); }},
      {"run.master_seed",
       [](auto& c, auto v) { c.master_seed = parse_integer<std::uint64_t>(v); }},
      {"output.directory", [](auto& c, auto v) { c.directory = std::string(v); }},
      {"output.trace", [](auto& c, auto v) { c.trace = parse_bool(v); }},
  };
  return table;
}

std::string join_ints(const std::vector<int>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
  return out;
}

}  // namespace

ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig c;
  std::map<std::string, int, std::less<>> seen;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto text = trim(line);
    if (text.empty() || text.front() == '#') continue;
    auto eq = text.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(fmt::format("line {}: expected 'key = value', got '{}'", line_no, text));
    }
    auto key = trim(text.substr(0, eq));
    auto value = trim(text.substr(eq + 1));
    auto it = setters().find(key);
    if (it == setters().end()) {
      throw ConfigError(fmt::format("line {}: unknown key '{}'", line_no, key));
    }
    if (auto prev = seen.find(key); prev != seen.end()) {
      throw ConfigError(fmt::format("line {}: key '{}' already set on line {}", line_no, key,
                                    prev->second));
    }
    seen.emplace(std::string(key), line_no);
    try {
      it->second(c, value);
    } catch (const ConfigError& e) {
      throw ConfigError(fmt::format("line {}: {}: {}", line_no, key, e.what()));
    }
  }
  return c;
}

ExperimentConfig parse_config_text(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_config(in);
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open config file '{}'", path));
  try {
    return parse_config(in);
  } catch (const ConfigError& e) {
    throw ConfigError(fmt::format("{}: {}", path, e.what()));
  }
}

std::string serialize_config(const ExperimentConfig& c) {
  std::string out;
  auto put = [&](std::string_view key, const std::string& value) {
    out += fmt::format("{} = {}\n", key, value);
  };
  auto real = [](double v) { return fmt::format("{:.17g}", v); };

  put("graph.family", std::string(to_string(c.family)));
  if (!c.size.empty()) put("graph.size", join_ints(c.size));
  if (!c.edge_list.empty()) put("graph.edge_list", c.edge_list);

  put("speeds.mode", std::string(to_string(c.speed_mode)));
  if (!c.speed_values.empty()) {
    std::string joined;
    for (std::size_t i = 0; i < c.speed_values.size(); ++i) {
      joined += (i ? "," : "") + c.speed_values[i];
    }
    put("speeds.values", joined);
  }
  put("speeds.max", std::to_string(c.speed_max));
  put("speeds.seed", std::to_string(c.speed_seed));

  put("tasks.mode", std::string(to_string(c.task_source)));
  put("tasks.count", std::to_string(c.task_count));
  put("tasks.placement", std::string(to_string(c.placement)));
  put("tasks.node", std::to_string(c.task_node));
  if (c.task_seed) put("tasks.seed", std::to_string(*c.task_seed));
  if (!c.task_state.empty()) put("tasks.state", c.task_state);

  put("protocol.variant", std::string(to_string(c.variant)));
  if (c.alpha) put("protocol.alpha", real(*c.alpha));
  put("protocol.approx_eps", real(c.approx_eps));
  if (c.delta) put("protocol.delta", real(*c.delta));
  put("protocol.sampler", std::string(to_string(c.sampler)));
  put("protocol.printed_weighted_rule", c.printed_weighted_rule ? "true" : "false");
  put("protocol.psi_constant", real(c.psi_constant));

  put("run.trials", std::to_string(c.trials));
  put("run.round_cap", std::to_string(c.round_cap));
  put("run.stop", to_string(c.stop));
  put("run.master_seed", std::to_string(c.master_seed));

  put("output.directory", c.directory);
  put("output.trace", c.trace ? "true" : "false");
  return out;
}

void validate_config(const ExperimentConfig& c) {
  if (c.family == GraphFamily::explicit_edges) {
    if (c.edge_list.empty()) throw ConfigError("graph.edge_list is required for graph.family = explicit");
  } else if (c.size.empty()) {
    throw ConfigError("graph.size is required");
  }
  if (c.speed_mode == SpeedMode::explicit_list && c.speed_values.empty()) {
    throw ConfigError("speeds.values is required for speeds.mode = explicit");
  }
  if (c.speed_mode == SpeedMode::random_integers && c.speed_max < 1) {
    throw ConfigError("speeds.max must be at least 1");
  }
  if (c.task_source == TaskSource::explicit_state) {
    if (c.task_state.empty()) throw ConfigError("tasks.state is required for tasks.mode = explicit");
  } else if (c.task_count < 0) {
    throw ConfigError("tasks.count must be non-negative");
  }
  if (c.task_source == TaskSource::uniform_count && c.task_node < 0 &&
      c.placement == InitKind::all_on_one_node) {
    throw ConfigError("tasks.node must be a node index for all-on-one-node");
  }
  if (!(c.approx_eps > 0 && c.approx_eps < 1)) {
    throw ConfigError(fmt::format("protocol.approx_eps = {} is not in (0, 1)", c.approx_eps));
  }
  if (c.delta && !(*c.delta > 0)) throw ConfigError("protocol.delta must be positive");
  if (c.psi_constant != 8 && c.psi_constant != 16) {
    throw ConfigError("protocol.psi_constant must be 8 or 16");
  }
  const bool weighted_tasks =
      c.task_source == TaskSource::weighted_random ||
      (c.task_source == TaskSource::explicit_state && c.task_state.starts_with("weighted:"));
  if (weighted_tasks && c.variant != Variant::algorithm2) {
    throw ConfigError("protocol.variant must be algorithm2 for weighted tasks");
  }
  if (!weighted_tasks && c.variant != Variant::algorithm1) {
    throw ConfigError("protocol.variant must be algorithm1 for uniform tasks");
  }
  if (c.trials < 1) throw ConfigError("run.trials must be at least 1");
  if (c.round_cap < 1) throw ConfigError("run.round_cap must be at least 1");
  if (c.directory.empty()) throw ConfigError("output.directory must not be empty");
}

GraphTopology build_graph(const ExperimentConfig& c, const std::string& base_dir) {
  if (c.family == GraphFamily::explicit_edges) {
    std::filesystem::path p(c.edge_list);
    if (p.is_relative() && !base_dir.empty()) p = std::filesystem::path(base_dir) / p;
    return read_edge_list_file(p.string());
  }
  return make_graph(c.family, c.size);
}

SpeedProfile build_speeds(const ExperimentConfig& c, int n) {
  switch (c.speed_mode) {
    case SpeedMode::uniform: return SpeedProfile::uniform(n);
    case SpeedMode::random_integers: return random_integer_speeds(n, c.speed_max, c.speed_seed);
    case SpeedMode::explicit_list: {
      if (static_cast<int>(c.speed_values.size()) != n) {
        throw ConfigError(fmt::format("speeds.values has {} entries but the graph has {} nodes",
                                      c.speed_values.size(), n));
      }
      std::vector<Ratio> values;
      for (const auto& s : c.speed_values) values.push_back(parse_rational(s));
      return SpeedProfile::from_rationals(std::move(values));
    }
  }
  throw InternalError("unknown speed mode");
}

ProtocolParams build_params(const ExperimentConfig& c, const SpeedProfile& sp) {
  ProtocolParams p = c.stop.kind == StopKind::exact_ne && c.variant == Variant::algorithm1
                         ? ProtocolParams::exact_equilibrium(sp)
                         : ProtocolParams::standard(sp);
  if (c.alpha) p.alpha = *c.alpha;
  p.variant = c.variant;
  p.sampler = c.sampler;
  p.printed_weighted_rule = c.printed_weighted_rule;
  p.rng_seed = c.master_seed;
  validate(p, sp);
  return p;
}

InitSpec build_init(const ExperimentConfig& c) {
  InitSpec spec;
  spec.count = c.task_count;
  spec.node = c.task_node;
  spec.seed = c.task_seed;
  switch (c.task_source) {
    case TaskSource::uniform_count: spec.kind = c.placement; break;
    case TaskSource::weighted_random: spec.kind = InitKind::weighted_random; break;
    case TaskSource::explicit_state:
      spec.kind = InitKind::fixed;
      spec.state = parse_state(c.task_state);
      break;
  }
  return spec;
}

}  // namespace slb
