#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "slb/analysis.hpp"
#include "slb/graph.hpp"
#include "slb/protocol.hpp"
#include "slb/speeds.hpp"

namespace slb {

enum class SpeedMode { uniform, explicit_list, random_integers };
enum class TaskSource { uniform_count, weighted_random, explicit_state };

std::string_view to_string(SpeedMode m);
std::string_view to_string(TaskSource m);

// Flat "section.key = value" experiment description. Lines starting with '#'
// and blank lines are ignored. Unset optional keys are omitted on output.
struct ExperimentConfig {
  // graph
  GraphFamily family = GraphFamily::complete;
  std::vector<int> size;            // see make_graph
  std::string edge_list;            // explicit family

  // speeds
  SpeedMode speed_mode = SpeedMode::uniform;
  std::vector<std::string> speed_values;  // canonical rationals, explicit_list
  std::int64_t speed_max = 2;             // random_integers
  std::uint64_t speed_seed = 1;           // random_integers

  // tasks
  TaskSource task_source = TaskSource::uniform_count;
  std::int64_t task_count = 0;
  InitKind placement = InitKind::all_on_one_node;  // uniform_count
  NodeId task_node = 0;                  // all-on-one-node; weighted-random if >= 0
  std::optional<std::uint64_t> task_seed;  // unset: derived per trial
  std::string task_state;                  // explicit_state, see format_state

  // protocol
  Variant variant = Variant::algorithm1;
  std::optional<double> alpha;        // unset: 4 s_max (4 s_max / eps for exact-ne)
  double approx_eps = 0.5;
  std::optional<double> delta;        // checks is_approx_nash(2/(1+delta)) at threshold
  Sampler sampler = Sampler::per_task;
  bool printed_weighted_rule = false;
  double psi_constant = 8;

  // run
  std::int64_t trials = 1;
  std::int64_t round_cap = 100000;
  StopCondition stop = StopCondition::exact_ne();
  std::uint64_t master_seed = 1;

  // output
  std::string directory = "out";
  bool trace = true;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

// ConfigError messages name the line and the key.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig parse_config_text(std::string_view text);
ExperimentConfig load_config_file(const std::string& path);

// Canonical text form; parse_config_text(serialize_config(c)) == c.
std::string serialize_config(const ExperimentConfig& c);

// Cross-field checks (required keys per mode, ranges). ConfigError.
void validate_config(const ExperimentConfig& c);

// Builders; `base_dir` resolves a relative edge-list path.
GraphTopology build_graph(const ExperimentConfig& c, const std::string& base_dir = "");
SpeedProfile build_speeds(const ExperimentConfig& c, int n);
ProtocolParams build_params(const ExperimentConfig& c, const SpeedProfile& sp);
InitSpec build_init(const ExperimentConfig& c);

}  // namespace slb
