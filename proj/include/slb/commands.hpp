#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "slb/analysis.hpp"
#include "slb/config.hpp"

namespace slb {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitVerificationFailed = 1;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitInternalError = 3;

// Runs `body` and maps exceptions to exit codes (ConfigError -> 2,
// NumericalError / InternalError / anything else -> 3), printing the message
// to `err`.
int run_guarded(const std::function<int()>& body, std::ostream& err);

// Writes trace_<trial>.csv (when enabled) and summary.json into
// config.directory. Truncation is reported in the summary, not as failure.
int cmd_run(const ExperimentConfig& config, const std::string& base_dir, std::ostream& out);
int cmd_run_file(const std::string& config_path, std::ostream& out);

struct SpectraArgs {
  GraphFamily family = GraphFamily::complete;
  std::vector<int> size;
  std::string edge_list;
  std::string speeds;                   // rational list; empty means uniform
  std::optional<std::int64_t> random_max;  // random integer speeds in [1, max]
  std::uint64_t speed_seed = 1;
  double psi_constant = 8;
};

// Prints lambda2, mu2, psi_c, gamma and every bound row. Exit 1 if a row fails.
int cmd_spectra(const SpectraArgs& args, std::ostream& out);

struct VerifyArgs {
  CorpusKind corpus = CorpusKind::standard;
  std::optional<double> alpha;
  std::string report_path = "verify_report.csv";
};

// Writes one CSV row per inequality instance to report_path; on failure also
// writes <report_path>.counterexamples with the serialized states. Exit 1 on
// any violation.
int cmd_verify(const VerifyArgs& args, std::ostream& out);

inline constexpr const char* kVerifyCsvHeader = "lemma,instance,relation,lhs,rhs,margin,holds";

}  // namespace slb
