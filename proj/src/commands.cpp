#include "slb/commands.hpp"

#include <filesystem>
#include <fstream>

#include <fmt/format.h>
#include <json.hpp>

#include "slb/error.hpp"
#include "slb/potentials.hpp"
#include "slb/spectral.hpp"

namespace slb {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

int run_guarded(const std::function<int()>& body, std::ostream& err) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << " (residual " << fmt::format("{:.3e}", e.residual())
        << ")\n";
    return kExitInternalError;
  } catch (const InternalError& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternalError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInternalError;
  }
}

namespace {

Json stats_json(const HittingStats& s) {
  Json j;
  j["count"] = s.count;
  if (s.count == 0) {
    for (const char* k : {"min", "q1", "median", "mean", "q3", "max"}) j[k] = nullptr;
    return j;
  }
  j["min"] = s.min;
  j["q1"] = s.q1;
  j["median"] = s.median;
  j["mean"] = s.mean;
  j["q3"] = s.q3;
  j["max"] = s.max;
  return j;
}

Json optional_json(const std::optional<std::int64_t>& v) {
  return v ? Json(*v) : Json(nullptr);
}

Json spectral_json(const SpectralSummary& s) {
  Json j;
  j["lambda1"] = s.lambda1;
  j["lambda2"] = s.lambda2;
  j["mu2"] = s.mu2;
  j["bounds"] = Json::array();
  for (const auto& b : s.bound_report) {
    j["bounds"].push_back({{"name", b.name}, {"lhs", b.lhs}, {"rhs", b.rhs}, {"holds", b.holds}});
  }
  return j;
}

Json config_json(const ExperimentConfig& c) {
  Json j = Json::object();
  const auto text = serialize_config(c);
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    auto line = text.substr(start, end - start);
    auto eq = line.find(" = ");
    j[line.substr(0, eq)] = line.substr(eq + 3);
    start = end + 1;
  }
  return j;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

}  // namespace

int cmd_run(const ExperimentConfig& config, const std::string& base_dir, std::ostream& out) {
  validate_config(config);
  const auto g = build_graph(config, base_dir);
  const auto sp = build_speeds(config, g.node_count());
  const auto params = build_params(config, sp);
  const auto init = build_init(config);
  if (init.kind == InitKind::fixed) validate(params, sp, *init.state);

  const auto spectral = spectral_summary(g, sp);
  const double psi_c = critical_value(g, sp, spectral.lambda2, config.psi_constant);
  const double gamma = gamma_factor(g, sp, spectral.lambda2);

  TrialSettings settings;
  settings.psi_critical = psi_c;
  settings.approx_eps = config.approx_eps;
  if (config.delta) settings.implication_eps = 2 / (1 + *config.delta);
  settings.record_trace = config.trace;

  const fs::path dir(config.directory);
  fs::create_directories(dir);

  auto write_trace = [&](TrialResult& r) {
    if (!config.trace) return;
    std::ofstream f(dir / fmt::format("trace_{}.csv", r.trial_id), std::ios::binary);
    f << kTraceCsvHeader << '\n';
    for (const auto& row : r.trace) f << trace_csv_row(row) << '\n';
    if (!f) throw InternalError(fmt::format("failed to write trace for trial {}", r.trial_id));
    r.trace.clear();
    r.trace.shrink_to_fit();
  };
  const auto summary = measure_convergence(g, sp, init, params, config.stop, config.trials,
                                           config.round_cap, settings, write_trace);

  Json j;
  j["config"] = config_json(config);
  j["graph"] = {{"family", std::string(to_string(config.family))},
                {"nodes", g.node_count()},
                {"edges", g.edge_count()},
                {"max_degree", g.max_degree()},
                {"min_degree", g.min_degree()},
                {"diameter", g.diameter()}};
  Json speeds = Json::array();
  for (int i = 0; i < sp.size(); ++i) speeds.push_back(format_rational(sp.exact(i)));
  j["speeds"] = {{"normalized", speeds},
                 {"s_max", sp.s_max()},
                 {"granularity", format_rational(sp.granularity().epsilon)}};
  j["spectral"] = spectral_json(spectral);
  j["alpha"] = params.alpha;
  j["psi_critical"] = psi_c;
  j["psi_threshold"] = 4 * psi_c;
  j["gamma"] = gamma;
  j["stop"] = to_string(config.stop);
  j["hitting_times"] = {{"psi_threshold", stats_json(summary.psi_threshold)},
                        {"approx_ne", stats_json(summary.approx_ne)},
                        {"exact_ne", stats_json(summary.exact_ne)}};
  j["truncated_fraction"] = summary.truncated_fraction;
  if (config.delta) {
    j["approx_ne_at_threshold"] = {{"eps", settings.implication_eps},
                                   {"checked", summary.implication_checked},
                                   {"failures", summary.implication_failures}};
  }
  Json trials = Json::array();
  for (const auto& r : summary.results) {
    Json t;
    t["trial"] = r.trial_id;
    t["seed"] = r.seed;
    t["rounds_to_psi_threshold"] = optional_json(r.rounds_to_psi_threshold);
    t["rounds_to_approx_ne"] = optional_json(r.rounds_to_approx_ne);
    t["rounds_to_exact_ne"] = optional_json(r.rounds_to_exact_ne);
    t["rounds_run"] = r.rounds_run;
    t["truncated"] = r.truncated;
    t["final"] = {{"phi0", r.final_snapshot.phi0},
                  {"phi1", r.final_snapshot.phi1},
                  {"psi0", r.final_snapshot.psi0},
                  {"psi1", r.final_snapshot.psi1},
                  {"l_delta", r.final_snapshot.l_delta}};
    trials.push_back(std::move(t));
  }
  j["trials"] = std::move(trials);

  {
    std::ofstream f(dir / "summary.json", std::ios::binary);
    f << j.dump(2) << '\n';
    if (!f) throw InternalError("failed to write summary.json");
  }

  const auto& target = summary.for_stop(config.stop);
  out << fmt::format("trials {}  stop {}  median rounds {}  truncated {:.3f}\n", config.trials,
                     to_string(config.stop), target.count ? fmt::format("{}", target.median) : "-",
                     summary.truncated_fraction);
  out << fmt::format("wrote {}\n", (dir / "summary.json").string());
  return kExitOk;
}

int cmd_run_file(const std::string& config_path, std::ostream& out) {
  auto config = load_config_file(config_path);
  return cmd_run(config, fs::path(config_path).parent_path().string(), out);
}

int cmd_spectra(const SpectraArgs& args, std::ostream& out) {
  GraphTopology g = args.family == GraphFamily::explicit_edges
                        ? read_edge_list_file(args.edge_list)
                        : make_graph(args.family, args.size);
  SpeedProfile sp = SpeedProfile::uniform(g.node_count());
  if (args.random_max) {
    sp = random_integer_speeds(g.node_count(), *args.random_max, args.speed_seed);
  } else if (!args.speeds.empty()) {
    sp = parse_speed_list(args.speeds);
    if (sp.size() != g.node_count()) {
      throw ConfigError(fmt::format("{} speeds given for {} nodes", sp.size(), g.node_count()));
    }
  }
  const auto s = spectral_summary(g, sp);
  out << fmt::format("nodes {}  edges {}  max degree {}  diameter {}\n", g.node_count(),
                     g.edge_count(), g.max_degree(), g.diameter());
  out << fmt::format("lambda2 {:.12g}\n", s.lambda2);
  out << fmt::format("mu2 {:.12g}\n", s.mu2);
  out << fmt::format("psi_c {:.12g}\n", critical_value(g, sp, s.lambda2, args.psi_constant));
  out << fmt::format("gamma {:.12g}\n", gamma_factor(g, sp, s.lambda2));
  for (const auto& b : s.bound_report) {
    out << fmt::format("{:<20} {:>16.10g} <= {:<16.10g} {}\n", b.name, b.lhs, b.rhs,
                       b.holds ? "pass" : "FAIL");
  }
  return s.all_hold() ? kExitOk : kExitVerificationFailed;
}

int cmd_verify(const VerifyArgs& args, std::ostream& out) {
  SuiteOptions options;
  options.alpha = args.alpha;
  const auto corpus = build_corpus(args.corpus);
  const auto report = verify_lemma_suite(corpus, options);

  {
    std::ofstream f(args.report_path, std::ios::binary);
    if (!f) throw ConfigError(fmt::format("cannot write report '{}'", args.report_path));
    f << kVerifyCsvHeader << '\n';
    for (const auto& c : report.checks) {
      const char* rel = c.relation == Relation::ge ? ">=" : c.relation == Relation::le ? "<=" : "==";
      f << fmt::format("{},{},{},{:.17g},{:.17g},{:.17g},{}\n", csv_field(c.lemma),
                       csv_field(c.instance), rel, c.lhs, c.rhs, c.margin,
                       c.holds ? "true" : "false");
    }
  }

  for (const auto& name : report.lemma_names()) {
    std::int64_t total = 0, failed = 0;
    for (const auto& c : report.checks) {
      if (c.lemma != name) continue;
      ++total;
      if (!c.holds) ++failed;
    }
    out << fmt::format("{:<40} {:>5} checks  {}\n", name, total,
                       failed ? fmt::format("{} FAILED", failed) : std::string("ok"));
  }
  out << fmt::format("{} instances, {} checks, {} violations; report {}\n", corpus.size(),
                     report.checks.size(), report.violations(), args.report_path);

  if (report.all_hold()) return kExitOk;
  std::ofstream f(args.report_path + ".counterexamples", std::ios::binary);
  for (const auto& c : report.checks) {
    if (c.holds) continue;
    f << fmt::format("{}\t{}\tlhs={:.17g}\trhs={:.17g}\t{}\n", c.lemma, c.instance, c.lhs, c.rhs,
                     c.state);
  }
  return kExitVerificationFailed;
}

}  // namespace slb
