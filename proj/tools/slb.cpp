#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "slb/commands.hpp"
#include "slb/error.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Selfish load balancing simulator"};
  app.require_subcommand(1);

  std::string config_path;
  auto* run = app.add_subcommand("run", "run the experiment described by a config file");
  run->add_option("config", config_path, "config file (key = value lines)")->required();

  slb::SpectraArgs spectra;
  std::string family = "complete";
  std::string size;
  auto* spec = app.add_subcommand("spectra", "print lambda2, mu2, psi_c, gamma and bound checks");
  spec->add_option("--family", family, "complete|cycle|path|torus2d|grid2d|hypercube|explicit");
  spec->add_option("--size", size, "size parameters, e.g. 8 or 4,4");
  spec->add_option("--edge-list", spectra.edge_list, "edge list file (family explicit)");
  spec->add_option("--speeds", spectra.speeds, "comma separated rational speeds");
  spec->add_option("--random-speeds", spectra.random_max, "random integer speeds in [1, max]");
  spec->add_option("--speed-seed", spectra.speed_seed, "seed for --random-speeds");
  spec->add_option("--psi-constant", spectra.psi_constant, "8 or 16");

  slb::VerifyArgs verify;
  std::string corpus = "standard";
  auto* ver = app.add_subcommand("verify", "check the lemma inequalities on a state corpus");
  ver->add_option("--corpus", corpus, "standard|nash-only");
  ver->add_option("--alpha", verify.alpha, "override alpha for every check");
  ver->add_option("--report", verify.report_path, "CSV report path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return slb::kExitConfigError;
  }

  return slb::run_guarded(
      [&] {
        if (*run) return slb::cmd_run_file(config_path, std::cout);
        if (*spec) {
          spectra.family = slb::parse_graph_family(family);
          std::size_t start = 0;
          while (start < size.size()) {
            auto end = size.find(',', start);
            if (end == std::string::npos) end = size.size();
            try {
              spectra.size.push_back(std::stoi(size.substr(start, end - start)));
            } catch (const std::exception&) {
              throw slb::ConfigError("--size expects comma separated integers");
            }
            start = end + 1;
          }
          return slb::cmd_spectra(spectra, std::cout);
        }
        verify.corpus = slb::parse_corpus_kind(corpus);
        return slb::cmd_verify(verify, std::cout);
      },
      std::cerr);
}
