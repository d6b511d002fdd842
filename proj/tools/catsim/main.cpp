#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "acceptance.hpp"
#include "cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"catsim: spin-motion cat interferometry simulator"};
  app.require_subcommand(1);

  std::string config;
  std::string output_dir;
  auto* run = app.add_subcommand("run", "Run the experiment described by a JSON config");
  run->add_option("config", config, "Path to the run config")->required()->check(CLI::ExistingFile);
  run->add_option("-o,--output-dir", output_dir, "Directory for relative output paths (default: the config's)");

  std::string report;
  double tolerance_scale = 1.0;
  std::vector<int> only;
  auto* accept = app.add_subcommand("accept", "Run the acceptance criteria");
  accept->add_option("--report", report, "Write the full report with measured values to this file");
  accept->add_option("--tolerance-scale", tolerance_scale, "Multiply every tolerance by this factor")
      ->check(CLI::PositiveNumber);
  accept->add_option("--only", only, "Run only these criterion ids")->check(CLI::Range(1, 12));

  app.add_subcommand("version", "Print the version");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : catsim::cli::exit_config;
  }

  if (*run) {
    catsim::cli::RunOptions opts;
    opts.output_dir = output_dir;
    return catsim::cli::run_config_file(config, opts, std::cerr);
  }
  if (*accept) {
    catsim::acceptance::Options opts;
    opts.tolerance_scale = tolerance_scale;
    opts.only = only;
    const auto results = catsim::acceptance::run(opts);
    catsim::acceptance::print_summary(std::cout, results);
    if (!report.empty()) {
      std::ofstream os(report);
      if (!os) {
        std::cerr << "catsim: cannot write " << report << '\n';
        return catsim::cli::exit_config;
      }
      catsim::acceptance::print_report(os, results);
    }
    return catsim::acceptance::all_passed(results) ? 0 : 1;
  }
  std::cout << "catsim " << catsim::cli::version() << '\n';
  return 0;
}
