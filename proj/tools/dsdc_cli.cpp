// Command-line front end: simulate | check | sweep | version.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "dsdc/io.hpp"
#include "dsdc/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Truncated discrete Safronov-Dubovskii coagulation: simulation and bound checks"};
  app.require_subcommand(1);

  std::string out_dir;
  unsigned long long seed = 0;  // reserved: every computation is deterministic
  bool quiet = false;
  app.add_option("--out-dir", out_dir, "Directory for output files (overrides output.dir)");
  app.add_option("--seed", seed, "Reserved; ignored");
  app.add_flag("--quiet,-q", quiet, "Suppress progress messages");

  std::string config;
  auto* simulate = app.add_subcommand("simulate", "Integrate and write the moment CSV");
  simulate->add_option("config", config, "Run configuration file")->required();
  auto* check = app.add_subcommand("check", "Integrate, evaluate the bound checks and write the JSON report");
  check->add_option("config", config, "Run configuration file")->required();
  auto* sweep = app.add_subcommand("sweep", "Run the n-refinement study and write the sweep JSON");
  sweep->add_option("config", config, "Run configuration file")->required();
  auto* version = app.add_subcommand("version", "Print the version");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : dsdc::kExitConfigError;
  }

  if (version->parsed()) {
    std::cout << dsdc::kVersion << '\n';
    return 0;
  }

  dsdc::RunOptions opts;
  if (!out_dir.empty()) opts.out_dir = out_dir;
  opts.quiet = quiet;
  const dsdc::Mode mode = simulate->parsed() ? dsdc::Mode::simulate
                          : check->parsed()  ? dsdc::Mode::check
                                             : dsdc::Mode::sweep;
  return dsdc::run_file(config, mode, opts);
}
