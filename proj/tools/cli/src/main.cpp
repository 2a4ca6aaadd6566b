#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>

#include "coop/cli/config.hpp"
#include "coop/cli/runner.hpp"

int main(int argc, char** argv) {
  using namespace coop::cli;

  CLI::App app{"Top Lyapunov exponents of cooperative linear systems in random environments",
               "cooplyap"};
  app.footer(std::string(config_reference()));

  std::string command;
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> output;
  app.add_option("command", command, "Command to run")
      ->required()
      ->check(CLI::IsMember({"estimate", "periodic-exact", "floquet", "bounds", "sweep",
                             "contraction", "concentration"}));
  app.add_option("--config", config_path, "JSON config file")->required();
  app.add_option("--seed", seed, "Master seed (overrides the config)");
  app.add_option("--output", output, "Result path (overrides output.path; '-' for stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  std::ifstream in(config_path, std::ios::binary);
  if (!in) {
    std::cerr << error_record(coop::ErrorKind::Io, "cannot read config " + config_path) << '\n';
    return exit_code_for(coop::ErrorKind::Io);
  }
  std::ostringstream text;
  text << in.rdbuf();

  ConfigOverrides overrides;
  overrides.command = parse_command(command);
  overrides.seed = seed;
  if (output) overrides.output_path = *output == "-" ? std::string() : *output;

  try {
    const ExperimentConfig config = parse_config(text.str(), overrides);
    return run_experiment(config, std::cout, std::cerr);
  } catch (const coop::Error& e) {
    std::cerr << error_record(e.kind(), e.what()) << '\n';
    return exit_code_for(e.kind());
  }
}
