#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "coop/environment.hpp"
#include "coop/lyapunov.hpp"
#include "coop/regimes.hpp"

namespace coop::cli {

enum class Command { Estimate, PeriodicExact, Floquet, Bounds, Sweep, Contraction, Concentration };

std::string_view to_string(Command command);
std::optional<Command> parse_command(std::string_view name);

enum class OutputFormat { Csv, Json };

struct Numerics {
  std::optional<double> horizon;
  std::optional<double> step;
  std::optional<double> burn_in;
  LambdaMethod method = LambdaMethod::ErgodicAverage;
  ConcentrationMode concentration_mode = ConcentrationMode::Auto;
  double concentration_threshold = 1.0;
  bool operator==(const Numerics&) const = default;
};

struct SweepBlock {
  double T_min = 0.0;
  double T_max = 0.0;
  double points_per_decade = 5.0;
  std::size_t threads = 0;
  bool operator==(const SweepBlock&) const = default;
};

struct OutputBlock {
  std::string path;  // empty: standard output
  OutputFormat format = OutputFormat::Csv;
  std::string trajectory_path;  // estimate only; empty: no dump
  std::size_t trajectory_thinning = 1;
  bool operator==(const OutputBlock&) const = default;
};

struct ExperimentConfig {
  EnvironmentSpec environment;
  Command command;
  Numerics numerics;
  std::optional<SweepBlock> sweep;
  std::uint64_t seed = 0;
  OutputBlock output;
  bool operator==(const ExperimentConfig&) const = default;
};

/// Command-line values that replace the corresponding config fields before
/// validation.
struct ConfigOverrides {
  std::optional<Command> command;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> output_path;
};

/// Parses and validates a JSON config document. Errors are coop::Error with
/// kind Config naming the key path ("numerics.step"), or the kind raised by
/// environment validation.
ExperimentConfig parse_config(std::string_view text, const ConfigOverrides& overrides = {});

/// Canonical JSON form; parse_config(to_json_text(c)) == c.
std::string to_json_text(const ExperimentConfig& config);

/// Text for --help: every recognized key.
std::string_view config_reference();

}  // namespace coop::cli
