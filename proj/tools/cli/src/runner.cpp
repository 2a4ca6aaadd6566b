#include "coop/cli/runner.hpp"

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <unistd.h>
#include <variant>

#include "coop/dynamics.hpp"
#include "coop/format.hpp"
#include "coop/log.hpp"
#include "coop/lyapunov.hpp"
#include "coop/regimes.hpp"

#ifndef COOP_VERSION
#define COOP_VERSION "unknown"
#endif

namespace coop::cli {

using Json = nlohmann::ordered_json;

namespace {

using Cell = std::variant<std::nullptr_t, double, std::uint64_t, bool, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

std::string cell_text(const Cell& c) {
  struct {
    std::string operator()(std::nullptr_t) const { return ""; }
    std::string operator()(double x) const { return format_real(x); }
    std::string operator()(std::uint64_t x) const { return std::to_string(x); }
    std::string operator()(bool x) const { return x ? "true" : "false"; }
    std::string operator()(const std::string& x) const { return x; }
  } visitor;
  return std::visit(visitor, c);
}

Json cell_json(const Cell& c) {
  return std::visit(
      [](const auto& x) -> Json {
        if constexpr (std::is_same_v<std::decay_t<decltype(x)>, double>) {
          if (!std::isfinite(x)) return nullptr;
        }
        return Json(x);
      },
      c);
}

std::string render_csv(const Table& t) {
  std::string out;
  for (std::size_t i = 0; i < t.columns.size(); ++i) out += (i ? "," : "") + t.columns[i];
  out += '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + cell_text(row[i]);
    out += '\n';
  }
  return out;
}

Json table_json(const Table& t) {
  Json rows = Json::array();
  for (const auto& row : t.rows) {
    Json r = Json::object();
    for (std::size_t i = 0; i < row.size(); ++i) r[t.columns[i]] = cell_json(row[i]);
    rows.push_back(std::move(r));
  }
  return rows;
}

Cell optional_cell(const std::optional<double>& x) {
  return x ? Cell{*x} : Cell{nullptr};
}

Table periodic_table(const PeriodicLambda& p) {
  Table t{{"lambda_hat", "method", "period", "step", "iterations"}, {}};
  std::vector<Cell> row{p.estimate.value, std::string(to_string(p.estimate.method)),
                        p.estimate.horizon, p.estimate.step,
                        static_cast<std::uint64_t>(p.iterations)};
  for (std::size_t i = 0; i < p.direction.dim(); ++i) {
    t.columns.push_back("theta_" + std::to_string(i + 1));
    row.emplace_back(p.direction[i]);
  }
  t.rows.push_back(std::move(row));
  return t;
}

ConcentrationOptions concentration_options(const ExperimentConfig& c) {
  ConcentrationOptions o;
  o.mode = c.numerics.concentration_mode;
  o.threshold = c.numerics.concentration_threshold;
  o.burn_in = c.numerics.burn_in;
  return o;
}

Table compute(const ExperimentConfig& c) {
  const EnvironmentSpec& env = c.environment;
  const Seed seed{c.seed};
  const auto& n = c.numerics;
  switch (c.command) {
    case Command::Estimate: {
      const double burn = n.burn_in ? *n.burn_in : default_burn_in(*n.horizon);
      const LambdaEstimate e = estimate_lambda(env, seed, n.method, *n.horizon, *n.step, burn);
      return {{"lambda_hat", "method", "horizon", "step", "burn_in", "half_split_gap", "seed",
               "max_simplex_defect"},
              {{e.value, std::string(to_string(e.method)), e.horizon, e.step, e.burn_in,
                e.half_split_gap, c.seed, e.max_simplex_defect}}};
    }
    case Command::PeriodicExact:
      return periodic_table(lambda_periodic_exact(env, *n.step));
    case Command::Floquet:
      return periodic_table(lambda_floquet(env, *n.step));
    case Command::Bounds: {
      const CorollaryBounds b = corollary_bounds(env);
      return {{"column_sum_lower", "column_sum_upper", "symmetric_lower", "symmetric_upper",
               "quadrature_converged"},
              {{b.column_sum.lower, b.column_sum.upper, b.symmetric_part.lower,
                b.symmetric_part.upper, b.quadrature_converged}}};
    }
    case Command::Sweep: {
      const auto grid = log_spaced_grid(c.sweep->T_min, c.sweep->T_max, c.sweep->points_per_decade);
      SweepOptions opts;
      opts.concentration = concentration_options(c);
      opts.concentration.burn_in.reset();
      opts.threads = c.sweep->threads;
      const RegimeSweepResult r = sweep_lambda(env, grid, seed, *n.horizon, *n.step, opts);
      if (!r.slow_hypothesis_holds) {
        warn("A(s) is reducible somewhere on the support; slow_limit is the integrated "
             "spectral abscissa without the irreducibility hypothesis");
      }
      Table t{{"T", "lambda_hat", "half_split_gap", "fast_limit", "slow_limit", "concentration",
               "seed", "horizon", "step"},
              {}};
      for (std::size_t i = 0; i < grid.size(); ++i) {
        const auto& e = r.lambda_hats[i];
        t.rows.push_back({grid[i], e.value, e.half_split_gap, r.fast_limit, r.slow_limit,
                          r.concentration[i], e.seed->value, e.horizon, e.step});
      }
      return t;
    }
    case Command::Contraction: {
      const ContractionDiagnostics d = contraction_diagnostics(env, seed, *n.horizon, *n.step);
      return {{"first_positive_time", "empirical_rate", "fitted_samples", "horizon", "step"},
              {{optional_cell(d.first_positive_time), optional_cell(d.empirical_rate),
                static_cast<std::uint64_t>(d.fitted_samples), *n.horizon, *n.step}}};
    }
    case Command::Concentration: {
      const auto opts = concentration_options(c);
      const double T = env.timescale();
      const bool slow = opts.mode == ConcentrationMode::Slow ||
                        (opts.mode == ConcentrationMode::Auto && T > opts.threshold);
      const double d = occupation_concentration(env, T, seed, *n.horizon, *n.step, opts);
      return {{"T", "concentration", "mode", "horizon", "step", "seed"},
              {{T, d, std::string(slow ? "slow" : "fast"), *n.horizon, *n.step, c.seed}}};
    }
  }
  throw Error(ErrorKind::Internal, "unhandled command");
}

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_atomically(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  const fs::path tmp = target.string() + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot open " + tmp.string() + " for writing");
    out << content;
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw Error(ErrorKind::Io, "write to " + tmp.string() + " failed");
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorKind::Io, "cannot move result into " + path + ": " + ec.message());
  }
}

std::string render(const ExperimentConfig& c, const Table& t, const std::string& started,
                   double seconds) {
  if (c.output.format == OutputFormat::Csv) {
    std::ostringstream out;
    out << "# tool: cooplyap\n"
        << "# version: " << COOP_VERSION << '\n'
        << "# command: " << to_string(c.command) << '\n'
        << "# seed: " << c.seed << '\n'
        << "# config: " << to_json_text(c) << '\n'
        << "# started_utc: " << started << '\n'
        << "# wall_clock_seconds: " << format_real(seconds) << '\n';
    out << render_csv(t);
    return out.str();
  }
  Json doc = Json::object();
  doc["metadata"] = Json{{"tool", "cooplyap"},
                         {"version", COOP_VERSION},
                         {"command", std::string(to_string(c.command))},
                         {"seed", c.seed},
                         {"config", Json::parse(to_json_text(c))},
                         {"started_utc", started},
                         {"wall_clock_seconds", seconds}};
  doc["result"] = table_json(t);
  return doc.dump(2) + "\n";
}

}  // namespace

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidMatrix:
    case ErrorKind::NotMetzler:
    case ErrorKind::Domain:
    case ErrorKind::Parameter:
    case ErrorKind::Config: return 2;
    case ErrorKind::Reducible:
    case ErrorKind::AssumptionViolation: return 3;
    case ErrorKind::IterationLimit:
    case ErrorKind::ContractionFailure:
    case ErrorKind::NumericalBlowup: return 4;
    case ErrorKind::Io: return 5;
    case ErrorKind::Internal: return 1;
  }
  return 1;
}

std::string error_record(ErrorKind kind, std::string_view message) {
  Json j = Json::object();
  j["error"] = Json{{"kind", std::string(to_string(kind))},
                    {"exit_code", exit_code_for(kind)},
                    {"message", std::string(message)}};
  return j.dump();
}

std::string render_payload(const ExperimentConfig& config) {
  const Table t = compute(config);
  return config.output.format == OutputFormat::Csv ? render_csv(t) : table_json(t).dump(2) + "\n";
}

int run_experiment(const ExperimentConfig& config, std::ostream& fallback, std::ostream& err) {
  try {
    const std::string started = utc_now();
    const auto t0 = std::chrono::steady_clock::now();
    const Table table = compute(config);
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const std::string text = render(config, table, started, seconds);

    if (config.command == Command::Estimate && !config.output.trajectory_path.empty()) {
      const double h = *config.numerics.horizon;
      IntegrationOptions opts;
      opts.thinning = config.output.trajectory_thinning;
      const TrajectoryRecord rec =
          integrate(config.environment, Seed{config.seed},
                    SimplexPoint::barycenter(config.environment.dim()), h, *config.numerics.step,
                    opts);
      std::ostringstream csv;
      write_trajectory_csv(csv, rec);
      write_atomically(config.output.trajectory_path, csv.str());
    }

    if (config.output.path.empty()) {
      fallback << text;
      fallback.flush();
      if (!fallback) throw Error(ErrorKind::Io, "cannot write to standard output");
    } else {
      write_atomically(config.output.path, text);
    }
    return 0;
  } catch (const Error& e) {
    err << error_record(e.kind(), e.what()) << '\n';
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    err << error_record(ErrorKind::Internal, e.what()) << '\n';
    return 1;
  }
}

std::string strip_metadata(const std::string& text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    const Json doc = Json::parse(text);
    return doc.contains("result") ? doc["result"].dump(2) + "\n" : doc.dump(2) + "\n";
  }
  std::istringstream in(text);
  std::string line, out;
  while (std::getline(in, line))
    if (line.rfind("# ", 0) != 0 && line != "#") out += line + '\n';
  return out;
}

}  // namespace coop::cli
