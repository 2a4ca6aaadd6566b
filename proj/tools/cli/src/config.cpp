#include "coop/cli/config.hpp"

#include <cmath>
#include <json.hpp>
#include <map>
#include <regex>
#include <set>

#include "coop/error.hpp"

namespace coop::cli {

using Json = nlohmann::ordered_json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw Error(ErrorKind::Config, path + ": " + what);
}

// Object reader that remembers which keys were consumed so leftovers can be
// reported as unknown.
class Section {
 public:
  Section(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_, "expected an object");
  }

  std::string key_path(std::string_view key) const {
    return path_.empty() ? std::string(key) : path_ + "." + std::string(key);
  }

  const Json* find(std::string_view key) {
    seen_.insert(std::string(key));
    auto it = j_.find(std::string(key));
    return it == j_.end() ? nullptr : &*it;
  }

  const Json& require(std::string_view key) {
    if (const Json* v = find(key)) return *v;
    fail(key_path(key), "required key is missing");
  }

  std::optional<double> number(std::string_view key) {
    const Json* v = find(key);
    if (!v) return std::nullopt;
    if (!v->is_number()) fail(key_path(key), "expected a number");
    const double x = v->get<double>();
    if (!std::isfinite(x)) fail(key_path(key), "must be finite");
    return x;
  }

  std::optional<std::string> string(std::string_view key) {
    const Json* v = find(key);
    if (!v) return std::nullopt;
    if (!v->is_string()) fail(key_path(key), "expected a string");
    return v->get<std::string>();
  }

  std::optional<std::uint64_t> unsigned_integer(std::string_view key) {
    const Json* v = find(key);
    if (!v) return std::nullopt;
    if (!v->is_number_unsigned()) fail(key_path(key), "expected a nonnegative integer");
    return v->get<std::uint64_t>();
  }

  void reject_unknown() const {
    for (const auto& [k, v] : j_.items())
      if (!seen_.contains(k)) fail(key_path(k), "unknown key");
  }

  const Json& json() const { return j_; }
  const std::string& path() const { return path_; }

 private:
  const Json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

Matrix parse_matrix(const Json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) fail(path, "expected a non-empty array of rows");
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const Json& r = j[i];
    const std::string rp = path + "[" + std::to_string(i) + "]";
    if (!r.is_array() || r.empty()) fail(rp, "expected a non-empty row array");
    if (!rows.empty() && r.size() != rows.front().size()) {
      fail(rp, "row has " + std::to_string(r.size()) + " entries, expected " +
                   std::to_string(rows.front().size()));
    }
    std::vector<double> row;
    for (std::size_t k = 0; k < r.size(); ++k) {
      if (!r[k].is_number()) fail(rp + "[" + std::to_string(k) + "]", "expected a number");
      row.push_back(r[k].get<double>());
    }
    rows.push_back(std::move(row));
  }
  return Matrix::from_rows(rows);
}

Json matrix_json(const Matrix& m) {
  Json rows = Json::array();
  for (const auto& r : m.to_rows()) rows.push_back(r);
  return rows;
}

std::vector<double> parse_reals(const Json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) fail(path + "[" + std::to_string(i) + "]", "expected a number");
    out.push_back(j[i].get<double>());
  }
  return out;
}

// Harmonics labeled C1, D1, C2, ...; missing labels below the highest one
// are zero matrices.
FourierHarmonics parse_harmonics(Section& s, const Matrix& a0) {
  static const std::regex label("([CD])([1-9][0-9]*)");
  std::map<std::size_t, Matrix> cs, ds;
  std::size_t top = 0;
  for (const auto& [key, value] : s.json().items()) {
    std::smatch m;
    if (!std::regex_match(key, m, label)) continue;
    s.find(key);
    const std::size_t k = std::stoul(m[2].str());
    Matrix mat = parse_matrix(value, s.key_path(key));
    if (mat.rows() != a0.rows() || mat.cols() != a0.cols()) {
      fail(s.key_path(key), "must have the same shape as A0");
    }
    (m[1] == "C" ? cs : ds).emplace(k, std::move(mat));
    top = std::max(top, k);
  }
  FourierHarmonics h;
  for (std::size_t k = 1; k <= top; ++k) {
    const Matrix zero(a0.rows(), a0.cols(), 0.0);
    h.cos_terms.push_back(cs.contains(k) ? cs.at(k) : zero);
    h.sin_terms.push_back(ds.contains(k) ? ds.at(k) : zero);
  }
  return h;
}

void harmonics_json(const FourierHarmonics& h, Json& out) {
  for (std::size_t k = 0; k < h.cos_terms.size(); ++k) {
    out["C" + std::to_string(k + 1)] = matrix_json(h.cos_terms[k]);
    out["D" + std::to_string(k + 1)] = matrix_json(h.sin_terms[k]);
  }
}

FourierMatrixMap parse_map(const Json& j, const std::string& path, bool torus) {
  Section s(j, path);
  FourierMatrixMap map;
  map.constant = parse_matrix(s.require("A0"), s.key_path("A0"));
  if (torus) {
    const Json& coords = s.require("coordinates");
    const std::string cp = s.key_path("coordinates");
    if (!coords.is_array()) fail(cp, "expected an array of harmonic objects");
    for (std::size_t c = 0; c < coords.size(); ++c) {
      Section cs(coords[c], cp + "[" + std::to_string(c) + "]");
      map.coordinates.push_back(parse_harmonics(cs, map.constant));
      cs.reject_unknown();
    }
  } else {
    FourierHarmonics h = parse_harmonics(s, map.constant);
    if (!h.cos_terms.empty()) map.coordinates.push_back(std::move(h));
  }
  s.reject_unknown();
  return map;
}

Json map_json(const FourierMatrixMap& map, bool torus) {
  Json out = Json::object();
  out["A0"] = matrix_json(map.constant);
  if (torus) {
    Json coords = Json::array();
    for (const auto& h : map.coordinates) {
      Json c = Json::object();
      harmonics_json(h, c);
      coords.push_back(std::move(c));
    }
    out["coordinates"] = std::move(coords);
  } else if (!map.coordinates.empty()) {
    harmonics_json(map.coordinates.front(), out);
  }
  return out;
}

void check_rates(const Matrix& rates, const std::string& path) {
  for (std::size_t i = 0; i < rates.rows(); ++i)
    for (std::size_t j = 0; j < rates.cols(); ++j)
      if (i != j && rates(i, j) < 0.0) {
        fail(path + "[" + std::to_string(i) + "][" + std::to_string(j) + "]",
             "off-diagonal rate a(" + std::to_string(i + 1) + "," + std::to_string(j + 1) +
                 ") must be >= 0, got " + std::to_string(rates(i, j)));
      }
}

EnvironmentSpec build_environment(Section& s) {
  const std::string kind = s.string("kind").value_or("");
  const double timescale = s.number("timescale").value_or(1.0);
  if (!(timescale > 0.0)) fail(s.key_path("timescale"), "must be > 0");

  if (kind == "constant") {
    Matrix a = parse_matrix(s.require("matrix"), s.key_path("matrix"));
    return EnvironmentSpec::periodic(FourierMatrixMap{std::move(a), {}}, 0.0, timescale);
  }
  if (kind == "periodic") {
    auto map = parse_map(s.require("matrix_map"), s.key_path("matrix_map"), false);
    return EnvironmentSpec::periodic(std::move(map), s.number("phase").value_or(0.0), timescale);
  }
  if (kind == "quasi_periodic") {
    auto map = parse_map(s.require("matrix_map"), s.key_path("matrix_map"), true);
    auto freqs = parse_reals(s.require("frequencies"), s.key_path("frequencies"));
    std::vector<double> phases(freqs.size(), 0.0);
    if (const Json* p = s.find("phases")) phases = parse_reals(*p, s.key_path("phases"));
    if (phases.size() != freqs.size()) {
      fail(s.key_path("phases"), "needs one phase per frequency");
    }
    return EnvironmentSpec::quasi_periodic(std::move(map), std::move(freqs), std::move(phases),
                                           timescale);
  }
  if (kind == "markov_switch") {
    Matrix rates = parse_matrix(s.require("rates"), s.key_path("rates"));
    check_rates(rates, s.key_path("rates"));
    const Json& mats = s.require("matrices");
    const std::string mp = s.key_path("matrices");
    if (!mats.is_array() || mats.empty()) fail(mp, "expected a non-empty array of matrices");
    std::vector<MetzlerMatrix> matrices;
    for (std::size_t i = 0; i < mats.size(); ++i) {
      const std::string p = mp + "[" + std::to_string(i) + "]";
      matrices.emplace_back(parse_matrix(mats[i], p), p);
    }
    const std::uint64_t initial = s.unsigned_integer("initial_state").value_or(1);
    if (initial < 1 || initial > matrices.size()) {
      fail(s.key_path("initial_state"),
           "must be in 1.." + std::to_string(matrices.size()) + " (states are 1-based)");
    }
    return EnvironmentSpec::markov_switch(std::move(rates), std::move(matrices), initial - 1,
                                          timescale);
  }
  if (kind == "circle_diffusion") {
    auto map = parse_map(s.require("matrix_map"), s.key_path("matrix_map"), false);
    const double sigma = s.number("sigma").value_or(1.0);
    if (!(sigma > 0.0)) fail(s.key_path("sigma"), "must be > 0");
    return EnvironmentSpec::circle_diffusion(std::move(map), sigma,
                                             s.number("initial_point").value_or(0.0), timescale);
  }
  fail(s.key_path("kind"),
       "must be one of constant, periodic, quasi_periodic, markov_switch, circle_diffusion");
}

Json environment_json(const EnvironmentSpec& env) {
  Json out = Json::object();
  out["kind"] = std::string(to_string(env.kind()));
  out["timescale"] = env.timescale();
  std::visit(
      [&](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, PeriodicParams>) {
          out["matrix_map"] = map_json(*env.fourier(), false);
          out["phase"] = p.phase;
        } else if constexpr (std::is_same_v<P, QuasiPeriodicParams>) {
          out["matrix_map"] = map_json(*env.fourier(), true);
          out["frequencies"] = p.frequencies;
          out["phases"] = p.phases;
        } else if constexpr (std::is_same_v<P, MarkovSwitchParams>) {
          out["rates"] = matrix_json(p.rates);
          Json mats = Json::array();
          for (const auto& m : p.matrices) mats.push_back(matrix_json(m.matrix()));
          out["matrices"] = std::move(mats);
          out["initial_state"] = p.initial_state + 1;
        } else {
          out["matrix_map"] = map_json(*env.fourier(), false);
          out["sigma"] = p.sigma;
          out["initial_point"] = p.initial_point;
        }
      },
      env.params());
  return out;
}

std::string_view to_string(ConcentrationMode mode) {
  switch (mode) {
    case ConcentrationMode::Auto: return "auto";
    case ConcentrationMode::Fast: return "fast";
    case ConcentrationMode::Slow: return "slow";
  }
  return "auto";
}

bool needs_horizon(Command c) {
  return c == Command::Estimate || c == Command::Sweep || c == Command::Contraction ||
         c == Command::Concentration;
}

Numerics parse_numerics(Section& s, Command command) {
  Numerics n;
  n.horizon = s.number("horizon");
  n.step = s.number("step");
  n.burn_in = s.number("burn_in");
  if (n.horizon && !(*n.horizon > 0.0)) fail(s.key_path("horizon"), "must be > 0");
  if (needs_horizon(command) && !n.horizon) {
    fail(s.key_path("horizon"), "required for command " + std::string(to_string(command)));
  }
  if (command != Command::Bounds && !n.step) {
    fail(s.key_path("step"), "required for command " + std::string(to_string(command)));
  }
  if (n.step) {
    if (!(*n.step > 0.0)) fail(s.key_path("step"), "must be > 0");
    if (n.horizon && *n.step > *n.horizon / 10.0) {
      fail(s.key_path("step"), "must be <= horizon / 10");
    }
  }
  if (n.burn_in) {
    if (command != Command::Estimate && command != Command::Concentration) {
      fail(s.key_path("burn_in"), "only used by estimate and concentration");
    }
    if (!n.horizon) fail(s.key_path("burn_in"), "needs numerics.horizon");
    if (!(*n.burn_in >= 0.0 && *n.burn_in < *n.horizon)) {
      fail(s.key_path("burn_in"), "must satisfy 0 <= burn_in < horizon");
    }
  }
  if (auto m = s.string("method")) {
    auto parsed = parse_lambda_method(*m);
    if (!parsed || (*parsed != LambdaMethod::ErgodicAverage &&
                    *parsed != LambdaMethod::LogNormGrowth)) {
      fail(s.key_path("method"), "must be ergodic_average or log_norm_growth");
    }
    n.method = *parsed;
  }
  if (auto m = s.string("concentration_mode")) {
    if (*m == "auto") n.concentration_mode = ConcentrationMode::Auto;
    else if (*m == "fast") n.concentration_mode = ConcentrationMode::Fast;
    else if (*m == "slow") n.concentration_mode = ConcentrationMode::Slow;
    else fail(s.key_path("concentration_mode"), "must be auto, fast or slow");
  }
  if (auto t = s.number("concentration_threshold")) {
    if (!(*t > 0.0)) fail(s.key_path("concentration_threshold"), "must be > 0");
    n.concentration_threshold = *t;
  }
  s.reject_unknown();
  return n;
}

SweepBlock parse_sweep(Section& s) {
  SweepBlock b;
  b.T_min = s.number("T_min").value_or(0.0);
  b.T_max = s.number("T_max").value_or(0.0);
  if (!s.json().contains("T_min")) fail(s.key_path("T_min"), "required key is missing");
  if (!s.json().contains("T_max")) fail(s.key_path("T_max"), "required key is missing");
  if (!(b.T_min > 0.0)) fail(s.key_path("T_min"), "must be > 0");
  if (!(b.T_max >= b.T_min)) fail(s.key_path("T_max"), "must be >= T_min");
  b.points_per_decade = s.number("points_per_decade").value_or(5.0);
  if (!(b.points_per_decade > 0.0)) fail(s.key_path("points_per_decade"), "must be > 0");
  b.threads = s.unsigned_integer("threads").value_or(0);
  s.reject_unknown();
  return b;
}

OutputBlock parse_output(Section& s) {
  OutputBlock o;
  o.path = s.string("path").value_or("");
  const std::string format = s.string("format").value_or("csv");
  if (format == "csv") o.format = OutputFormat::Csv;
  else if (format == "json") o.format = OutputFormat::Json;
  else fail(s.key_path("format"), "must be csv or json");
  o.trajectory_path = s.string("trajectory_path").value_or("");
  o.trajectory_thinning = s.unsigned_integer("trajectory_thinning").value_or(1);
  if (o.trajectory_thinning < 1) fail(s.key_path("trajectory_thinning"), "must be >= 1");
  s.reject_unknown();
  return o;
}

}  // namespace

std::string_view to_string(Command command) {
  switch (command) {
    case Command::Estimate: return "estimate";
    case Command::PeriodicExact: return "periodic-exact";
    case Command::Floquet: return "floquet";
    case Command::Bounds: return "bounds";
    case Command::Sweep: return "sweep";
    case Command::Contraction: return "contraction";
    case Command::Concentration: return "concentration";
  }
  return "unknown";
}

std::optional<Command> parse_command(std::string_view name) {
  for (auto c : {Command::Estimate, Command::PeriodicExact, Command::Floquet, Command::Bounds,
                 Command::Sweep, Command::Contraction, Command::Concentration})
    if (to_string(c) == name) return c;
  return std::nullopt;
}

ExperimentConfig parse_config(std::string_view text, const ConfigOverrides& overrides) {
  Json doc;
  try {
    doc = Json::parse(text.begin(), text.end());
  } catch (const Json::parse_error& e) {
    throw Error(ErrorKind::Config, std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) fail("(root)", "expected an object");
  if (overrides.command) doc["command"] = std::string(to_string(*overrides.command));
  if (overrides.seed) doc["seed"] = *overrides.seed;
  if (overrides.output_path) {
    if (!doc.contains("output")) doc["output"] = Json::object();
    if (doc["output"].is_object()) doc["output"]["path"] = *overrides.output_path;
  }
  Section root(doc, "");

  const std::string cmd_name = root.string("command").value_or("");
  const auto command = parse_command(cmd_name);
  if (!command) {
    fail("command",
         "must be one of estimate, periodic-exact, floquet, bounds, sweep, contraction, "
         "concentration");
  }

  Section env_section(root.require("environment"), "environment");
  std::optional<EnvironmentSpec> env;
  try {
    env = build_environment(env_section);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Config) throw;
    throw Error(e.kind(), std::string("environment: ") + e.what());
  }
  env_section.reject_unknown();
  if ((*command == Command::PeriodicExact || *command == Command::Floquet) &&
      env->kind() != EnvironmentKind::Periodic) {
    fail("environment.kind", "command " + cmd_name + " needs a periodic or constant environment");
  }

  const Json empty = Json::object();
  const Json* num = root.find("numerics");
  Section num_section(num ? *num : empty, "numerics");
  Numerics numerics = parse_numerics(num_section, *command);

  std::optional<SweepBlock> sweep;
  if (const Json* sw = root.find("sweep")) {
    if (*command != Command::Sweep) fail("sweep", "only allowed with command sweep");
    Section s(*sw, "sweep");
    sweep = parse_sweep(s);
  } else if (*command == Command::Sweep) {
    fail("sweep", "required for command sweep");
  }

  const std::uint64_t seed = root.unsigned_integer("seed").value_or(0);

  const Json* out = root.find("output");
  Section out_section(out ? *out : empty, "output");
  OutputBlock output = parse_output(out_section);
  if (!output.trajectory_path.empty() && *command != Command::Estimate) {
    fail("output.trajectory_path", "only allowed with command estimate");
  }
  root.reject_unknown();

  return ExperimentConfig{std::move(*env), *command, numerics, sweep, seed, std::move(output)};
}

std::string to_json_text(const ExperimentConfig& c) {
  Json j = Json::object();
  j["command"] = std::string(to_string(c.command));
  j["seed"] = c.seed;
  j["environment"] = environment_json(c.environment);
  Json n = Json::object();
  if (c.numerics.horizon) n["horizon"] = *c.numerics.horizon;
  if (c.numerics.step) n["step"] = *c.numerics.step;
  if (c.numerics.burn_in) n["burn_in"] = *c.numerics.burn_in;
  n["method"] = std::string(to_string(c.numerics.method));
  n["concentration_mode"] = std::string(to_string(c.numerics.concentration_mode));
  n["concentration_threshold"] = c.numerics.concentration_threshold;
  j["numerics"] = std::move(n);
  if (c.sweep) {
    j["sweep"] = Json{{"T_min", c.sweep->T_min},
                      {"T_max", c.sweep->T_max},
                      {"points_per_decade", c.sweep->points_per_decade},
                      {"threads", c.sweep->threads}};
  }
  Json o = Json::object();
  o["path"] = c.output.path;
  o["format"] = c.output.format == OutputFormat::Csv ? "csv" : "json";
  if (!c.output.trajectory_path.empty()) {
    o["trajectory_path"] = c.output.trajectory_path;
    o["trajectory_thinning"] = c.output.trajectory_thinning;
  }
  j["output"] = std::move(o);
  return j.dump();
}

std::string_view config_reference() {
  return R"(Config file (JSON). Keys:
  command                    estimate | periodic-exact | floquet | bounds | sweep |
                             contraction | concentration
  seed                       unsigned 64-bit master seed (default 0)
  environment.kind           constant | periodic | quasi_periodic | markov_switch |
                             circle_diffusion
  environment.timescale      T > 0; the environment is read at t / T (default 1)
  environment.matrix         constant: d x d Metzler matrix as nested row arrays
  environment.matrix_map     periodic, circle_diffusion: {"A0": M, "C1": M, "D1": M, ...}
                             with A(s) = A0 + sum_k Ck cos(2 pi k s) + Dk sin(2 pi k s);
                             quasi_periodic: {"A0": M, "coordinates": [{"C1": M, ...}, ...]}
                             with one harmonic object per torus coordinate
  environment.phase          periodic: initial phase in [0, 1) (default 0)
  environment.frequencies    quasi_periodic: rotation frequencies a_1..a_n
  environment.phases         quasi_periodic: initial phases (default all 0)
  environment.sigma          circle_diffusion: diffusion coefficient > 0 (default 1)
  environment.initial_point  circle_diffusion: starting point (default 0)
  environment.rates          markov_switch: k x k rate matrix, off-diagonal >= 0,
                             diagonal 0 or minus the row sum; must be irreducible
  environment.matrices       markov_switch: one d x d Metzler matrix per state
  environment.initial_state  markov_switch: 1-based starting state (default 1)
  numerics.horizon           integration horizon > 0 (estimate, sweep: per T,
                             contraction, concentration)
  numerics.step              RK4 step in (0, horizon / 10]; required except for bounds
  numerics.burn_in           discarded initial time in [0, horizon) (default horizon / 10)
  numerics.method            estimate: ergodic_average | log_norm_growth
  numerics.concentration_mode     auto | fast | slow (default auto)
  numerics.concentration_threshold  auto uses fast for T <= threshold (default 1)
  sweep.T_min, sweep.T_max   timescale range, 0 < T_min <= T_max (command sweep only)
  sweep.points_per_decade    grid density (default 5)
  sweep.threads              worker threads, 0 = all cores (results do not depend on it)
  output.path                result file, written atomically (default standard output)
  output.format              csv | json (default csv)
  output.trajectory_path     estimate: also dump the trajectory CSV here
  output.trajectory_thinning record every n-th step in the dump (default 1)

Exit status: 0 success, 2 invalid config or parameters, 3 model assumption
violated (e.g. reducible matrix), 4 numerical failure, 5 I/O error,
1 unexpected internal error. Errors print one JSON record on stderr.
)";
}

}  // namespace coop::cli
