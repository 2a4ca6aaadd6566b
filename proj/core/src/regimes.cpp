#include "coop/regimes.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <sstream>
#include <thread>

#include "coop/dynamics.hpp"
#include "coop/error.hpp"
#include "coop/linalg.hpp"
#include "quadrature.hpp"

namespace coop {

namespace {

// theta reference for the concentration statistic.
class ReferenceDirection {
 public:
  ReferenceDirection(const EnvironmentSpec& spec, bool slow) : slow_(slow) {
    if (!slow_) {
      fixed_ = predict_fast_limit(spec).theta.vector();
    } else if (const auto* m = spec.markov()) {
      for (const auto& a : m->matrices) per_state_.push_back(dominant_eigenpair(a).vector.vector());
    }
  }

  std::span<const double> at(ProjectiveFlow& flow) {
    if (!slow_) return fixed_;
    auto& stepper = flow.stepper();
    if (!per_state_.empty()) {
      const auto state = std::get<DiscreteState>(stepper.path().state_at(flow.time()));
      return per_state_[state.index];
    }
    scratch_ = dominant_eigenpair(MetzlerMatrix(stepper.matrix_at_time(flow.time()))).vector.vector();
    return scratch_;
  }

 private:
  bool slow_;
  Vector fixed_;
  std::vector<Vector> per_state_;
  Vector scratch_;
};

struct ErgodicPass {
  LambdaEstimate estimate;
  double concentration = 0.0;
};

// One trajectory: the ergodic estimate over [burn_in, horizon] and the
// trapezoid average of |theta_u - ref(omega_u)|_1 over the same window.
ErgodicPass ergodic_pass(const EnvironmentSpec& spec, Seed seed, double horizon, double step,
                         double burn_in, bool slow_reference) {
  check_horizon_and_step(horizon, step);
  if (!(burn_in >= 0.0) || !(burn_in < horizon)) {
    throw Error(ErrorKind::Parameter, "burn-in must satisfy 0 <= burn_in < horizon");
  }
  ReferenceDirection ref(spec, slow_reference);
  ProjectiveFlow flow(spec, seed, SimplexPoint::barycenter(spec.dim()), step);

  auto distance = [&] {
    const auto r = ref.at(flow);
    const auto th = flow.theta();
    double s = 0.0;
    for (std::size_t i = 0; i < th.size(); ++i) s += std::abs(th[i] - r[i]);
    return s;
  };

  flow.advance_to(burn_in);
  const double at_burn = flow.log_rho();
  double prev_t = flow.time();
  double prev_d = distance();
  double integral = 0.0;
  auto accumulate = [&] {
    const double d = distance();
    integral += 0.5 * (prev_d + d) * (flow.time() - prev_t);
    prev_t = flow.time();
    prev_d = d;
  };
  const double mid = burn_in + 0.5 * (horizon - burn_in);
  flow.advance_to(mid, accumulate);
  const double at_mid = flow.log_rho();
  flow.advance_to(horizon, accumulate);
  const double at_end = flow.log_rho();

  ErgodicPass out;
  auto& est = out.estimate;
  est.method = LambdaMethod::ErgodicAverage;
  est.horizon = horizon;
  est.step = step;
  est.burn_in = burn_in;
  est.seed = seed;
  est.value = (at_end - at_burn) / (horizon - burn_in);
  est.half_split_gap =
      std::abs((at_mid - at_burn) / (mid - burn_in) - (at_end - at_mid) / (horizon - mid));
  est.max_simplex_defect = flow.max_simplex_defect();
  out.concentration = integral / (horizon - burn_in);
  return out;
}

bool use_slow_reference(const ConcentrationOptions& options, double timescale) {
  switch (options.mode) {
    case ConcentrationMode::Fast: return false;
    case ConcentrationMode::Slow: return true;
    case ConcentrationMode::Auto: return timescale > options.threshold;
  }
  return false;
}

}  // namespace

FastLimit predict_fast_limit(const EnvironmentSpec& spec) {
  const MetzlerMatrix avg = average_matrix(spec);
  if (!is_irreducible(avg)) {
    throw Error(ErrorKind::AssumptionViolation,
                "average matrix is reducible: " + to_string(avg.matrix()));
  }
  auto pair = perron_eigenpair(avg);
  return {pair.lambda_max, std::move(pair.vector)};
}

SlowLimit predict_slow_limit(const EnvironmentSpec& spec, SlowLimitCheck check) {
  SlowLimit out{};
  auto note_reducible = [&](std::string where) {
    if (check == SlowLimitCheck::Enforce) {
      throw Error(ErrorKind::AssumptionViolation,
                  "A(s) is reducible at " + where + "; the slow-regime limit needs A(s) "
                  "irreducible on the support of the invariant measure");
    }
    if (out.hypothesis_holds) out.first_reducible_state = std::move(where);
    out.hypothesis_holds = false;
  };

  if (const auto* m = spec.markov()) {
    const auto mu = stationary_distribution(m->rates);
    for (std::size_t i = 0; i < mu.size(); ++i) {
      if (!is_irreducible(m->matrices[i])) note_reducible("state " + std::to_string(i + 1));
      out.value += mu[i] * spectral_abscissa(m->matrices[i]);
    }
    return out;
  }

  auto avg = detail::torus_average(
      spec, 1, [&](const Matrix& a, std::span<const double> s, std::span<double> value) {
        const MetzlerMatrix am(a);
        if (!is_irreducible(am)) {
          std::ostringstream os;
          os << "s = (";
          for (std::size_t c = 0; c < s.size(); ++c) os << (c ? ", " : "") << s[c];
          os << ")";
          note_reducible(os.str());
        }
        value[0] = spectral_abscissa(am);
      });
  out.value = avg.values[0];
  out.quadrature_converged = avg.converged;
  return out;
}

double occupation_concentration(const EnvironmentSpec& spec, double timescale, Seed seed,
                                double horizon, double step,
                                const ConcentrationOptions& options) {
  const EnvironmentSpec scaled = spec.with_timescale(timescale);
  const double burn_in = options.burn_in ? *options.burn_in : default_burn_in(horizon);
  return ergodic_pass(scaled, seed, horizon, step, burn_in, use_slow_reference(options, timescale))
      .concentration;
}

RegimeSweepResult sweep_lambda(const EnvironmentSpec& spec, const std::vector<double>& T_values,
                               Seed seed, double horizon_per_T, double step,
                               const SweepOptions& options) {
  if (T_values.empty()) throw Error(ErrorKind::Parameter, "sweep needs at least one T value");
  for (std::size_t i = 0; i < T_values.size(); ++i) {
    if (!(T_values[i] > 0.0) || !std::isfinite(T_values[i])) {
      throw Error(ErrorKind::Parameter, "T values must be positive and finite");
    }
    if (i > 0 && !(T_values[i] > T_values[i - 1])) {
      throw Error(ErrorKind::Parameter, "T values must be strictly increasing");
    }
  }
  if (!(horizon_per_T > 0.0)) throw Error(ErrorKind::Parameter, "horizon must be positive");

  RegimeSweepResult result;
  result.T_values = T_values;
  result.fast_limit = predict_fast_limit(spec).lambda;
  const SlowLimit slow = predict_slow_limit(spec, SlowLimitCheck::Report);
  result.slow_limit = slow.value;
  result.slow_hypothesis_holds = slow.hypothesis_holds;

  const std::size_t n = T_values.size();
  std::vector<ErgodicPass> passes(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        const double T = T_values[i];
        const double horizon = std::max(horizon_per_T, 100.0 * T);
        passes[i] = ergodic_pass(spec.with_timescale(T), derive_seed(seed, i), horizon, step,
                                 default_burn_in(horizon),
                                 use_slow_reference(options.concentration, T));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::size_t threads = options.threads ? options.threads : std::thread::hardware_concurrency();
  threads = std::clamp<std::size_t>(threads, 1, n);
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < threads; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  for (auto& p : passes) {
    result.lambda_hats.push_back(p.estimate);
    result.concentration.push_back(p.concentration);
  }
  return result;
}

std::vector<double> log_spaced_grid(double T_min, double T_max, double points_per_decade) {
  if (!(T_min > 0.0) || !(T_max >= T_min) || !std::isfinite(T_max)) {
    throw Error(ErrorKind::Parameter, "log grid needs 0 < T_min <= T_max");
  }
  if (!(points_per_decade > 0.0)) {
    throw Error(ErrorKind::Parameter, "points per decade must be positive");
  }
  const double decades = std::log10(T_max / T_min);
  const auto intervals =
      static_cast<std::size_t>(std::max(0.0, std::ceil(decades * points_per_decade - 1e-9)));
  if (intervals == 0) return {T_min};
  std::vector<double> grid(intervals + 1);
  for (std::size_t k = 0; k <= intervals; ++k) {
    grid[k] = T_min * std::pow(10.0, decades * static_cast<double>(k) / intervals);
  }
  grid.front() = T_min;
  grid.back() = T_max;
  return grid;
}

}  // namespace coop
