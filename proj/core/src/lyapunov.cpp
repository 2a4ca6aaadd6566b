#include "coop/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "coop/dynamics.hpp"
#include "coop/error.hpp"
#include "coop/linalg.hpp"
#include "quadrature.hpp"

namespace coop {

namespace {

constexpr double kFixedPointTolerance = 1e-12;
constexpr std::size_t kFixedPointIterations = 10000;
constexpr double kTauFloor = 1e-13;

void require_periodic(const EnvironmentSpec& spec, const char* what) {
  if (spec.kind() != EnvironmentKind::Periodic) {
    throw Error(ErrorKind::Domain, std::string(what) + " needs a periodic environment, got " +
                                       std::string(to_string(spec.kind())));
  }
}

// Whole number of steps per period.
double period_step(double period, double step) {
  if (!(step > 0.0) || !std::isfinite(step)) {
    throw Error(ErrorKind::Parameter, "step must be positive and finite");
  }
  const double n = std::max(1.0, std::ceil(period / step - 1e-9));
  return period / n;
}

}  // namespace

std::string_view to_string(LambdaMethod method) {
  switch (method) {
    case LambdaMethod::ErgodicAverage: return "ergodic_average";
    case LambdaMethod::LogNormGrowth: return "log_norm_growth";
    case LambdaMethod::PeriodicFixedPoint: return "periodic_fixed_point";
    case LambdaMethod::FloquetMonodromy: return "floquet_monodromy";
  }
  return "unknown";
}

std::optional<LambdaMethod> parse_lambda_method(std::string_view name) {
  for (auto m : {LambdaMethod::ErgodicAverage, LambdaMethod::LogNormGrowth,
                 LambdaMethod::PeriodicFixedPoint, LambdaMethod::FloquetMonodromy})
    if (to_string(m) == name) return m;
  return std::nullopt;
}

LambdaEstimate estimate_lambda(const EnvironmentSpec& spec, Seed seed, LambdaMethod method,
                               double horizon, double step, double burn_in,
                               const std::optional<SimplexPoint>& theta0) {
  check_horizon_and_step(horizon, step);
  if (!(burn_in >= 0.0) || !(burn_in < horizon)) {
    throw Error(ErrorKind::Parameter, "burn-in must satisfy 0 <= burn_in < horizon");
  }
  const SimplexPoint start = theta0 ? *theta0 : SimplexPoint::barycenter(spec.dim());
  const double mid = burn_in + 0.5 * (horizon - burn_in);

  LambdaEstimate est;
  est.method = method;
  est.horizon = horizon;
  est.step = step;
  est.burn_in = burn_in;
  est.seed = seed;

  double at_burn = 0.0, at_mid = 0.0, at_end = 0.0;
  switch (method) {
    case LambdaMethod::ErgodicAverage: {
      ProjectiveFlow flow(spec, seed, start, step);
      flow.advance_to(burn_in);
      at_burn = flow.log_rho();
      flow.advance_to(mid);
      at_mid = flow.log_rho();
      flow.advance_to(horizon);
      at_end = flow.log_rho();
      est.max_simplex_defect = flow.max_simplex_defect();
      break;
    }
    case LambdaMethod::LogNormGrowth: {
      Matrix column(spec.dim(), 1);
      for (std::size_t i = 0; i < spec.dim(); ++i) column(i, 0) = start[i];
      LinearFlow flow(spec, seed, std::move(column), step);
      flow.advance_to(burn_in);
      at_burn = flow.log_scales()[0];
      flow.advance_to(mid);
      at_mid = flow.log_scales()[0];
      flow.advance_to(horizon);
      at_end = flow.log_scales()[0];
      break;
    }
    default:
      throw Error(ErrorKind::Parameter, "estimate_lambda supports ergodic_average and "
                                        "log_norm_growth, got " +
                                            std::string(to_string(method)));
  }
  est.value = (at_end - at_burn) / (horizon - burn_in);
  const double first = (at_mid - at_burn) / (mid - burn_in);
  const double second = (at_end - at_mid) / (horizon - mid);
  est.half_split_gap = std::abs(first - second);
  return est;
}

PeriodicLambda lambda_periodic_exact(const EnvironmentSpec& spec, double step) {
  require_periodic(spec, "lambda_periodic_exact");
  const double period = spec.timescale();
  const double h = period_step(period, step);
  const Seed unused{};

  auto period_map = [&](const Vector& theta, double* log_growth) {
    ProjectiveFlow flow(spec, unused, SimplexPoint(theta), h);
    flow.advance_to(period);
    if (log_growth) *log_growth = flow.log_rho();
    return Vector(flow.theta().begin(), flow.theta().end());
  };

  Vector theta = SimplexPoint::barycenter(spec.dim()).vector();
  double gap = std::numeric_limits<double>::infinity();
  std::size_t it = 0;
  while (it < kFixedPointIterations) {
    Vector next = period_map(theta, nullptr);
    ++it;
    gap = 0.0;
    for (std::size_t i = 0; i < theta.size(); ++i) gap = std::max(gap, std::abs(next[i] - theta[i]));
    theta = std::move(next);
    if (gap < kFixedPointTolerance) break;
  }
  if (!(gap < kFixedPointTolerance)) {
    std::string detail = "sup-norm gap " + std::to_string(gap);
    try {
      Vector again = period_map(theta, nullptr);
      detail += ", Hilbert gap " + std::to_string(hilbert_distance(theta, again));
    } catch (const Error&) {
      detail += ", iterate on the simplex boundary";
    }
    throw Error(ErrorKind::ContractionFailure,
                "period map did not contract after " + std::to_string(it) + " iterations (" +
                    detail + "); the system may be reducible in practice");
  }

  double growth = 0.0;
  period_map(theta, &growth);

  PeriodicLambda out{LambdaEstimate{}, SimplexPoint::normalized(theta), it};
  out.estimate.value = growth / period;
  out.estimate.method = LambdaMethod::PeriodicFixedPoint;
  out.estimate.horizon = period;
  out.estimate.step = h;
  return out;
}

PeriodicLambda lambda_floquet(const EnvironmentSpec& spec, double step) {
  require_periodic(spec, "lambda_floquet");
  const double period = spec.timescale();
  const double h = period_step(period, step);
  LinearFlow flow(spec, Seed{}, Matrix::identity(spec.dim()), h);
  flow.advance_to(period);

  // Monodromy = N diag(exp(s_j)); factor out the largest scale.
  const Vector& scales = flow.log_scales();
  const double offset = *std::max_element(scales.begin(), scales.end());
  Matrix monodromy = flow.normalized();
  for (std::size_t j = 0; j < monodromy.cols(); ++j) {
    const double f = std::exp(scales[j] - offset);
    for (std::size_t i = 0; i < monodromy.rows(); ++i) monodromy(i, j) *= f;
  }
  const PerronPair pair = perron_eigenpair(MetzlerMatrix(std::move(monodromy), "monodromy"));
  if (!(pair.lambda_max > 0.0)) {
    throw Error(ErrorKind::NumericalBlowup, "monodromy Perron root is not positive");
  }

  PeriodicLambda out{LambdaEstimate{}, pair.vector, 1};
  out.estimate.value = (std::log(pair.lambda_max) + offset) / period;
  out.estimate.method = LambdaMethod::FloquetMonodromy;
  out.estimate.horizon = period;
  out.estimate.step = h;
  return out;
}

CorollaryBounds corollary_bounds(const EnvironmentSpec& spec) {
  auto pointwise = [](const Matrix& a, std::span<double> out) {
    const Vector cols = column_sums(a);
    const auto [lo, hi] = std::minmax_element(cols.begin(), cols.end());
    const SymmetricExtremes sym = symmetric_part_extremes(a);
    out[0] = *lo;
    out[1] = *hi;
    out[2] = sym.min;
    out[3] = sym.max;
  };

  std::vector<double> v(4, 0.0);
  CorollaryBounds b{};
  if (const auto* m = spec.markov()) {
    const auto mu = stationary_distribution(m->rates);
    std::vector<double> point(4);
    for (std::size_t i = 0; i < mu.size(); ++i) {
      pointwise(m->matrices[i].matrix(), point);
      for (std::size_t q = 0; q < 4; ++q) v[q] += mu[i] * point[q];
    }
  } else {
    auto avg = detail::torus_average(
        spec, 4, [&](const Matrix& a, std::span<const double>, std::span<double> out) {
          pointwise(a, out);
        });
    v = avg.values;
    b.quadrature_converged = avg.converged;
  }
  b.column_sum = {v[0], v[1]};
  b.symmetric_part = {v[2], v[3]};
  return b;
}

ContractionDiagnostics contraction_diagnostics(const EnvironmentSpec& spec, Seed seed,
                                               double horizon, double step) {
  check_horizon_and_step(horizon, step);
  LinearFlow flow(spec, seed, Matrix::identity(spec.dim()), step);
  ContractionDiagnostics out;

  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  std::size_t n = 0;
  const auto steps = static_cast<std::size_t>(std::ceil(horizon / step - 1e-9));
  for (std::size_t k = 1; k <= steps; ++k) {
    const double t = k == steps ? horizon : std::min(horizon, static_cast<double>(k) * step);
    flow.advance_to(t);
    const Matrix& phi = flow.normalized();
    const bool positive =
        std::all_of(phi.data().begin(), phi.data().end(), [](double x) { return x > 0.0; });
    if (!positive) continue;
    if (!out.first_positive_time) out.first_positive_time = t;
    const double tau = birkhoff_tau(phi);
    if (tau < 1.0 && tau > kTauFloor) {
      const double y = std::log(tau);
      sx += t;
      sy += y;
      sxx += t * t;
      sxy += t * y;
      ++n;
    }
  }
  out.fitted_samples = n;
  const double denom = static_cast<double>(n) * sxx - sx * sx;
  if (n >= 2 && denom > 0.0) out.empirical_rate = (static_cast<double>(n) * sxy - sx * sy) / denom;
  return out;
}

}  // namespace coop
