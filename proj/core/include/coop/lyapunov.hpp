#pragma once

#include <cstddef>
#include <optional>
#include <string_view>

#include "coop/environment.hpp"
#include "coop/matrix.hpp"
#include "coop/seed.hpp"

namespace coop {

enum class LambdaMethod { ErgodicAverage, LogNormGrowth, PeriodicFixedPoint, FloquetMonodromy };

std::string_view to_string(LambdaMethod method);
std::optional<LambdaMethod> parse_lambda_method(std::string_view name);

/// Estimate of the top Lyapunov exponent (a rate, inverse time).
struct LambdaEstimate {
  double value = 0.0;
  LambdaMethod method = LambdaMethod::ErgodicAverage;
  double horizon = 0.0;
  double step = 0.0;
  double burn_in = 0.0;
  /// |estimate on the first half of [burn_in, horizon] - second half|.
  /// Zero for the deterministic periodic methods.
  double half_split_gap = 0.0;
  std::optional<Seed> seed;
  /// Diagnostic: largest |sum(theta) - 1| seen by the projective integrator.
  double max_simplex_defect = 0.0;
};

inline double default_burn_in(double horizon) { return 0.1 * horizon; }

/// Ergodic estimate from one trajectory started at theta0 (barycenter when
/// empty).
///
/// ErgodicAverage integrates the projective flow and averages <A theta, 1>
/// over [burn_in, horizon]. LogNormGrowth integrates the linear equation for
/// y itself (renormalized each step) and reports the growth of log <y, 1>
/// over the same window. The two agree up to integrator error.
LambdaEstimate estimate_lambda(const EnvironmentSpec& spec, Seed seed, LambdaMethod method,
                               double horizon, double step, double burn_in,
                               const std::optional<SimplexPoint>& theta0 = std::nullopt);

struct PeriodicLambda {
  LambdaEstimate estimate;
  /// theta*(phase): fixed point of the period map / Perron vector of the
  /// monodromy.
  SimplexPoint direction;
  std::size_t iterations = 0;
};

/// Fixed point of the period map found by iterating the projective flow
/// over one period from the barycenter, then the growth integral along it.
/// Periodic environments only. The period is T; the step is shrunk so that
/// a whole number of steps covers it.
PeriodicLambda lambda_periodic_exact(const EnvironmentSpec& spec, double step);

/// log(Perron root of the monodromy) / period.
PeriodicLambda lambda_floquet(const EnvironmentSpec& spec, double step);

struct Interval {
  double lower;
  double upper;
  bool contains(double x, double tolerance = 0.0) const {
    return x >= lower - tolerance && x <= upper + tolerance;
  }
};

/// Column-sum and symmetric-part bounds on the exponent, integrated
/// against the invariant measure.
struct CorollaryBounds {
  Interval column_sum;
  Interval symmetric_part;
  bool quadrature_converged = true;
};

CorollaryBounds corollary_bounds(const EnvironmentSpec& spec);

struct ContractionDiagnostics {
  /// First sample time with Phi(t) entrywise positive; empty if never
  /// reached by the horizon (the average matrix is probably reducible).
  std::optional<double> first_positive_time;
  /// Least-squares slope of log tau[Phi(t)] against t over samples with
  /// 1e-13 < tau < 1. A surrogate for the contraction exponent.
  std::optional<double> empirical_rate;
  std::size_t fitted_samples = 0;
};

ContractionDiagnostics contraction_diagnostics(const EnvironmentSpec& spec, Seed seed,
                                               double horizon, double step);

}  // namespace coop
