#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "coop/environment.hpp"
#include "coop/lyapunov.hpp"
#include "coop/matrix.hpp"
#include "coop/seed.hpp"

namespace coop {

/// Fast-switching limit: spectral abscissa and Perron vector of the
/// average matrix. Throws AssumptionViolation if the average is reducible.
struct FastLimit {
  double lambda;
  SimplexPoint theta;
};
FastLimit predict_fast_limit(const EnvironmentSpec& spec);

enum class SlowLimitCheck {
  /// Throw AssumptionViolation at the first state with reducible A(s).
  Enforce,
  /// Always return the integral of the spectral abscissa; report the
  /// hypothesis in the result.
  Report,
};

struct SlowLimit {
  double value;
  /// Every sampled A(s) was irreducible.
  bool hypothesis_holds = true;
  /// Description of the first state with reducible A(s), if any.
  std::string first_reducible_state;
  bool quadrature_converged = true;
};

/// Integral of the spectral abscissa of A(s) against the invariant measure.
SlowLimit predict_slow_limit(const EnvironmentSpec& spec,
                             SlowLimitCheck check = SlowLimitCheck::Enforce);

enum class ConcentrationMode { Auto, Fast, Slow };

struct ConcentrationOptions {
  ConcentrationMode mode = ConcentrationMode::Auto;
  /// Auto picks Fast for T <= threshold, Slow otherwise.
  double threshold = 1.0;
  /// Defaults to 10% of the horizon.
  std::optional<double> burn_in;
};

/// Time-averaged l1 distance between theta_u and the reference direction:
/// the Perron vector of the average matrix (fast) or of A(omega_u) (slow).
double occupation_concentration(const EnvironmentSpec& spec, double timescale, Seed seed,
                                double horizon, double step,
                                const ConcentrationOptions& options = {});

struct RegimeSweepResult {
  std::vector<double> T_values;
  std::vector<LambdaEstimate> lambda_hats;
  double fast_limit = 0.0;
  double slow_limit = 0.0;
  bool slow_hypothesis_holds = true;
  std::vector<double> concentration;
};

struct SweepOptions {
  ConcentrationOptions concentration;
  /// 0 = hardware concurrency.
  std::size_t threads = 0;
};

/// Ergodic estimate of the exponent at every T. Point i uses seed
/// derive_seed(seed, i) and horizon max(horizon_per_T, 100 T) with a 10%
/// burn-in.
RegimeSweepResult sweep_lambda(const EnvironmentSpec& spec, const std::vector<double>& T_values,
                               Seed seed, double horizon_per_T, double step,
                               const SweepOptions& options = {});

/// Log-spaced grid from T_min to T_max inclusive with the given density.
std::vector<double> log_spaced_grid(double T_min, double T_max, double points_per_decade = 5.0);

}  // namespace coop
