#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "coop/environment.hpp"
#include "coop/matrix.hpp"
#include "coop/stepper.hpp"

namespace coop {

/// F(s, theta) = A theta - <A theta, 1> theta.
Vector vector_field(const Matrix& a, std::span<const double> theta);

/// <A theta, 1>, the instantaneous log-growth rate of rho.
double growth_integrand(const Matrix& a, std::span<const double> theta);

/// Streaming RK4 integrator of the projective flow with log rho carried as
/// an extra component: log rho advances by h/6 (g1 + 2 g2 + 2 g3 + g4) from
/// the same stage values that drive theta. After every sub-step theta is
/// clipped (entries in [-1e-10, 0) become 0) and renormalized.
class ProjectiveFlow {
 public:
  ProjectiveFlow(const EnvironmentSpec& spec, Seed seed, const SimplexPoint& theta0, double step,
                 StepProbe probe = {});

  /// Integrates up to time t >= time() in steps of at most `step`, calling
  /// after_step() once per step.
  template <class Observer>
  void advance_to(double t, Observer&& after_step) {
    while (time_ < t) {
      step_toward(t);
      after_step();
    }
  }
  void advance_to(double t) {
    advance_to(t, [] {});
  }

  double time() const noexcept { return time_; }
  std::span<const double> theta() const noexcept { return theta_; }
  double log_rho() const noexcept { return log_rho_; }
  /// Largest |sum(theta) - 1| seen after any renormalization.
  double max_simplex_defect() const noexcept { return max_defect_; }
  EnvironmentStepper& stepper() noexcept { return stepper_; }

 private:
  void step_toward(double t);
  void rk4(double h, const Matrix& left, const Matrix& mid, const Matrix& right);

  EnvironmentStepper stepper_;
  double step_;
  double time_ = 0.0;
  double log_rho_ = 0.0;
  double max_defect_ = 0.0;
  Vector theta_, stage_, k1_, k2_, k3_, k4_, tmp_;
};

/// Streaming RK4 integrator of the linear equation Y' = A(omega_t) Y for a
/// d x c block of nonnegative columns. Each column is renormalized to sum 1
/// after every sub-step and its log scale accumulated, so the true solution
/// is normalized() * diag(exp(log_scales())).
class LinearFlow {
 public:
  LinearFlow(const EnvironmentSpec& spec, Seed seed, Matrix initial, double step,
             StepProbe probe = {});

  void advance_to(double t);

  double time() const noexcept { return time_; }
  const Matrix& normalized() const noexcept { return y_; }
  const Vector& log_scales() const noexcept { return log_scales_; }

 private:
  void rk4(double h, const Matrix& left, const Matrix& mid, const Matrix& right);
  void renormalize();

  EnvironmentStepper stepper_;
  double step_;
  double time_ = 0.0;
  Matrix y_, k1_, k2_, k3_, k4_, stage_;
  Vector log_scales_;
};

struct TrajectoryRecord {
  std::vector<double> sample_times;
  std::vector<SimplexPoint> theta_samples;
  std::vector<double> log_rho;
  std::vector<double> growth_integrand_avg;
  double max_simplex_defect = 0.0;
};

struct IntegrationOptions {
  /// Record every `thinning`-th step (the final time is always recorded).
  std::size_t thinning = 1;
  StepProbe step_probe;
};

TrajectoryRecord integrate(const EnvironmentSpec& spec, Seed seed, const SimplexPoint& theta0,
                           double horizon, double step, const IntegrationOptions& options = {});

/// Columns: time, theta_1..theta_d, log_rho, running_avg.
void write_trajectory_csv(std::ostream& out, const TrajectoryRecord& record);

/// Phi(t, omega) in column-normalized form.
struct FundamentalMatrix {
  double t = 0.0;
  Matrix normalized;
  Vector log_scales;

  /// normalized * diag(exp(log_scales)); overflows for long horizons.
  Matrix dense() const;
};

FundamentalMatrix fundamental_matrix(const EnvironmentSpec& spec, Seed seed, double horizon,
                                     double step);

/// Hilbert distance between two trajectories driven by the same path,
/// sampled every `step` from t = 0.
std::vector<std::pair<double, double>> synchronized_pair_distance(
    const EnvironmentSpec& spec, Seed seed, const SimplexPoint& theta0,
    const SimplexPoint& theta0_other, double horizon, double step);

/// Checks horizon > 0, step > 0, step < horizon.
void check_horizon_and_step(double horizon, double step);

}  // namespace coop
