#include "coop/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "coop/error.hpp"
#include "coop/format.hpp"
#include "coop/linalg.hpp"

namespace coop {

namespace {

constexpr double kThetaClip = 1e-10;
constexpr double kMatrixClip = 1e-12;

// Next grid time: merges a trailing sliver into the current step.
double next_time(double now, double target, double step) {
  const double next = now + step;
  return target - next < 1e-9 * step ? target : next;
}

}  // namespace

void check_horizon_and_step(double horizon, double step) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw Error(ErrorKind::Parameter, "horizon must be positive and finite");
  }
  if (!(step > 0.0) || !std::isfinite(step)) {
    throw Error(ErrorKind::Parameter, "step must be positive and finite");
  }
  if (step >= horizon) throw Error(ErrorKind::Parameter, "step must be smaller than the horizon");
}

Vector vector_field(const Matrix& a, std::span<const double> theta) {
  if (!a.is_square() || a.cols() != theta.size()) {
    throw Error(ErrorKind::InvalidMatrix, "vector field: dimension mismatch");
  }
  Vector out = multiply(a, theta);
  const double g = sum(out);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= g * theta[i];
  return out;
}

double growth_integrand(const Matrix& a, std::span<const double> theta) {
  if (!a.is_square() || a.cols() != theta.size()) {
    throw Error(ErrorKind::InvalidMatrix, "growth integrand: dimension mismatch");
  }
  return sum(multiply(a, theta));
}

ProjectiveFlow::ProjectiveFlow(const EnvironmentSpec& spec, Seed seed,
                               const SimplexPoint& theta0, double step, StepProbe probe)
    : stepper_(spec, seed, std::move(probe)), step_(step), theta_(theta0.vector()) {
  if (theta0.dim() != spec.dim()) {
    throw Error(ErrorKind::InvalidMatrix, "initial theta has dimension " +
                                              std::to_string(theta0.dim()) + ", system has " +
                                              std::to_string(spec.dim()));
  }
  if (!(step > 0.0)) throw Error(ErrorKind::Parameter, "step must be positive");
  const std::size_t d = theta_.size();
  stage_.resize(d);
  k1_.resize(d);
  k2_.resize(d);
  k3_.resize(d);
  k4_.resize(d);
  tmp_.resize(d);
}

void ProjectiveFlow::step_toward(double t) {
  const double next = next_time(time_, t, step_);
  stepper_.walk(time_, next, [this](double h, const Matrix& l, const Matrix& m,
                                    const Matrix& r) { rk4(h, l, m, r); });
  time_ = next;
}

void ProjectiveFlow::rk4(double h, const Matrix& left, const Matrix& mid, const Matrix& right) {
  const std::size_t d = theta_.size();
  auto field = [&](const Matrix& a, const Vector& th, Vector& k) {
    multiply(a, th, tmp_);
    double g = 0.0;
    for (double x : tmp_) g += x;
    for (std::size_t i = 0; i < d; ++i) k[i] = tmp_[i] - g * th[i];
    return g;
  };
  const double g1 = field(left, theta_, k1_);
  for (std::size_t i = 0; i < d; ++i) stage_[i] = theta_[i] + 0.5 * h * k1_[i];
  const double g2 = field(mid, stage_, k2_);
  for (std::size_t i = 0; i < d; ++i) stage_[i] = theta_[i] + 0.5 * h * k2_[i];
  const double g3 = field(mid, stage_, k3_);
  for (std::size_t i = 0; i < d; ++i) stage_[i] = theta_[i] + h * k3_[i];
  const double g4 = field(right, stage_, k4_);

  double s = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    double x = theta_[i] + h / 6.0 * (k1_[i] + 2.0 * k2_[i] + 2.0 * k3_[i] + k4_[i]);
    if (x < 0.0) {
      if (x < -kThetaClip || !std::isfinite(x)) {
        throw Error(ErrorKind::NumericalBlowup,
                    "theta component " + std::to_string(i + 1) + " went to " +
                        std::to_string(x) + " at t = " + std::to_string(time_));
      }
      x = 0.0;
    }
    theta_[i] = x;
    s += x;
  }
  if (!(s > 0.0) || !std::isfinite(s)) {
    throw Error(ErrorKind::NumericalBlowup, "theta lost all mass at t = " + std::to_string(time_));
  }
  double check = 0.0;
  for (auto& x : theta_) {
    x /= s;
    check += x;
  }
  max_defect_ = std::max(max_defect_, std::abs(check - 1.0));
  log_rho_ += h / 6.0 * (g1 + 2.0 * g2 + 2.0 * g3 + g4);
}

LinearFlow::LinearFlow(const EnvironmentSpec& spec, Seed seed, Matrix initial, double step,
                       StepProbe probe)
    : stepper_(spec, seed, std::move(probe)), step_(step), y_(std::move(initial)) {
  if (y_.rows() != spec.dim() || y_.cols() == 0) {
    throw Error(ErrorKind::InvalidMatrix, "linear flow: initial block has wrong shape");
  }
  if (!(step > 0.0)) throw Error(ErrorKind::Parameter, "step must be positive");
  for (double x : y_.data())
    if (!(x >= 0.0)) throw Error(ErrorKind::Domain, "linear flow needs nonnegative columns");
  log_scales_.assign(y_.cols(), 0.0);
  renormalize();
}

void LinearFlow::advance_to(double t) {
  while (time_ < t) {
    const double next = next_time(time_, t, step_);
    stepper_.walk(time_, next, [this](double h, const Matrix& l, const Matrix& m,
                                      const Matrix& r) { rk4(h, l, m, r); });
    time_ = next;
  }
}

void LinearFlow::rk4(double h, const Matrix& left, const Matrix& mid, const Matrix& right) {
  const std::size_t n = y_.data().size();
  auto axpy = [&](double a, const Matrix& k) {
    for (std::size_t e = 0; e < n; ++e) stage_.data()[e] = y_.data()[e] + a * k.data()[e];
  };
  k1_ = left * y_;
  axpy(0.5 * h, k1_);
  k2_ = mid * stage_;
  axpy(0.5 * h, k2_);
  k3_ = mid * stage_;
  axpy(h, k3_);
  k4_ = right * stage_;
  for (std::size_t e = 0; e < n; ++e) {
    y_.data()[e] += h / 6.0 *
                    (k1_.data()[e] + 2.0 * k2_.data()[e] + 2.0 * k3_.data()[e] + k4_.data()[e]);
  }
  renormalize();
}

void LinearFlow::renormalize() {
  if (stage_.rows() != y_.rows() || stage_.cols() != y_.cols()) stage_ = y_;
  for (std::size_t j = 0; j < y_.cols(); ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < y_.rows(); ++i) s += std::max(0.0, y_(i, j));
    if (!(s > 0.0) || !std::isfinite(s)) {
      throw Error(ErrorKind::NumericalBlowup,
                  "column " + std::to_string(j + 1) + " lost all mass at t = " +
                      std::to_string(time_));
    }
    for (std::size_t i = 0; i < y_.rows(); ++i) {
      double x = y_(i, j) / s;
      if (x < 0.0) {
        if (x < -kMatrixClip) {
          throw Error(ErrorKind::NumericalBlowup,
                      "fundamental matrix entry (" + std::to_string(i + 1) + "," +
                          std::to_string(j + 1) + ") went negative at t = " +
                          std::to_string(time_));
        }
        x = 0.0;
      }
      y_(i, j) = x;
    }
    log_scales_[j] += std::log(s);
  }
}

TrajectoryRecord integrate(const EnvironmentSpec& spec, Seed seed, const SimplexPoint& theta0,
                           double horizon, double step, const IntegrationOptions& options) {
  check_horizon_and_step(horizon, step);
  const std::size_t thin = std::max<std::size_t>(1, options.thinning);
  ProjectiveFlow flow(spec, seed, theta0, step, options.step_probe);

  TrajectoryRecord rec;
  rec.sample_times.push_back(0.0);
  rec.theta_samples.push_back(theta0);
  rec.log_rho.push_back(0.0);
  rec.growth_integrand_avg.push_back(
      growth_integrand(matrix_at(spec, env_state_at(spec, seed, 0.0)), theta0.coords()));

  const auto steps = static_cast<std::size_t>(std::ceil(horizon / step - 1e-9));
  for (std::size_t k = 1; k <= steps; ++k) {
    const double t = k == steps ? horizon : std::min(horizon, static_cast<double>(k) * step);
    flow.advance_to(t);
    if (k % thin != 0 && k != steps) continue;
    rec.sample_times.push_back(t);
    rec.theta_samples.emplace_back(Vector(flow.theta().begin(), flow.theta().end()));
    rec.log_rho.push_back(flow.log_rho());
    rec.growth_integrand_avg.push_back(flow.log_rho() / t);
  }
  rec.max_simplex_defect = flow.max_simplex_defect();
  return rec;
}

void write_trajectory_csv(std::ostream& out, const TrajectoryRecord& record) {
  const std::size_t d = record.theta_samples.empty() ? 0 : record.theta_samples.front().dim();
  out << "time";
  for (std::size_t i = 0; i < d; ++i) out << ",theta_" << (i + 1);
  out << ",log_rho,running_avg\n";
  for (std::size_t k = 0; k < record.sample_times.size(); ++k) {
    out << format_real(record.sample_times[k]);
    for (std::size_t i = 0; i < d; ++i) out << ',' << format_real(record.theta_samples[k][i]);
    out << ',' << format_real(record.log_rho[k]) << ','
        << format_real(record.growth_integrand_avg[k]) << '\n';
  }
}

Matrix FundamentalMatrix::dense() const {
  Matrix m = normalized;
  for (std::size_t j = 0; j < m.cols(); ++j) {
    const double scale = std::exp(log_scales[j]);
    for (std::size_t i = 0; i < m.rows(); ++i) m(i, j) *= scale;
  }
  return m;
}

FundamentalMatrix fundamental_matrix(const EnvironmentSpec& spec, Seed seed, double horizon,
                                     double step) {
  const std::size_t d = spec.dim();
  if (horizon == 0.0) return {0.0, Matrix::identity(d), Vector(d, 0.0)};
  check_horizon_and_step(horizon, step);
  LinearFlow flow(spec, seed, Matrix::identity(d), step);
  flow.advance_to(horizon);
  return {horizon, flow.normalized(), flow.log_scales()};
}

std::vector<std::pair<double, double>> synchronized_pair_distance(
    const EnvironmentSpec& spec, Seed seed, const SimplexPoint& theta0,
    const SimplexPoint& theta0_other, double horizon, double step) {
  check_horizon_and_step(horizon, step);
  if (theta0 == theta0_other) {
    throw Error(ErrorKind::Domain, "synchronized pair needs two distinct initial conditions");
  }
  if (!theta0.interior() || !theta0_other.interior()) {
    throw Error(ErrorKind::Domain,
                "synchronized pair needs interior initial conditions (perturb boundary starts)");
  }
  ProjectiveFlow a(spec, seed, theta0, step);
  ProjectiveFlow b(spec, seed, theta0_other, step);
  std::vector<std::pair<double, double>> out;
  out.emplace_back(0.0, hilbert_distance(theta0.coords(), theta0_other.coords()));
  const auto steps = static_cast<std::size_t>(std::ceil(horizon / step - 1e-9));
  for (std::size_t k = 1; k <= steps; ++k) {
    const double t = k == steps ? horizon : std::min(horizon, static_cast<double>(k) * step);
    a.advance_to(t);
    b.advance_to(t);
    out.emplace_back(t, hilbert_distance(a.theta(), b.theta()));
  }
  return out;
}

}  // namespace coop
