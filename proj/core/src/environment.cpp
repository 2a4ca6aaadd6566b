#include "coop/environment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "coop/error.hpp"
#include "coop/linalg.hpp"
#include "coop/log.hpp"

namespace coop {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr std::size_t kValidationGrid = 1024;
constexpr std::size_t kAverageCheckGrid = 4096;

double wrap(double x) {
  double w = x - std::floor(x);
  return w >= 1.0 ? 0.0 : w;
}

std::string entry_name(std::size_t i, std::size_t j) {
  return "(" + std::to_string(i + 1) + "," + std::to_string(j + 1) + ")";
}

void require_positive(double x, const char* what) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw Error(ErrorKind::Parameter, std::string(what) + " must be positive and finite");
  }
}

// Value of the harmonic series of one coordinate at angle s, entry (i, j).
double harmonic_entry(const FourierHarmonics& h, double s, std::size_t i, std::size_t j) {
  double v = 0.0;
  for (std::size_t k = 0; k < h.cos_terms.size(); ++k) {
    const double angle = kTwoPi * static_cast<double>(k + 1) * s;
    v += h.cos_terms[k](i, j) * std::cos(angle) + h.sin_terms[k](i, j) * std::sin(angle);
  }
  return v;
}

void validate_fourier(const FourierMatrixMap& map, std::size_t coordinates) {
  const Matrix& a0 = map.constant;
  if (a0.empty() || !a0.is_square() || !a0.all_finite()) {
    throw Error(ErrorKind::InvalidMatrix, "A0 must be a finite non-empty square matrix");
  }
  if (map.coordinates.size() > coordinates) {
    throw Error(ErrorKind::InvalidMatrix, "matrix map has more harmonic coordinates (" +
                                              std::to_string(map.coordinates.size()) +
                                              ") than the environment (" +
                                              std::to_string(coordinates) + ")");
  }
  const std::size_t d = a0.rows();
  for (std::size_t c = 0; c < map.coordinates.size(); ++c) {
    const auto& h = map.coordinates[c];
    if (h.cos_terms.size() != h.sin_terms.size()) {
      throw Error(ErrorKind::InvalidMatrix, "cos and sin harmonic lists differ in length");
    }
    for (std::size_t k = 0; k < h.cos_terms.size(); ++k)
      for (const Matrix* m : {&h.cos_terms[k], &h.sin_terms[k]})
        if (m->rows() != d || m->cols() != d || !m->all_finite()) {
          throw Error(ErrorKind::InvalidMatrix,
                      "harmonic " + std::to_string(k + 1) + " of coordinate " +
                          std::to_string(c + 1) + " must be a finite " + std::to_string(d) +
                          "x" + std::to_string(d) + " matrix");
        }
  }
  // A(s) is a sum of per-coordinate series, so the worst off-diagonal value
  // over the product grid is A0_ij plus the per-coordinate minima.
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      if (i == j) continue;
      double worst = a0(i, j);
      std::vector<double> argmin(map.coordinates.size(), 0.0);
      for (std::size_t c = 0; c < map.coordinates.size(); ++c) {
        double lo = 0.0;
        bool first = true;
        for (std::size_t g = 0; g < kValidationGrid; ++g) {
          const double s = static_cast<double>(g) / kValidationGrid;
          const double v = harmonic_entry(map.coordinates[c], s, i, j);
          if (first || v < lo) {
            lo = v;
            argmin[c] = s;
            first = false;
          }
        }
        worst += lo;
      }
      if (worst < -MetzlerMatrix::kClampTolerance) {
        std::ostringstream os;
        os << "A(s) has negative off-diagonal entry " << entry_name(i, j) << " = " << worst
           << " at s = (";
        for (std::size_t c = 0; c < argmin.size(); ++c) os << (c ? ", " : "") << argmin[c];
        os << ")";
        throw Error(ErrorKind::NotMetzler, os.str());
      }
    }
}

void check_rational_independence(const std::vector<double>& a) {
  const std::size_t n = a.size();
  constexpr int kMax = 20;
  if (std::pow(2.0 * kMax + 1.0, static_cast<double>(n)) > 2e7) {
    warn("rational-independence check skipped for " + std::to_string(n) + " frequencies");
    return;
  }
  std::vector<int> k(n, -kMax);
  for (;;) {
    bool nonzero = false;
    double combo = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      nonzero = nonzero || k[i] != 0;
      combo += k[i] * a[i];
    }
    if (nonzero && std::abs(combo) < 1e-9) {
      std::ostringstream os;
      os << "frequencies look rationally dependent: integer combination (";
      for (std::size_t i = 0; i < n; ++i) os << (i ? ", " : "") << k[i];
      os << ") vanishes; the flow may not be uniquely ergodic";
      warn(os.str());
      return;
    }
    std::size_t pos = 0;
    while (pos < n && k[pos] == kMax) k[pos++] = -kMax;
    if (pos == n) break;
    ++k[pos];
  }
}

}  // namespace

std::string_view to_string(EnvironmentKind kind) {
  switch (kind) {
    case EnvironmentKind::Periodic: return "periodic";
    case EnvironmentKind::QuasiPeriodic: return "quasi_periodic";
    case EnvironmentKind::MarkovSwitch: return "markov_switch";
    case EnvironmentKind::CircleDiffusion: return "circle_diffusion";
  }
  return "unknown";
}

void FourierMatrixMap::evaluate_into(std::span<const double> s, Matrix& out) const {
  if (out.rows() != constant.rows() || out.cols() != constant.cols()) out = constant;
  std::copy(constant.data().begin(), constant.data().end(), out.data().begin());
  const std::size_t n = out.data().size();
  for (std::size_t c = 0; c < coordinates.size(); ++c) {
    const auto& h = coordinates[c];
    for (std::size_t k = 0; k < h.cos_terms.size(); ++k) {
      const double angle = kTwoPi * static_cast<double>(k + 1) * s[c];
      const double cs = std::cos(angle);
      const double sn = std::sin(angle);
      const double* cm = h.cos_terms[k].data().data();
      const double* sm = h.sin_terms[k].data().data();
      double* o = out.data().data();
      for (std::size_t e = 0; e < n; ++e) o[e] += cs * cm[e] + sn * sm[e];
    }
  }
}

EnvironmentSpec::EnvironmentSpec(Params params, std::optional<FourierMatrixMap> map,
                                 double timescale)
    : params_(std::move(params)), fourier_(std::move(map)), timescale_(timescale) {
  validate();
}

EnvironmentSpec EnvironmentSpec::periodic(FourierMatrixMap map, double phase, double timescale) {
  return EnvironmentSpec(PeriodicParams{phase}, std::move(map), timescale);
}

EnvironmentSpec EnvironmentSpec::quasi_periodic(FourierMatrixMap map,
                                                std::vector<double> frequencies,
                                                std::vector<double> phases, double timescale) {
  return EnvironmentSpec(QuasiPeriodicParams{std::move(frequencies), std::move(phases)},
                         std::move(map), timescale);
}

EnvironmentSpec EnvironmentSpec::markov_switch(Matrix rates, std::vector<MetzlerMatrix> matrices,
                                               std::size_t initial_state, double timescale) {
  return EnvironmentSpec(MarkovSwitchParams{std::move(rates), std::move(matrices), initial_state},
                         std::nullopt, timescale);
}

EnvironmentSpec EnvironmentSpec::circle_diffusion(FourierMatrixMap map, double sigma,
                                                  double initial_point, double timescale) {
  return EnvironmentSpec(CircleDiffusionParams{sigma, initial_point}, std::move(map), timescale);
}

EnvironmentSpec EnvironmentSpec::constant(const MetzlerMatrix& a) {
  return periodic(FourierMatrixMap{a.matrix(), {}});
}

EnvironmentSpec EnvironmentSpec::with_timescale(double timescale) const {
  EnvironmentSpec copy = *this;
  require_positive(timescale, "timescale");
  copy.timescale_ = timescale;
  return copy;
}

EnvironmentKind EnvironmentSpec::kind() const noexcept {
  return static_cast<EnvironmentKind>(params_.index());
}

bool EnvironmentSpec::is_constant() const noexcept {
  if (!fourier_) return false;
  for (const auto& h : fourier_->coordinates)
    if (!h.cos_terms.empty()) return false;
  return true;
}

double EnvironmentSpec::diffusion_step() const {
  const auto* p = std::get_if<CircleDiffusionParams>(&params_);
  if (!p) throw Error(ErrorKind::Domain, "diffusion_step: not a circle diffusion");
  return std::min(1e-3, 0.01 / (p->sigma * p->sigma));
}

void EnvironmentSpec::validate() {
  require_positive(timescale_, "timescale");
  switch (kind()) {
    case EnvironmentKind::Periodic: {
      const auto& p = std::get<PeriodicParams>(params_);
      if (!std::isfinite(p.phase)) throw Error(ErrorKind::Parameter, "phase must be finite");
      std::get<PeriodicParams>(params_).phase = wrap(p.phase);
      validate_fourier(*fourier_, 1);
      break;
    }
    case EnvironmentKind::CircleDiffusion: {
      auto& p = std::get<CircleDiffusionParams>(params_);
      require_positive(p.sigma, "sigma");
      if (!std::isfinite(p.initial_point)) {
        throw Error(ErrorKind::Parameter, "initial point must be finite");
      }
      p.initial_point = wrap(p.initial_point);
      validate_fourier(*fourier_, 1);
      break;
    }
    case EnvironmentKind::QuasiPeriodic: {
      auto& p = std::get<QuasiPeriodicParams>(params_);
      if (p.frequencies.empty()) {
        throw Error(ErrorKind::Parameter, "quasi-periodic environment needs frequencies");
      }
      if (p.phases.empty()) p.phases.assign(p.frequencies.size(), 0.0);
      if (p.phases.size() != p.frequencies.size()) {
        throw Error(ErrorKind::Parameter, "phases and frequencies differ in length");
      }
      for (std::size_t i = 0; i < p.frequencies.size(); ++i) {
        if (!std::isfinite(p.frequencies[i]) || !std::isfinite(p.phases[i])) {
          throw Error(ErrorKind::Parameter, "frequencies and phases must be finite");
        }
        p.phases[i] = wrap(p.phases[i]);
      }
      validate_fourier(*fourier_, p.frequencies.size());
      check_rational_independence(p.frequencies);
      break;
    }
    case EnvironmentKind::MarkovSwitch: {
      auto& p = std::get<MarkovSwitchParams>(params_);
      const Matrix& q = p.rates;
      const std::size_t n = q.rows();
      if (n == 0 || !q.is_square() || !q.all_finite()) {
        throw Error(ErrorKind::InvalidMatrix, "rate matrix must be finite, square, non-empty");
      }
      for (std::size_t i = 0; i < n; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
          if (i == j) continue;
          if (q(i, j) < 0.0) {
            throw Error(ErrorKind::Domain, "negative switching rate a" + entry_name(i, j) +
                                               " = " + std::to_string(q(i, j)));
          }
          row += q(i, j);
        }
        if (q(i, i) != 0.0 && std::abs(q(i, i) + row) > 1e-12 * (1.0 + row)) {
          throw Error(ErrorKind::Domain, "rate matrix diagonal a" + entry_name(i, i) +
                                             " must be 0 or minus the row sum");
        }
      }
      if (n > 1 && !is_irreducible(q)) {
        throw Error(ErrorKind::Reducible, "switching rate matrix is reducible");
      }
      if (p.matrices.size() != n) {
        throw Error(ErrorKind::InvalidMatrix, "expected " + std::to_string(n) +
                                                  " matrices, one per switching state, got " +
                                                  std::to_string(p.matrices.size()));
      }
      for (const auto& m : p.matrices)
        if (m.dim() != p.matrices.front().dim()) {
          throw Error(ErrorKind::InvalidMatrix, "switching matrices differ in dimension");
        }
      if (p.initial_state >= n) {
        throw Error(ErrorKind::Parameter, "initial state out of range");
      }
      dim_ = p.matrices.front().dim();
      return;
    }
  }
  dim_ = fourier_->dim();
}

EnvironmentPath::EnvironmentPath(const EnvironmentSpec& spec, Seed seed)
    : spec_(spec), rng_(seed.value) {
  if (const auto* m = spec_.markov()) {
    states_.push_back(m->initial_state);
  } else if (const auto* p = std::get_if<CircleDiffusionParams>(&spec_.params())) {
    cover_.push_back(p->initial_point);
  }
}

void EnvironmentPath::extend_jumps_past(double unscaled) {
  const auto& q = spec_.markov()->rates;
  const std::size_t n = q.rows();
  while (jump_times_.empty() ||
         (jump_times_.back() <= unscaled && std::isfinite(jump_times_.back()))) {
    // Holding time of the last state, then the state it jumps to.
    const std::size_t i = states_.back();
    double rate = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) rate += q(i, j);
    const double start = jump_times_.empty() ? 0.0 : jump_times_.back();
    if (rate <= 0.0) {
      jump_times_.push_back(std::numeric_limits<double>::infinity());
      return;
    }
    std::exponential_distribution<double> hold(rate);
    jump_times_.push_back(start + hold(rng_));
    double u = std::uniform_real_distribution<double>(0.0, rate)(rng_);
    std::size_t next = i;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i || q(i, j) <= 0.0) continue;
      next = j;
      if (u < q(i, j)) break;
      u -= q(i, j);
    }
    states_.push_back(next);
  }
}

EnvironmentPath::Segment EnvironmentPath::segment(std::size_t k) {
  if (!spec_.markov()) throw Error(ErrorKind::Domain, "segments exist only for switching paths");
  while (jump_times_.size() <= k) {
    if (!jump_times_.empty() && !std::isfinite(jump_times_.back())) {
      throw Error(ErrorKind::Domain, "path has no further segments");
    }
    extend_jumps_past(jump_times_.empty() ? 0.0 : jump_times_.back());
  }
  const double T = spec_.timescale();
  const double start = k == 0 ? 0.0 : jump_times_[k - 1] * T;
  return {states_[k], start, jump_times_[k] * T};
}

std::size_t EnvironmentPath::segment_index_at(double t) {
  const double u = t / spec_.timescale();
  extend_jumps_past(u);
  return static_cast<std::size_t>(
      std::upper_bound(jump_times_.begin(), jump_times_.end(), u) - jump_times_.begin());
}

double EnvironmentPath::diffusion_node(std::size_t n) {
  const auto* p = std::get_if<CircleDiffusionParams>(&spec_.params());
  if (!p) throw Error(ErrorKind::Domain, "diffusion_node: not a circle diffusion");
  const double increment = p->sigma * std::sqrt(spec_.diffusion_step());
  std::normal_distribution<double> gauss(0.0, 1.0);
  while (cover_.size() <= n) cover_.push_back(cover_.back() + increment * gauss(rng_));
  return wrap(cover_[n]);
}

EnvState EnvironmentPath::state_at(double t) {
  if (!(t >= 0.0)) throw Error(ErrorKind::Domain, "environment queried at negative time");
  const double u = t / spec_.timescale();
  switch (spec_.kind()) {
    case EnvironmentKind::Periodic:
      return CirclePoint{wrap(std::get<PeriodicParams>(spec_.params()).phase + u)};
    case EnvironmentKind::QuasiPeriodic: {
      const auto& p = std::get<QuasiPeriodicParams>(spec_.params());
      TorusPoint x{std::vector<double>(p.frequencies.size())};
      for (std::size_t i = 0; i < x.s.size(); ++i) x.s[i] = wrap(p.phases[i] + p.frequencies[i] * u);
      return x;
    }
    case EnvironmentKind::MarkovSwitch:
      return DiscreteState{states_[segment_index_at(t)]};
    case EnvironmentKind::CircleDiffusion: {
      const auto node = static_cast<std::size_t>(std::llround(u / spec_.diffusion_step()));
      return CirclePoint{diffusion_node(node)};
    }
  }
  throw Error(ErrorKind::Internal, "unknown environment kind");
}

EnvState env_state_at(const EnvironmentSpec& spec, Seed seed, double t) {
  if (!(t >= 0.0)) throw Error(ErrorKind::Domain, "environment queried at negative time");
  EnvironmentPath path(spec, seed);
  return path.state_at(t);
}

std::vector<double> stationary_distribution(const Matrix& rates) {
  const std::size_t n = rates.rows();
  if (n == 1) return {1.0};
  if (!is_irreducible(rates)) {
    throw Error(ErrorKind::Reducible, "stationary distribution needs an irreducible chain");
  }
  // Rows i < n-1: sum_j mu_j a_ji - mu_i sum_j a_ij = 0. Last row: sum mu = 1.
  Matrix lhs(n, n);
  Vector rhs(n, 0.0);
  for (std::size_t i = 0; i + 1 < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      lhs(i, j) += rates(j, i);
      lhs(i, i) -= rates(i, j);
    }
  for (std::size_t j = 0; j < n; ++j) lhs(n - 1, j) = 1.0;
  rhs[n - 1] = 1.0;
  Vector mu = solve_linear(std::move(lhs), std::move(rhs));
  for (auto& m : mu) m = std::max(0.0, m);
  const double s = sum(mu);
  for (auto& m : mu) m /= s;
  return mu;
}

InvariantMeasure invariant_measure(const EnvironmentSpec& spec) {
  if (const auto* m = spec.markov()) {
    return {InvariantMeasure::Kind::Discrete, stationary_distribution(m->rates)};
  }
  return {InvariantMeasure::Kind::Lebesgue, {}};
}

MetzlerMatrix average_matrix(const EnvironmentSpec& spec) {
  if (const auto* m = spec.markov()) {
    const auto mu = stationary_distribution(m->rates);
    Matrix avg(spec.dim(), spec.dim());
    for (std::size_t i = 0; i < mu.size(); ++i) avg += m->matrices[i].matrix() * mu[i];
    return MetzlerMatrix(std::move(avg), "average matrix");
  }
  const FourierMatrixMap& map = *spec.fourier();
  // Harmonics integrate to zero; confirm with a trapezoid rule per coordinate.
  const std::size_t d = map.dim();
  for (const auto& h : map.coordinates) {
    FourierMatrixMap single{Matrix(d, d), {h}};
    Matrix acc(d, d), value;
    for (std::size_t g = 0; g < kAverageCheckGrid; ++g) {
      const double s = static_cast<double>(g) / kAverageCheckGrid;
      single.evaluate_into(std::span<const double>(&s, 1), value);
      acc += value;
    }
    acc *= 1.0 / kAverageCheckGrid;
    if (inf_norm(acc.data()) > 1e-10) {
      throw Error(ErrorKind::Internal, "harmonic average check failed: " + to_string(acc));
    }
  }
  return MetzlerMatrix(map.constant, "average matrix");
}

MetzlerMatrix matrix_at(const EnvironmentSpec& spec, const EnvState& s) {
  if (const auto* m = spec.markov()) {
    const auto* st = std::get_if<DiscreteState>(&s);
    if (!st || st->index >= m->matrices.size()) {
      throw Error(ErrorKind::Domain, "state is not a valid switching state");
    }
    return m->matrices[st->index];
  }
  std::vector<double> coords;
  if (const auto* c = std::get_if<CirclePoint>(&s)) {
    if (spec.kind() == EnvironmentKind::QuasiPeriodic) {
      throw Error(ErrorKind::Domain, "quasi-periodic environment needs a torus point");
    }
    coords = {c->s};
  } else if (const auto* t = std::get_if<TorusPoint>(&s)) {
    if (spec.kind() != EnvironmentKind::QuasiPeriodic ||
        t->s.size() != std::get<QuasiPeriodicParams>(spec.params()).frequencies.size()) {
      throw Error(ErrorKind::Domain, "torus point does not match the environment");
    }
    coords = t->s;
  } else {
    throw Error(ErrorKind::Domain, "discrete state given to a continuous environment");
  }
  Matrix a;
  spec.fourier()->evaluate_into(coords, a);
  std::ostringstream where;
  where << "A(s) at s = (";
  for (std::size_t i = 0; i < coords.size(); ++i) where << (i ? ", " : "") << coords[i];
  where << ")";
  return MetzlerMatrix(std::move(a), where.str());
}

}  // namespace coop
