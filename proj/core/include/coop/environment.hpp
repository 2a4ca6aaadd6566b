#pragma once

#include <cstddef>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "coop/matrix.hpp"
#include "coop/seed.hpp"

namespace coop {

enum class EnvironmentKind { Periodic, QuasiPeriodic, MarkovSwitch, CircleDiffusion };

std::string_view to_string(EnvironmentKind kind);

struct CirclePoint {
  double s;
  bool operator==(const CirclePoint&) const = default;
};
struct TorusPoint {
  std::vector<double> s;
  bool operator==(const TorusPoint&) const = default;
};
/// Zero-based state index.
struct DiscreteState {
  std::size_t index;
  bool operator==(const DiscreteState&) const = default;
};
using EnvState = std::variant<CirclePoint, TorusPoint, DiscreteState>;

/// Harmonics k = 1..K of one angular coordinate: cos_terms[k-1] multiplies
/// cos(2 pi k s), sin_terms[k-1] multiplies sin(2 pi k s). Both lists have
/// the same length; missing terms are zero matrices.
struct FourierHarmonics {
  std::vector<Matrix> cos_terms;
  std::vector<Matrix> sin_terms;
  bool operator==(const FourierHarmonics&) const = default;
};

/// A(s) = A0 + sum over coordinates c and k of
///   C_{c,k} cos(2 pi k s_c) + D_{c,k} sin(2 pi k s_c).
/// Circle environments use exactly one coordinate.
struct FourierMatrixMap {
  Matrix constant;
  std::vector<FourierHarmonics> coordinates;

  std::size_t dim() const noexcept { return constant.rows(); }
  /// Evaluates into `out` (resized as needed) without Metzler validation.
  void evaluate_into(std::span<const double> s, Matrix& out) const;
  bool operator==(const FourierMatrixMap&) const = default;
};

struct PeriodicParams {
  double phase = 0.0;
  bool operator==(const PeriodicParams&) const = default;
};
struct QuasiPeriodicParams {
  std::vector<double> frequencies;
  std::vector<double> phases;
  bool operator==(const QuasiPeriodicParams&) const = default;
};
struct MarkovSwitchParams {
  Matrix rates;  // off-diagonal a_ij >= 0; diagonal 0 or -(row sum)
  std::vector<MetzlerMatrix> matrices;
  std::size_t initial_state = 0;
  bool operator==(const MarkovSwitchParams&) const = default;
};
struct CircleDiffusionParams {
  double sigma = 1.0;
  double initial_point = 0.0;
  bool operator==(const CircleDiffusionParams&) const = default;
};

/// An environment process on a compact state space together with the map
/// s -> A(s) and a timescale T (the process is read at t / T).
///
/// Instances are validated at construction and immutable afterwards.
class EnvironmentSpec {
 public:
  using Params = std::variant<PeriodicParams, QuasiPeriodicParams, MarkovSwitchParams,
                              CircleDiffusionParams>;

  static EnvironmentSpec periodic(FourierMatrixMap map, double phase = 0.0,
                                  double timescale = 1.0);
  static EnvironmentSpec quasi_periodic(FourierMatrixMap map, std::vector<double> frequencies,
                                        std::vector<double> phases, double timescale = 1.0);
  static EnvironmentSpec markov_switch(Matrix rates, std::vector<MetzlerMatrix> matrices,
                                       std::size_t initial_state = 0, double timescale = 1.0);
  static EnvironmentSpec circle_diffusion(FourierMatrixMap map, double sigma,
                                          double initial_point = 0.0, double timescale = 1.0);
  /// Periodic environment with no harmonics, i.e. A(s) = a.
  static EnvironmentSpec constant(const MetzlerMatrix& a);

  EnvironmentSpec with_timescale(double timescale) const;

  EnvironmentKind kind() const noexcept;
  std::size_t dim() const noexcept { return dim_; }
  double timescale() const noexcept { return timescale_; }
  const Params& params() const noexcept { return params_; }
  /// Null for MarkovSwitch.
  const FourierMatrixMap* fourier() const noexcept { return fourier_ ? &*fourier_ : nullptr; }
  const MarkovSwitchParams* markov() const noexcept {
    return std::get_if<MarkovSwitchParams>(&params_);
  }
  /// True for a Fourier environment without harmonics.
  bool is_constant() const noexcept;

  /// Euler-Maruyama step on the unscaled clock: min(1e-3, 0.01 / sigma^2).
  double diffusion_step() const;

  bool operator==(const EnvironmentSpec&) const = default;

 private:
  EnvironmentSpec(Params params, std::optional<FourierMatrixMap> map, double timescale);
  void validate();

  Params params_;
  std::optional<FourierMatrixMap> fourier_;
  double timescale_ = 1.0;
  std::size_t dim_ = 0;
};

/// Invariant probability of the environment: Lebesgue on the circle/torus
/// or an explicit vector for a finite chain.
struct InvariantMeasure {
  enum class Kind { Lebesgue, Discrete };
  Kind kind;
  std::vector<double> weights;  // Discrete only
};

/// Mutable, lazily extended realization of the environment for one seed.
/// Confined to one thread at a time.
class EnvironmentPath {
 public:
  struct Segment {
    std::size_t state;
    double start;  // scaled time
    double end;
  };

  EnvironmentPath(const EnvironmentSpec& spec, Seed seed);

  const EnvironmentSpec& spec() const noexcept { return spec_; }

  EnvState state_at(double t);

  /// k-th holding interval of a MarkovSwitch path (scaled time).
  Segment segment(std::size_t k);
  /// Index of the holding interval containing t (right-continuous path).
  std::size_t segment_index_at(double t);

  /// Wrapped circle position at grid node n of a CircleDiffusion path; node
  /// n sits at scaled time n * diffusion_step() * T.
  double diffusion_node(std::size_t n);

 private:
  void extend_jumps_past(double unscaled);

  EnvironmentSpec spec_;
  std::mt19937_64 rng_;
  // MarkovSwitch: jump_times_[k] is the unscaled end of segment k.
  std::vector<std::size_t> states_;
  std::vector<double> jump_times_;
  // CircleDiffusion: positions on the universal cover.
  std::vector<double> cover_;
};

EnvState env_state_at(const EnvironmentSpec& spec, Seed seed, double t);

InvariantMeasure invariant_measure(const EnvironmentSpec& spec);

/// Stationary distribution of an irreducible rate matrix from the balance
/// equations with the normalization row sum mu = 1.
std::vector<double> stationary_distribution(const Matrix& rates);

MetzlerMatrix average_matrix(const EnvironmentSpec& spec);

MetzlerMatrix matrix_at(const EnvironmentSpec& spec, const EnvState& s);

}  // namespace coop
