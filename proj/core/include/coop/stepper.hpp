#pragma once

#include <cmath>
#include <functional>

#include "coop/environment.hpp"
#include "coop/error.hpp"

namespace coop {

/// Called with the bounds [t0, t1] of every RK4 sub-step actually taken.
using StepProbe = std::function<void(double t0, double t1)>;

/// Walks an environment path in RK4 sub-steps and supplies the stage
/// matrices A(left), A(mid), A(right) for each.
///
/// Periodic and quasi-periodic environments are evaluated in closed form at
/// the stage times. Switching paths are split exactly at jump times so that
/// every sub-step sees one constant matrix. Circle diffusions are split on
/// the Euler-Maruyama grid and frozen at each piece's left endpoint.
///
/// Calls to walk() must be made with non-decreasing times.
class EnvironmentStepper {
 public:
  EnvironmentStepper(const EnvironmentSpec& spec, Seed seed, StepProbe probe = {})
      : path_(spec, seed), probe_(std::move(probe)) {
    const auto& sp = path_.spec();
    left_ = mid_ = right_ = Matrix(sp.dim(), sp.dim());
    if (sp.kind() == EnvironmentKind::CircleDiffusion) {
      grid_ = sp.diffusion_step() * sp.timescale();
    }
  }

  EnvironmentPath& path() noexcept { return path_; }
  const EnvironmentSpec& spec() const noexcept { return path_.spec(); }

  /// Matrix A(omega_t) at time t.
  const Matrix& matrix_at_time(double t) {
    if (const auto* m = spec().markov()) {
      return m->matrices[path_.segment(advance_segment(t)).state].matrix();
    }
    evaluate(t, scratch_);
    return scratch_;
  }

  template <class Fn>
  void walk(double t0, double t1, Fn&& fn) {
    switch (spec().kind()) {
      case EnvironmentKind::Periodic:
      case EnvironmentKind::QuasiPeriodic:
        evaluate(t0, left_);
        evaluate(0.5 * (t0 + t1), mid_);
        evaluate(t1, right_);
        if (probe_) probe_(t0, t1);
        fn(t1 - t0, left_, mid_, right_);
        return;
      case EnvironmentKind::MarkovSwitch: {
        const auto& mats = spec().markov()->matrices;
        double t = t0;
        while (t < t1) {
          const auto seg = path_.segment(advance_segment(t));
          const double end = seg.end < t1 ? seg.end : t1;
          if (probe_) probe_(t, end);
          const Matrix& a = mats[seg.state].matrix();
          fn(end - t, a, a, a);
          t = end;
        }
        return;
      }
      case EnvironmentKind::CircleDiffusion: {
        double t = t0;
        while (t < t1) {
          double next = (std::floor(t / grid_) + 1.0) * grid_;
          if (next - t < 1e-9 * grid_) next += grid_;
          const double end = next < t1 ? next : t1;
          evaluate(t, left_);
          if (probe_) probe_(t, end);
          fn(end - t, left_, left_, left_);
          t = end;
        }
        return;
      }
    }
  }

 private:
  std::size_t advance_segment(double t) {
    while (path_.segment(segment_).end <= t) ++segment_;
    return segment_;
  }

  void evaluate(double t, Matrix& out) {
    const EnvState s = path_.state_at(t);
    if (const auto* c = std::get_if<CirclePoint>(&s)) {
      spec().fourier()->evaluate_into(std::span<const double>(&c->s, 1), out);
    } else if (const auto* x = std::get_if<TorusPoint>(&s)) {
      spec().fourier()->evaluate_into(x->s, out);
    } else {
      out = spec().markov()->matrices[std::get<DiscreteState>(s).index].matrix();
    }
  }

  EnvironmentPath path_;
  StepProbe probe_;
  Matrix left_, mid_, right_, scratch_;
  double grid_ = 0.0;
  std::size_t segment_ = 0;
};

}  // namespace coop
