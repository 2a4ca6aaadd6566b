#pragma once

// Averages of functions of A(s) over the circle or torus (Lebesgue).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "coop/environment.hpp"
#include "coop/log.hpp"

namespace coop::detail {

struct TorusAverage {
  std::vector<double> values;
  bool converged = true;
  std::size_t points_per_axis = 0;
};

inline constexpr std::size_t kBaseQuadraturePoints = 4096;
inline constexpr double kQuadratureAgreement = 1e-8;
inline constexpr std::size_t kMaxQuadraturePoints = std::size_t{1} << 20;

/// Product-grid periodic trapezoid rule over the coordinates that carry
/// harmonics. Starts at 4096 total points, doubles the per-axis resolution
/// and accepts once two successive levels agree within 1e-8; gives up (with
/// a warning) past 2^20 points.
///
/// f(const Matrix& a, std::span<const double> s, std::span<double> out)
template <class F>
TorusAverage torus_average(const EnvironmentSpec& spec, std::size_t count, F&& f) {
  const FourierMatrixMap& map = *spec.fourier();
  std::vector<std::size_t> active;
  for (std::size_t c = 0; c < map.coordinates.size(); ++c)
    if (!map.coordinates[c].cos_terms.empty()) active.push_back(c);

  std::vector<double> s(std::max<std::size_t>(1, map.coordinates.size()), 0.0);
  Matrix a;
  std::vector<double> out(count);
  TorusAverage result;
  result.values.assign(count, 0.0);

  if (active.empty()) {
    map.evaluate_into(s, a);
    f(static_cast<const Matrix&>(a), std::span<const double>(s), std::span<double>(out));
    result.values = out;
    result.points_per_axis = 1;
    return result;
  }

  const std::size_t n = active.size();
  auto level = [&](std::size_t m) {
    std::vector<double> acc(count, 0.0);
    std::vector<std::size_t> idx(n, 0);
    std::size_t total = 0;
    for (;;) {
      for (std::size_t c = 0; c < n; ++c) s[active[c]] = static_cast<double>(idx[c]) / m;
      map.evaluate_into(s, a);
      f(static_cast<const Matrix&>(a), std::span<const double>(s), std::span<double>(out));
      for (std::size_t q = 0; q < count; ++q) acc[q] += out[q];
      ++total;
      std::size_t pos = 0;
      while (pos < n && ++idx[pos] == m) idx[pos++] = 0;
      if (pos == n) break;
    }
    for (auto& v : acc) v /= static_cast<double>(total);
    return acc;
  };

  std::size_t m = static_cast<std::size_t>(
      std::ceil(std::pow(static_cast<double>(kBaseQuadraturePoints), 1.0 / n) - 1e-9));
  std::vector<double> coarse = level(m);
  for (;;) {
    const std::size_t finer = 2 * m;
    if (std::pow(static_cast<double>(finer), static_cast<double>(n)) >
        static_cast<double>(kMaxQuadraturePoints)) {
      warn("torus quadrature did not reach 1e-8 agreement; using the finest level");
      result.values = coarse;
      result.converged = false;
      result.points_per_axis = m;
      return result;
    }
    std::vector<double> fine = level(finer);
    double diff = 0.0;
    for (std::size_t q = 0; q < count; ++q) diff = std::max(diff, std::abs(fine[q] - coarse[q]));
    coarse = std::move(fine);
    m = finer;
    if (diff <= kQuadratureAgreement) break;
  }
  result.values = coarse;
  result.points_per_axis = m;
  return result;
}

}  // namespace coop::detail
