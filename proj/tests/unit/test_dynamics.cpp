#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "coop/dynamics.hpp"
#include "coop/error.hpp"
#include "coop/linalg.hpp"
#include "helpers.hpp"

using namespace coop;

namespace {

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::Internal;
}

EnvironmentSpec smooth_periodic() {
  FourierMatrixMap map{Matrix{{-1, 2, 0.5}, {1, -2, 1}, {0.5, 1, -0.5}}, {}};
  map.coordinates.push_back(
      {{Matrix{{0.8, 0.5, 0.1}, {-0.3, 0.4, 0.2}, {0.1, -0.2, 0.3}}},
       {Matrix{{-0.5, 0.2, 0.1}, {0.4, 0.6, -0.3}, {0.2, 0.1, -0.4}}}});
  return EnvironmentSpec::periodic(map);
}

}  // namespace

TEST_CASE("vector field") {
  const Vector f = vector_field(Matrix{{0, 1}, {1, 0}}, Vector{1, 0});
  CHECK(f[0] == -1.0);
  CHECK(f[1] == 1.0);

  const MetzlerMatrix a{{1, 2}, {3, 0}};
  const PerronPair p = perron_eigenpair(a);
  for (double x : vector_field(a, p.vector.coords())) CHECK(std::abs(x) < 1e-12);

  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t d = 1 + trial % 5;
    const auto m = testing_support::to_matrix(oracle::random_metzler(rng, d));
    const auto th = oracle::random_simplex(rng, d);
    CHECK(std::abs(sum(vector_field(m, th))) < 1e-14 * (1 + inf_norm(m)));
  }
  CHECK(kind_of([] { vector_field(Matrix{{1, 0}, {0, 1}}, Vector{1}); }) ==
        ErrorKind::InvalidMatrix);
}

TEST_CASE("integrate: scalar growth is exact") {
  const auto spec = EnvironmentSpec::constant(MetzlerMatrix{{-0.7}});
  const auto rec = integrate(spec, Seed{}, SimplexPoint::barycenter(1), 10.0, 1e-2);
  CHECK(rec.log_rho.back() == doctest::Approx(-7.0).epsilon(1e-12));
  CHECK(std::abs(rec.log_rho.back() + 7.0) < 1e-9);
  CHECK(rec.log_rho.front() == 0.0);
  CHECK(rec.sample_times.front() == 0.0);
  CHECK(rec.sample_times.back() == 10.0);
}

TEST_CASE("integrate: constant system converges to the Perron vector") {
  const auto spec = EnvironmentSpec::constant(MetzlerMatrix{{1, 2}, {3, 0}});
  const auto rec = integrate(spec, Seed{}, SimplexPoint({1, 0}), 50.0, 1e-3);
  CHECK(std::abs(rec.theta_samples.back()[0] - 0.5) < 1e-6);
  CHECK(std::abs(rec.theta_samples.back()[1] - 0.5) < 1e-6);
}

TEST_CASE("integrate: record invariants") {
  const auto spec = testing_support::destabilization_pair(0.3);
  const auto rec = integrate(spec, Seed{3}, SimplexPoint({0.9, 0.1}), 20.0, 1e-2);
  REQUIRE(rec.sample_times.size() == rec.theta_samples.size());
  REQUIRE(rec.sample_times.size() == rec.log_rho.size());
  REQUIRE(rec.sample_times.size() == rec.growth_integrand_avg.size());
  for (std::size_t k = 1; k < rec.sample_times.size(); ++k)
    CHECK(rec.sample_times[k] > rec.sample_times[k - 1]);
  for (const auto& th : rec.theta_samples) {
    CHECK(std::abs(sum(th.coords()) - 1.0) <= 1e-12);
    CHECK(th.interior());
  }
  CHECK(rec.growth_integrand_avg.back() * 20.0 == doctest::Approx(rec.log_rho.back()).epsilon(1e-12));
  CHECK(std::abs(rec.growth_integrand_avg.back() * 20.0 - rec.log_rho.back()) < 1e-9);
  CHECK(rec.max_simplex_defect <= 1e-12);

  IntegrationOptions thin;
  thin.thinning = 7;
  const auto sparse = integrate(spec, Seed{3}, SimplexPoint({0.9, 0.1}), 20.0, 1e-2, thin);
  CHECK(sparse.sample_times.back() == 20.0);
  CHECK(sparse.log_rho.back() == rec.log_rho.back());
  CHECK(sparse.sample_times.size() < rec.sample_times.size() / 6);
}

TEST_CASE("integrate: parameter errors") {
  const auto spec = EnvironmentSpec::constant(MetzlerMatrix{{-1}});
  CHECK(kind_of([&] { integrate(spec, Seed{}, SimplexPoint::barycenter(1), 1.0, 1.0); }) ==
        ErrorKind::Parameter);
  CHECK(kind_of([&] { integrate(spec, Seed{}, SimplexPoint::barycenter(1), 1.0, -0.1); }) ==
        ErrorKind::Parameter);
  CHECK(kind_of([&] { integrate(spec, Seed{}, SimplexPoint::barycenter(2), 1.0, 0.1); }) ==
        ErrorKind::InvalidMatrix);
}

TEST_CASE("no RK4 step straddles a jump") {
  const auto spec = testing_support::destabilization_pair(0.05);
  EnvironmentPath path(spec, Seed{12});
  std::vector<double> jumps;
  for (std::size_t k = 0; path.segment(k).start < 10.0; ++k) jumps.push_back(path.segment(k).end);

  std::size_t steps = 0, straddles = 0;
  IntegrationOptions opts;
  opts.step_probe = [&](double t0, double t1) {
    ++steps;
    for (double j : jumps)
      if (t0 < j && j < t1) ++straddles;
  };
  integrate(spec, Seed{12}, SimplexPoint::barycenter(2), 10.0, 0.01, opts);
  CHECK(straddles == 0);
  CHECK(steps > 1000 + jumps.size() / 2);
}

TEST_CASE("RK4 step-halving order") {
  const auto spec = smooth_periodic();
  auto end = [&](double h) {
    return integrate(spec, Seed{}, SimplexPoint::barycenter(3), 4.0, h).log_rho.back();
  };
  const double l1 = end(0.1), l2 = end(0.05), l3 = end(0.025);
  const double ratio = (l1 - l2) / (l2 - l3);
  CHECK(ratio >= 8.0);
  CHECK(ratio <= 32.0);
}

TEST_CASE("fundamental matrix") {
  const oracle::Dense a{{-1, 2, 0.3}, {0.5, -0.2, 1}, {1.2, 0, -2}};
  const auto spec = EnvironmentSpec::constant(MetzlerMatrix(testing_support::to_matrix(a)));
  const FundamentalMatrix phi = fundamental_matrix(spec, Seed{}, 1.0, 1e-3);
  const Matrix dense = phi.dense();
  const auto expected = oracle::expm(a, 1.0);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) CHECK(std::abs(dense(i, j) - expected[i][j]) < 1e-8);

  const FundamentalMatrix zero = fundamental_matrix(spec, Seed{}, 0.0, 1e-3);
  CHECK(zero.dense() == Matrix::identity(3));

  for (double x : phi.normalized.data()) CHECK(x >= 0.0);
  for (std::size_t i = 0; i < 3; ++i) CHECK(phi.normalized(i, i) > 0.0);
}

TEST_CASE("fundamental matrix columns are projective trajectories") {
  const auto spec = testing_support::destabilization_pair(0.5);
  const FundamentalMatrix phi = fundamental_matrix(spec, Seed{21}, 5.0, 1e-3);
  for (std::size_t j = 0; j < 2; ++j) {
    const auto rec = integrate(spec, Seed{21}, SimplexPoint::vertex(2, j), 5.0, 1e-3);
    for (std::size_t i = 0; i < 2; ++i)
      CHECK(std::abs(phi.normalized(i, j) - rec.theta_samples.back()[i]) < 1e-8);
    CHECK(std::abs(phi.log_scales[j] - rec.log_rho.back()) < 1e-8);
  }
}

TEST_CASE("fundamental matrix survives long horizons") {
  const auto spec = EnvironmentSpec::constant(MetzlerMatrix{{5, 1}, {1, 5}});
  const FundamentalMatrix phi = fundamental_matrix(spec, Seed{}, 500.0, 1e-2);
  // Column sums of exp(tA) e1 are exactly e^{6t}; RK4 loses (6h)^5/120 per step.
  CHECK(std::abs(phi.log_scales[0] - 3000.0) < 1e-3);
  CHECK(std::abs(phi.log_scales[1] - 3000.0) < 1e-3);
}

TEST_CASE("synchronized pair distance") {
  const auto spec = EnvironmentSpec::constant(MetzlerMatrix{{1, 2}, {3, 0}});
  const auto d = synchronized_pair_distance(spec, Seed{}, SimplexPoint({0.9, 0.1}),
                                            SimplexPoint({0.2, 0.8}), 50.0, 1e-2);
  CHECK(d.front().first == 0.0);
  CHECK(d.back().first == 50.0);
  CHECK(d.back().second < 1e-6);

  // Eventually non-increasing once the flow is positive (immediately here).
  const auto sw = testing_support::destabilization_pair(1.0);
  const auto e = synchronized_pair_distance(sw, Seed{5}, SimplexPoint({0.7, 0.3}),
                                            SimplexPoint({0.1, 0.9}), 30.0, 1e-2);
  std::size_t increases = 0;
  for (std::size_t k = 1; k < e.size(); ++k)
    if (e[k].second > e[k - 1].second * (1 + 1e-9) + 1e-14) ++increases;
  CHECK(increases == 0);

  CHECK(kind_of([&] {
          synchronized_pair_distance(spec, Seed{}, SimplexPoint({0.5, 0.5}),
                                     SimplexPoint({0.5, 0.5}), 1.0, 0.1);
        }) == ErrorKind::Domain);
  CHECK(kind_of([&] {
          synchronized_pair_distance(spec, Seed{}, SimplexPoint({1, 0}), SimplexPoint({0.5, 0.5}),
                                     1.0, 0.1);
        }) == ErrorKind::Domain);
}

TEST_CASE("positive starts stay positive") {
  const auto spec = testing_support::destabilization_pair(2.0);
  const auto rec = integrate(spec, Seed{8}, SimplexPoint({0.999, 0.001}), 40.0, 1e-2);
  for (const auto& th : rec.theta_samples) CHECK(th.interior());
}

TEST_CASE("trajectory csv") {
  const auto spec = EnvironmentSpec::constant(MetzlerMatrix{{1, 2}, {3, 0}});
  const auto rec = integrate(spec, Seed{}, SimplexPoint({1, 0}), 1.0, 0.25);
  std::ostringstream out;
  write_trajectory_csv(out, rec);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "time,theta_1,theta_2,log_rho,running_avg");
  std::size_t rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 5);
}

TEST_CASE("quasi-periodic and diffusion environments integrate") {
  std::mt19937_64 rng(14);
  const auto map = testing_support::random_fourier_map(rng, 3, 1, 2);
  const auto q = EnvironmentSpec::quasi_periodic(map, {1.0, std::sqrt(2.0)}, {0.0, 0.0});
  const auto rq = integrate(q, Seed{}, SimplexPoint::barycenter(3), 10.0, 1e-2);
  CHECK(std::isfinite(rq.log_rho.back()));

  const auto map1 = testing_support::random_fourier_map(rng, 3, 2, 1);
  const auto c = EnvironmentSpec::circle_diffusion(map1, 3.0, 0.0);
  const auto rc = integrate(c, Seed{4}, SimplexPoint::barycenter(3), 10.0, 1e-2);
  CHECK(std::isfinite(rc.log_rho.back()));
  const auto rc2 = integrate(c, Seed{4}, SimplexPoint::barycenter(3), 10.0, 1e-2);
  CHECK(rc.log_rho.back() == rc2.log_rho.back());
  for (const auto& th : rc.theta_samples) CHECK(std::abs(sum(th.coords()) - 1.0) <= 1e-12);
}
