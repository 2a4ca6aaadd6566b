#include <doctest.h>

#include <cmath>
#include <random>

#include "coop/error.hpp"
#include "coop/linalg.hpp"
#include "coop/regimes.hpp"
#include "helpers.hpp"

using namespace coop;
using testing_support::destabilization_pair;

namespace {

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::Internal;
}

}  // namespace

TEST_CASE("fast limit") {
  const auto f = predict_fast_limit(destabilization_pair());
  CHECK(f.lambda == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(f.theta[0] == doctest::Approx(0.5));

  const MetzlerMatrix a{{1, 2}, {3, 0}};
  CHECK(predict_fast_limit(EnvironmentSpec::constant(a)).lambda == doctest::Approx(3.0));

  const auto scalar = EnvironmentSpec::markov_switch(Matrix{{0, 1}, {2, 0}},
                                                     {MetzlerMatrix{{-1}}, MetzlerMatrix{{1}}});
  CHECK(predict_fast_limit(scalar).lambda == doctest::Approx(-1.0 / 3.0));

  const auto reducible_avg = EnvironmentSpec::markov_switch(
      Matrix{{0, 1}, {1, 0}}, {MetzlerMatrix{{-1, 0}, {1, -1}}, MetzlerMatrix{{0, 0}, {2, 0}}});
  CHECK(kind_of([&] { predict_fast_limit(reducible_avg); }) == ErrorKind::AssumptionViolation);
}

TEST_CASE("slow limit") {
  const auto pair = destabilization_pair();
  CHECK(kind_of([&] { predict_slow_limit(pair); }) == ErrorKind::AssumptionViolation);
  const auto s = predict_slow_limit(pair, SlowLimitCheck::Report);
  CHECK(s.value == doctest::Approx(-1.0));
  CHECK_FALSE(s.hypothesis_holds);
  CHECK(s.first_reducible_state == "state 1");

  const MetzlerMatrix a{{1, 2}, {3, 0}};
  CHECK(predict_slow_limit(EnvironmentSpec::constant(a)).value == doctest::Approx(3.0));

  // A(s) = A0 + c(s) I: shift equivariance under the integral.
  FourierMatrixMap map{Matrix{{-1, 2}, {0.5, -0.3}}, {}};
  map.coordinates.push_back({{Matrix{{0.9, 0}, {0, 0.9}}}, {Matrix{{0.2, 0}, {0, 0.2}}}});
  const auto sp = predict_slow_limit(EnvironmentSpec::periodic(map));
  CHECK(sp.value == doctest::Approx(oracle::eig2(-1, 2, 0.5, -0.3)[0]).epsilon(1e-9));
  CHECK(sp.quadrature_converged);

  // A Fourier map that loses irreducibility at s = 1/2.
  FourierMatrixMap degenerate{Matrix{{-1, 1}, {1, -1}}, {}};
  degenerate.coordinates.push_back({{Matrix{{0, 1}, {0, 0}}}, {Matrix(2, 2)}});
  const auto spec = EnvironmentSpec::periodic(degenerate);
  CHECK(kind_of([&] { predict_slow_limit(spec); }) == ErrorKind::AssumptionViolation);
  const auto rep = predict_slow_limit(spec, SlowLimitCheck::Report);
  CHECK_FALSE(rep.hypothesis_holds);
  CHECK(rep.first_reducible_state.find("0.5") != std::string::npos);
}

TEST_CASE("slow limit of a 2x2 Fourier system against a fine quadrature") {
  FourierMatrixMap map{Matrix{{-1, 2}, {1, 0.5}}, {}};
  map.coordinates.push_back({{Matrix{{1.5, 0.5}, {0.2, -0.7}}}, {Matrix{{0.3, 0.4}, {-0.5, 0.2}}}});
  const auto spec = EnvironmentSpec::periodic(map);
  const double value = predict_slow_limit(spec).value;
  double ref = 0.0;
  const int n = 200000;
  for (int k = 0; k < n; ++k) {
    const double s = (k + 0.5) / n;
    const double c = std::cos(2 * M_PI * s), sn = std::sin(2 * M_PI * s);
    ref += oracle::eig2(-1 + 1.5 * c + 0.3 * sn, 2 + 0.5 * c + 0.4 * sn, 1 + 0.2 * c - 0.5 * sn,
                        0.5 - 0.7 * c + 0.2 * sn)[0];
  }
  CHECK(value == doctest::Approx(ref / n).epsilon(1e-9));
}

TEST_CASE("occupation concentration") {
  const auto c = EnvironmentSpec::constant(MetzlerMatrix{{1, 2}, {3, 0}});
  for (double T : {0.01, 100.0}) {
    CHECK(occupation_concentration(c, T, Seed{}, 50, 1e-2) < 1e-8);
  }
  const auto pair = destabilization_pair();
  const double fast = occupation_concentration(pair, 1e-3, Seed{5}, 50, 1e-3);
  CHECK(fast < 0.1);
  ConcentrationOptions slow_mode;
  slow_mode.mode = ConcentrationMode::Slow;
  const double fast_ref_slow_mode = occupation_concentration(pair, 1e-3, Seed{5}, 50, 1e-3, slow_mode);
  CHECK(fast_ref_slow_mode > 0.5);
}

TEST_CASE("log spaced grid") {
  const auto g = log_spaced_grid(1e-3, 1e3);
  REQUIRE(g.size() == 31);
  CHECK(g.front() == 1e-3);
  CHECK(g.back() == 1e3);
  for (std::size_t i = 1; i < g.size(); ++i) {
    CHECK(g[i] > g[i - 1]);
    CHECK(g[i] / g[i - 1] == doctest::Approx(std::pow(10.0, 0.2)));
  }
  CHECK(log_spaced_grid(2.0, 2.0) == std::vector<double>{2.0});
  CHECK(kind_of([] { log_spaced_grid(0.0, 1.0); }) == ErrorKind::Parameter);
  CHECK(kind_of([] { log_spaced_grid(2.0, 1.0); }) == ErrorKind::Parameter);
}

TEST_CASE("sweep") {
  const auto c = EnvironmentSpec::constant(MetzlerMatrix{{1, 2}, {3, 0}});
  const auto r = sweep_lambda(c, {0.1, 1.0, 10.0}, Seed{1}, 50, 1e-2);
  REQUIRE(r.lambda_hats.size() == 3);
  REQUIRE(r.concentration.size() == 3);
  for (const auto& e : r.lambda_hats) CHECK(std::abs(e.value - 3.0) < 1e-3);
  CHECK(r.lambda_hats[2].horizon == 1000.0);
  CHECK(r.lambda_hats[0].horizon == 50.0);
  CHECK(r.lambda_hats[0].seed == derive_seed(Seed{1}, 0));
  CHECK(r.fast_limit == doctest::Approx(3.0));
  CHECK(r.slow_limit == doctest::Approx(3.0));

  CHECK(kind_of([&] { sweep_lambda(c, {1.0, 0.5}, Seed{}, 10, 0.1); }) == ErrorKind::Parameter);
  CHECK(kind_of([&] { sweep_lambda(c, {}, Seed{}, 10, 0.1); }) == ErrorKind::Parameter);
  CHECK(kind_of([&] { sweep_lambda(c, {-1.0}, Seed{}, 10, 0.1); }) == ErrorKind::Parameter);
}

TEST_CASE("sweep results do not depend on the worker count") {
  const auto pair = destabilization_pair();
  const std::vector<double> Ts{0.01, 0.1, 1.0, 10.0};
  SweepOptions one, four;
  one.threads = 1;
  four.threads = 4;
  const auto a = sweep_lambda(pair, Ts, Seed{77}, 20, 1e-2, one);
  const auto b = sweep_lambda(pair, Ts, Seed{77}, 20, 1e-2, four);
  for (std::size_t i = 0; i < Ts.size(); ++i) {
    CHECK(a.lambda_hats[i].value == b.lambda_hats[i].value);
    CHECK(a.concentration[i] == b.concentration[i]);
  }
  CHECK_FALSE(a.slow_hypothesis_holds);
}

TEST_CASE("scalar sweep is flat") {
  const auto scalar = EnvironmentSpec::markov_switch(Matrix{{0, 1}, {2, 0}},
                                                     {MetzlerMatrix{{-1}}, MetzlerMatrix{{1}}});
  const auto r = sweep_lambda(scalar, {0.01, 1.0}, Seed{3}, 5000, 1e-2);
  for (const auto& e : r.lambda_hats) CHECK(std::abs(e.value + 1.0 / 3.0) < 0.05);
}
