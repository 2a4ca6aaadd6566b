#include <doctest.h>

#include <cmath>
#include <random>

#include "coop/error.hpp"
#include "coop/linalg.hpp"
#include "helpers.hpp"

using namespace coop;
using testing_support::CaptureWarnings;
using testing_support::to_matrix;

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

TEST_CASE("is_metzler") {
  CHECK(is_metzler(Matrix{{-1, 2}, {0, -3}}));
  CHECK_FALSE(is_metzler(Matrix{{1, -0.5}, {2, 3}}));
  CHECK(is_metzler(Matrix{{5}}));
  CHECK(kind_of([] { is_metzler(Matrix(2, 3)); }) == ErrorKind::InvalidMatrix);
  CHECK(kind_of([] { is_metzler(Matrix{{1, NAN}, {0, 1}}); }) == ErrorKind::InvalidMatrix);
}

TEST_CASE("MetzlerMatrix validation") {
  SUBCASE("tiny negatives are clamped with a warning") {
    CaptureWarnings w;
    MetzlerMatrix m(Matrix{{0, -1e-15}, {1, 0}});
    CHECK(m(0, 1) == 0.0);
    CHECK(w.messages().size() == 1);
  }
  SUBCASE("real negatives name the entry") {
    try {
      MetzlerMatrix m(Matrix{{0, 1}, {-0.5, 0}});
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::NotMetzler);
      CHECK(std::string(e.what()).find("(2,1)") != std::string::npos);
    }
  }
  CHECK(kind_of([] { MetzlerMatrix m(Matrix(2, 3)); }) == ErrorKind::InvalidMatrix);
  CHECK(kind_of([] { MetzlerMatrix m(Matrix{}); }) == ErrorKind::InvalidMatrix);
  CHECK(kind_of([] { MetzlerMatrix m(Matrix{{INFINITY}}); }) == ErrorKind::InvalidMatrix);
}

TEST_CASE("SimplexPoint") {
  CHECK_NOTHROW(SimplexPoint({0.25, 0.75}));
  CHECK(kind_of([] { SimplexPoint p({0.5, 0.6}); }) != ErrorKind::Internal);
  CHECK(kind_of([] { SimplexPoint p({-0.1, 1.1}); }) != ErrorKind::Internal);
  CHECK(SimplexPoint::normalized({2, 2})[0] == 0.5);
  CHECK(SimplexPoint::barycenter(4)[3] == 0.25);
  CHECK(SimplexPoint::vertex(3, 1)[1] == 1.0);
  CHECK_FALSE(SimplexPoint::vertex(3, 1).interior());
  CHECK(SimplexPoint::barycenter(3).interior());
}

TEST_CASE("is_irreducible") {
  CHECK(is_irreducible(Matrix{{0, 1}, {1, 0}}));
  CHECK_FALSE(is_irreducible(Matrix{{1, 0}, {1, 1}}));
  CHECK(is_irreducible(Matrix{{0, 0, 1}, {1, 0, 0}, {0, 1, 0}}));
  CHECK(is_irreducible(Matrix{{-3}}));
  CHECK_FALSE(is_irreducible(Matrix{{-1, 0}, {0, 2}}));
}

TEST_CASE("strongly connected components come in reverse topological order") {
  // 1 -> 2 <-> 3 -> 4: edges j -> i when m(i, j) > 0.
  const Matrix m{{0, 0, 0, 0}, {1, 0, 1, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}};
  const auto comps = strongly_connected_components(m);
  REQUIRE(comps.size() == 3);
  // Component of node 4 (index 3) only receives edges, so it comes first.
  CHECK(comps.front() == std::vector<std::size_t>{3});
  CHECK(comps.back() == std::vector<std::size_t>{0});
}

TEST_CASE("perron_eigenpair spec examples") {
  auto p = perron_eigenpair(MetzlerMatrix{{0, 1}, {1, 0}});
  CHECK(p.lambda_max == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(p.vector[0] == doctest::Approx(0.5).epsilon(1e-12));

  p = perron_eigenpair(MetzlerMatrix{{1, 2}, {3, 0}});
  CHECK(p.lambda_max == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(p.vector[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(p.vector[1] == doctest::Approx(0.5).epsilon(1e-12));

  CHECK(kind_of([] { perron_eigenpair(MetzlerMatrix{{-1, 0}, {0, 2}}); }) ==
        ErrorKind::Reducible);
  CHECK(perron_eigenpair(MetzlerMatrix{{-7}}).lambda_max == -7.0);
}

TEST_CASE("perron_eigenpair reports the iteration limit") {
  PowerIterationOptions opts;
  opts.max_iterations = 2;
  try {
    perron_eigenpair(MetzlerMatrix{{1, 2, 0.1}, {3, 0, 1}, {0.5, 0.2, -2}}, opts);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::IterationLimit);
    CHECK(std::string(e.what()).find("residual") != std::string::npos);
  }
}

TEST_CASE("perron_eigenpair on random irreducible matrices") {
  std::mt19937_64 rng(101);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t d = 2 + trial % 5;
    const auto dense = trial % 2 ? oracle::random_metzler(rng, d)
                                 : oracle::random_sparse_metzler(rng, d);
    const MetzlerMatrix m(to_matrix(dense));
    const PerronPair p = perron_eigenpair(m);
    const Vector mv = multiply(m, p.vector.coords());
    double residual = 0.0;
    for (std::size_t i = 0; i < d; ++i)
      residual = std::max(residual, std::abs(mv[i] - p.lambda_max * p.vector[i]));
    CHECK(residual <= 1e-10 * (1.0 + inf_norm(m.matrix())));
    CHECK(p.vector.interior());
    CHECK(p.lambda_max == doctest::Approx(oracle::abscissa_by_exponential(dense)).epsilon(1e-8));
  }
}

TEST_CASE("2x2 Perron root matches the quadratic formula") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const auto d = oracle::random_metzler(rng, 2);
    const auto eig = oracle::eig2(d[0][0], d[0][1], d[1][0], d[1][1]);
    CHECK(perron_eigenpair(MetzlerMatrix(to_matrix(d))).lambda_max ==
          doctest::Approx(eig[0]).epsilon(1e-11));
  }
}

TEST_CASE("shift equivariance of the spectral abscissa") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> shift(-10, 10);
  for (int trial = 0; trial < 50; ++trial) {
    const MetzlerMatrix m = testing_support::random_metzler(rng, 2 + trial % 4);
    const double c = shift(rng);
    CHECK(std::abs(perron_eigenpair(m.shifted(c)).lambda_max -
                   (perron_eigenpair(m).lambda_max + c)) <= 1e-10);
  }
}

TEST_CASE("spectral abscissa and dominant eigenvector of reducible matrices") {
  CHECK(spectral_abscissa(MetzlerMatrix{{-1, 0}, {10, -1}}) == -1.0);
  CHECK(spectral_abscissa(MetzlerMatrix{{-1, 0}, {0, 2}}) == 2.0);
  CHECK(spectral_abscissa(MetzlerMatrix{{1, 2}, {3, 0}}) == doctest::Approx(3.0));

  // Lower triangular: the final class {2} carries the eigenvector e2.
  auto p = dominant_eigenpair(MetzlerMatrix{{-1, 0}, {10, -1}});
  CHECK(p.lambda_max == -1.0);
  CHECK(p.vector[1] == doctest::Approx(1.0));

  // Upstream class dominates: eigenvector spreads downstream.
  const MetzlerMatrix m{{2, 0}, {1, -1}};
  p = dominant_eigenpair(m);
  CHECK(p.lambda_max == doctest::Approx(2.0));
  const Vector mv = multiply(m, p.vector.coords());
  for (std::size_t i = 0; i < 2; ++i) CHECK(mv[i] == doctest::Approx(2.0 * p.vector[i]));
  CHECK(p.vector.interior());

  // Irreducible input agrees with power iteration.
  const MetzlerMatrix q{{1, 2}, {3, 0}};
  CHECK(dominant_eigenpair(q).vector[0] == doctest::Approx(perron_eigenpair(q).vector[0]));
}

TEST_CASE("spectral abscissa of random reducible block matrices") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 30; ++trial) {
    const auto a = oracle::random_metzler(rng, 2);
    const auto b = oracle::random_metzler(rng, 2);
    oracle::Dense m = oracle::zeros(4);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        m[i][j] = a[i][j];
        m[i + 2][j + 2] = b[i][j];
      }
    m[2][0] = 1.5;  // edge from block a into block b
    const MetzlerMatrix mm(to_matrix(m));
    CHECK_FALSE(is_irreducible(mm));
    const double expected = std::max(oracle::eig2(a[0][0], a[0][1], a[1][0], a[1][1])[0],
                                     oracle::eig2(b[0][0], b[0][1], b[1][0], b[1][1])[0]);
    CHECK(spectral_abscissa(mm) == doctest::Approx(expected).epsilon(1e-10));
    const PerronPair p = dominant_eigenpair(mm);
    const Vector mv = multiply(mm, p.vector.coords());
    for (std::size_t i = 0; i < 4; ++i) {
      CHECK(std::abs(mv[i] - p.lambda_max * p.vector[i]) <= 1e-9 * (1 + inf_norm(mm.matrix())));
      CHECK(p.vector[i] >= 0.0);
    }
  }
}

TEST_CASE("symmetric_part_extremes") {
  auto e = symmetric_part_extremes(Matrix{{0, 1}, {1, 0}});
  CHECK(e.min == doctest::Approx(-1.0));
  CHECK(e.max == doctest::Approx(1.0));

  e = symmetric_part_extremes(Matrix{{1, 2}, {3, 0}});
  const auto eig = oracle::eig2(1, 2.5, 2.5, 0);
  CHECK(e.max == doctest::Approx(eig[0]).epsilon(1e-12));
  CHECK(e.min == doctest::Approx(eig[1]).epsilon(1e-12));

  e = symmetric_part_extremes(Matrix{{4.5}});
  CHECK(e.min == 4.5);
  CHECK(e.max == 4.5);

  // Trace and Frobenius norm are preserved by the rotations.
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t d = 2 + trial % 6;
    const auto dense = oracle::random_metzler(rng, d);
    Matrix sym(d, d);
    double trace = 0.0, frob = 0.0;
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) {
        sym(i, j) = 0.5 * (dense[i][j] + dense[j][i]);
        frob += sym(i, j) * sym(i, j);
        if (i == j) trace += sym(i, j);
      }
    const Vector ev = symmetric_eigenvalues(sym);
    double t2 = 0.0, f2 = 0.0;
    for (double x : ev) {
      t2 += x;
      f2 += x * x;
    }
    CHECK(t2 == doctest::Approx(trace).epsilon(1e-11));
    CHECK(f2 == doctest::Approx(frob).epsilon(1e-11));
    CHECK(std::is_sorted(ev.begin(), ev.end()));
  }
}

TEST_CASE("bound sandwich for constant matrices") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 100; ++trial) {
    const MetzlerMatrix m = testing_support::random_metzler(rng, 2 + trial % 5);
    const double lambda = perron_eigenpair(m).lambda_max;
    const Vector cols = column_sums(m.matrix());
    CHECK(*std::min_element(cols.begin(), cols.end()) <= lambda + 1e-10);
    CHECK(lambda <= *std::max_element(cols.begin(), cols.end()) + 1e-10);
    const auto sym = symmetric_part_extremes(m.matrix());
    CHECK(sym.min <= lambda + 1e-10);
    CHECK(lambda <= sym.max + 1e-10);
  }
}

TEST_CASE("hilbert_distance") {
  const Vector x{0.2, 0.3, 0.5};
  CHECK(hilbert_distance(x, x) == 0.0);
  CHECK(hilbert_distance(Vector{1, 2}, Vector{2, 1}) == doctest::Approx(std::log(4.0)));
  CHECK(kind_of([] { hilbert_distance(Vector{0, 1}, Vector{1, 1}); }) == ErrorKind::Domain);
  CHECK(kind_of([] { hilbert_distance(Vector{1, 1}, Vector{1, -1}); }) == ErrorKind::Domain);

  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const auto a = oracle::random_positive(rng, 4);
    const auto b = oracle::random_positive(rng, 4);
    Vector a2 = a, b3 = b;
    for (double& v : a2) v *= 2.0;
    for (double& v : b3) v *= 3.0;
    CHECK(hilbert_distance(a2, b3) == doctest::Approx(hilbert_distance(a, b)).epsilon(1e-12));
    CHECK(hilbert_distance(a, b) == doctest::Approx(hilbert_distance(b, a)).epsilon(1e-14));
    CHECK(hilbert_distance(a, b) == doctest::Approx(oracle::hilbert(a, b)).epsilon(1e-12));
  }
}

TEST_CASE("birkhoff_tau") {
  CHECK(birkhoff_tau(Matrix{{1, 1}, {1, 1}}) == doctest::Approx(0.0));
  CHECK(birkhoff_tau(Matrix{{2, 1}, {1, 2}}) == doctest::Approx(1.0 / 3.0));
  CHECK(birkhoff_tau(Matrix{{1, 0}, {1, 1}}) == 1.0);
  CHECK(kind_of([] { birkhoff_tau(Matrix{{1, -1}, {1, 1}}); }) == ErrorKind::Domain);
  CHECK(kind_of([] { birkhoff_tau(Matrix{{0, 1}, {1, 1}}); }) == ErrorKind::Domain);

  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t d = 2 + trial % 4;
    oracle::Dense m = oracle::zeros(d);
    for (auto& row : m) row = oracle::random_positive(rng, d);
    CHECK(birkhoff_tau(to_matrix(m)) == doctest::Approx(oracle::birkhoff_tau(m)).epsilon(1e-10));
  }
}

TEST_CASE("Birkhoff contraction inequality") {
  std::mt19937_64 rng(31);
  int violations = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t d = 2 + trial % 4;
    oracle::Dense m = oracle::zeros(d);
    for (auto& row : m) row = oracle::random_positive(rng, d);
    const auto x = oracle::random_positive(rng, d);
    const auto y = oracle::random_positive(rng, d);
    const double lhs = hilbert_distance(oracle::matvec(m, x), oracle::matvec(m, y));
    if (lhs > birkhoff_tau(to_matrix(m)) * hilbert_distance(x, y) + 1e-9) ++violations;
  }
  CHECK(violations == 0);
}

TEST_CASE("sup-norm bounded by the Hilbert distance on the simplex") {
  std::mt19937_64 rng(37);
  int violations = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t d = 2 + trial % 5;
    const auto a = oracle::random_simplex(rng, d);
    const auto b = oracle::random_simplex(rng, d);
    double sup = 0.0;
    for (std::size_t i = 0; i < d; ++i) sup = std::max(sup, std::abs(a[i] - b[i]));
    if (sup > std::exp(hilbert_distance(a, b)) - 1.0 + 1e-15) ++violations;
  }
  CHECK(violations == 0);
}

TEST_CASE("solve_linear") {
  const Vector x = solve_linear(Matrix{{2, 1}, {1, 3}}, {3, 5});
  CHECK(x[0] == doctest::Approx(0.8));
  CHECK(x[1] == doctest::Approx(1.4));
  CHECK(kind_of([] { solve_linear(Matrix{{1, 2}, {2, 4}}, {1, 1}); }) ==
        ErrorKind::InvalidMatrix);
}
