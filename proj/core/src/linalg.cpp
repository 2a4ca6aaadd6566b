#include "coop/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include "coop/error.hpp"

namespace coop {

namespace {

void require_square_finite(const Matrix& m) {
  if (m.empty() || !m.is_square()) {
    throw Error(ErrorKind::InvalidMatrix, "expected a non-empty square matrix");
  }
  if (!m.all_finite()) throw Error(ErrorKind::InvalidMatrix, "matrix has non-finite entries");
}

Matrix submatrix(const Matrix& m, const std::vector<std::size_t>& rows,
                 const std::vector<std::size_t>& cols) {
  Matrix s(rows.size(), cols.size());
  for (std::size_t a = 0; a < rows.size(); ++a)
    for (std::size_t b = 0; b < cols.size(); ++b) s(a, b) = m(rows[a], cols[b]);
  return s;
}

}  // namespace

bool is_metzler(const Matrix& m) {
  require_square_finite(m);
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j)
      if (i != j && m(i, j) < 0.0) return false;
  return true;
}

std::vector<std::vector<std::size_t>> strongly_connected_components(const Matrix& m) {
  if (!m.is_square()) throw Error(ErrorKind::InvalidMatrix, "expected a square matrix");
  const std::size_t n = m.rows();
  constexpr std::size_t kUnvisited = std::numeric_limits<std::size_t>::max();

  // Tarjan. Edge j -> i when m(i, j) > 0.
  std::vector<std::size_t> index(n, kUnvisited), low(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<std::size_t> stack;
  std::vector<std::vector<std::size_t>> components;
  std::size_t counter = 0;

  std::function<void(std::size_t)> visit = [&](std::size_t j) {
    index[j] = low[j] = counter++;
    stack.push_back(j);
    on_stack[j] = true;
    for (std::size_t i = 0; i < n; ++i) {
      if (i == j || !(m(i, j) > 0.0)) continue;
      if (index[i] == kUnvisited) {
        visit(i);
        low[j] = std::min(low[j], low[i]);
      } else if (on_stack[i]) {
        low[j] = std::min(low[j], index[i]);
      }
    }
    if (low[j] == index[j]) {
      std::vector<std::size_t> comp;
      std::size_t k;
      do {
        k = stack.back();
        stack.pop_back();
        on_stack[k] = false;
        comp.push_back(k);
      } while (k != j);
      std::sort(comp.begin(), comp.end());
      components.push_back(std::move(comp));
    }
  };
  for (std::size_t j = 0; j < n; ++j)
    if (index[j] == kUnvisited) visit(j);
  return components;
}

bool is_irreducible(const Matrix& m) {
  if (m.empty() || !m.is_square()) {
    throw Error(ErrorKind::InvalidMatrix, "expected a non-empty square matrix");
  }
  // Forward and backward reachability from node 0.
  const std::size_t n = m.rows();
  auto reaches_all = [&](bool forward) {
    std::vector<bool> seen(n, false);
    std::vector<std::size_t> todo{0};
    seen[0] = true;
    std::size_t count = 1;
    while (!todo.empty()) {
      const std::size_t j = todo.back();
      todo.pop_back();
      for (std::size_t i = 0; i < n; ++i) {
        const double w = forward ? m(i, j) : m(j, i);
        if (i != j && w > 0.0 && !seen[i]) {
          seen[i] = true;
          ++count;
          todo.push_back(i);
        }
      }
    }
    return count == n;
  };
  return reaches_all(true) && reaches_all(false);
}

PerronPair perron_eigenpair(const MetzlerMatrix& mm, const PowerIterationOptions& options) {
  const Matrix& m = mm.matrix();
  const std::size_t d = m.rows();
  if (!is_irreducible(m)) {
    throw Error(ErrorKind::Reducible, "Perron eigenpair requires an irreducible matrix, got " +
                                          to_string(m));
  }
  double shift = 0.0;
  for (std::size_t i = 0; i < d; ++i) shift = std::max(shift, std::abs(m(i, i)));
  shift += 1.0;

  Vector v = options.initial ? options.initial->vector() : SimplexPoint::barycenter(d).vector();
  if (v.size() != d) throw Error(ErrorKind::InvalidMatrix, "initial vector dimension mismatch");
  Vector w(d);
  double diff = std::numeric_limits<double>::infinity();
  std::size_t it = 0;
  for (; it < options.max_iterations && !(diff < options.tolerance); ++it) {
    multiply(m, v, w);
    double s = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      w[i] += shift * v[i];
      s += w[i];
    }
    diff = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      w[i] /= s;
      diff = std::max(diff, std::abs(w[i] - v[i]));
    }
    std::swap(v, w);
  }

  multiply(m, v, w);
  const double lambda = sum(w);
  double residual = 0.0;
  for (std::size_t i = 0; i < d; ++i) residual = std::max(residual, std::abs(w[i] - lambda * v[i]));
  const double allowed = 1e-10 * (1.0 + inf_norm(m));
  if (!(diff < options.tolerance) || residual > allowed) {
    throw Error(ErrorKind::IterationLimit,
                "power iteration did not converge after " + std::to_string(it) +
                    " iterations (last step " + std::to_string(diff) + ", residual " +
                    std::to_string(residual) + ")");
  }
  return {lambda, SimplexPoint::normalized(std::move(v))};
}

namespace {

struct ClassSpectrum {
  std::vector<std::size_t> members;
  double lambda;
  std::optional<SimplexPoint> vector;  // empty for singletons
};

std::vector<ClassSpectrum> class_spectra(const Matrix& m) {
  std::vector<ClassSpectrum> classes;
  for (auto& comp : strongly_connected_components(m)) {
    ClassSpectrum c{std::move(comp), 0.0, std::nullopt};
    if (c.members.size() == 1) {
      c.lambda = m(c.members[0], c.members[0]);
    } else {
      auto pair = perron_eigenpair(MetzlerMatrix(submatrix(m, c.members, c.members)));
      c.lambda = pair.lambda_max;
      c.vector = std::move(pair.vector);
    }
    classes.push_back(std::move(c));
  }
  return classes;
}

}  // namespace

double spectral_abscissa(const MetzlerMatrix& m) {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& c : class_spectra(m.matrix())) best = std::max(best, c.lambda);
  return best;
}

PerronPair dominant_eigenpair(const MetzlerMatrix& mm) {
  const Matrix& m = mm.matrix();
  const std::size_t d = m.rows();
  auto classes = class_spectra(m);
  if (classes.size() == 1) {
    if (d == 1) return {m(0, 0), SimplexPoint::vertex(1, 0)};
    return {classes[0].lambda, *classes[0].vector};
  }

  double lambda = -std::numeric_limits<double>::infinity();
  for (const auto& c : classes) lambda = std::max(lambda, c.lambda);
  const double tie = 1e-10 * (1.0 + std::abs(lambda));

  const std::size_t n = classes.size();
  std::vector<std::size_t> owner(d);
  for (std::size_t c = 0; c < n; ++c)
    for (auto i : classes[c].members) owner[i] = c;

  // downstream[c][e]: class e reachable from class c. Classes are listed in
  // reverse topological order, so successors of c have smaller indices.
  std::vector<std::vector<bool>> downstream(n, std::vector<bool>(n, false));
  for (std::size_t c = 0; c < n; ++c) {
    downstream[c][c] = true;
    for (auto j : classes[c].members)
      for (std::size_t i = 0; i < d; ++i)
        if (owner[i] != c && m(i, j) > 0.0) {
          const std::size_t e = owner[i];
          for (std::size_t f = 0; f < n; ++f)
            if (downstream[e][f]) downstream[c][f] = true;
        }
  }

  auto basic = [&](std::size_t c) { return std::abs(classes[c].lambda - lambda) <= tie; };
  std::size_t final_class = n;
  for (std::size_t c = 0; c < n && final_class == n; ++c) {
    if (!basic(c)) continue;
    bool is_final = true;
    for (std::size_t e = 0; e < n; ++e)
      if (e != c && downstream[c][e] && basic(e)) is_final = false;
    if (is_final) final_class = c;
  }
  if (final_class == n) throw Error(ErrorKind::Internal, "no final basic class found");

  Vector v(d, 0.0);
  const auto& base = classes[final_class];
  for (std::size_t a = 0; a < base.members.size(); ++a) {
    v[base.members[a]] = base.vector ? (*base.vector)[a] : 1.0;
  }

  std::vector<std::size_t> rest;
  for (std::size_t i = 0; i < d; ++i)
    if (owner[i] != final_class && downstream[final_class][owner[i]]) rest.push_back(i);
  if (!rest.empty()) {
    // (lambda I - M_RR) v_R = M_RC v_C; the left side is a nonsingular
    // M-matrix because every downstream class has a smaller abscissa.
    Matrix lhs = submatrix(m, rest, rest) * -1.0;
    for (std::size_t a = 0; a < rest.size(); ++a) lhs(a, a) += lambda;
    Vector rhs(rest.size(), 0.0);
    for (std::size_t a = 0; a < rest.size(); ++a)
      for (auto j : base.members) rhs[a] += m(rest[a], j) * v[j];
    Vector sol = solve_linear(std::move(lhs), std::move(rhs));
    for (std::size_t a = 0; a < rest.size(); ++a) v[rest[a]] = std::max(0.0, sol[a]);
  }
  return {lambda, SimplexPoint::normalized(std::move(v))};
}

Vector symmetric_eigenvalues(Matrix a, double off_tolerance) {
  require_square_finite(a);
  const std::size_t n = a.rows();
  auto off_norm = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j) s += a(i, j) * a(i, j);
    return std::sqrt(s);
  };
  double scale = 0.0;
  for (double x : a.data()) scale += x * x;
  const double threshold = off_tolerance * std::max(1.0, std::sqrt(scale));

  for (int sweep = 0; sweep < 100 && off_norm() >= threshold; ++sweep) {
    for (std::size_t p = 0; p + 1 < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
      }
  }
  Vector eig(n);
  for (std::size_t i = 0; i < n; ++i) eig[i] = a(i, i);
  std::sort(eig.begin(), eig.end());
  return eig;
}

SymmetricExtremes symmetric_part_extremes(const Matrix& m) {
  require_square_finite(m);
  Matrix sym = m;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) sym(i, j) = 0.5 * (m(i, j) + m(j, i));
  const Vector eig = symmetric_eigenvalues(std::move(sym));
  return {eig.front(), eig.back()};
}

double hilbert_distance(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.empty()) {
    throw Error(ErrorKind::InvalidMatrix, "Hilbert distance: dimension mismatch");
  }
  double hi = -std::numeric_limits<double>::infinity();
  double lo = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) {
      throw Error(ErrorKind::Domain,
                  "Hilbert distance is undefined on the boundary (coordinate " +
                      std::to_string(i + 1) + ")");
    }
    const double r = x[i] / y[i];
    hi = std::max(hi, r);
    lo = std::min(lo, r);
  }
  return std::log(hi) - std::log(lo);
}

double birkhoff_tau(const Matrix& m) {
  require_square_finite(m);
  const std::size_t d = m.rows();
  bool has_zero = false;
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      if (m(i, j) < 0.0) throw Error(ErrorKind::Domain, "Birkhoff coefficient needs m >= 0");
      if (i == j && !(m(i, i) > 0.0)) {
        throw Error(ErrorKind::Domain, "Birkhoff coefficient needs a positive diagonal");
      }
      if (m(i, j) == 0.0) has_zero = true;
    }
  if (has_zero) return 1.0;

  double r = 1.0;
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j)
      for (std::size_t k = 0; k < d; ++k)
        for (std::size_t l = 0; l < d; ++l)
          r = std::min(r, (m(i, k) * m(j, l)) / (m(j, k) * m(i, l)));
  const double root = std::sqrt(r);
  return (1.0 - root) / (1.0 + root);
}

Vector solve_linear(Matrix a, Vector b) {
  if (!a.is_square() || a.rows() != b.size()) {
    throw Error(ErrorKind::InvalidMatrix, "linear system dimension mismatch");
  }
  const std::size_t n = a.rows();
  double scale = 0.0;
  for (double x : a.data()) scale = std::max(scale, std::abs(x));
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a(r, col)) > std::abs(a(pivot, col))) pivot = r;
    if (!(std::abs(a(pivot, col)) > 1e-14 * scale)) {
      throw Error(ErrorKind::InvalidMatrix, "singular linear system");
    }
    if (pivot != col) {
      for (std::size_t k = 0; k < n; ++k) std::swap(a(col, k), a(pivot, k));
      std::swap(b[col], b[pivot]);
    }
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a(r, col) / a(col, col);
      if (f == 0.0) continue;
      for (std::size_t k = col; k < n; ++k) a(r, k) -= f * a(col, k);
      b[r] -= f * b[col];
    }
  }
  Vector x(n);
  for (std::size_t r = n; r-- > 0;) {
    double s = b[r];
    for (std::size_t k = r + 1; k < n; ++k) s -= a(r, k) * x[k];
    x[r] = s / a(r, r);
  }
  return x;
}

}  // namespace coop
