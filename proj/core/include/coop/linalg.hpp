#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "coop/matrix.hpp"

namespace coop {

/// Spectral abscissa together with its simplex-normalized eigenvector.
struct PerronPair {
  double lambda_max;
  SimplexPoint vector;
};

struct PowerIterationOptions {
  double tolerance = 1e-13;
  std::size_t max_iterations = 100000;
  /// Starting vector; the barycenter when empty. Must be strictly positive.
  std::optional<SimplexPoint> initial;
};

struct SymmetricExtremes {
  double min;
  double max;
};

/// True iff every off-diagonal entry is >= 0. Throws InvalidMatrix on a
/// non-square or non-finite input.
bool is_metzler(const Matrix& m);

/// Strong connectivity of the graph with an edge j -> i whenever
/// m(i, j) > 0, i != j. Any square matrix is accepted; only the sign pattern
/// of the off-diagonal entries matters.
bool is_irreducible(const Matrix& m);

/// Strongly connected components of the same graph, in reverse topological
/// order of the condensation (a component only receives edges from
/// components listed after it).
std::vector<std::vector<std::size_t>> strongly_connected_components(const Matrix& m);

/// Perron root and vector of an irreducible Metzler matrix, by power
/// iteration on m + rI with r = 1 + max |m_ii|.
///
/// Throws Reducible on reducible input and IterationLimit when the iterates
/// fail to settle or the final residual exceeds 1e-10 (1 + |m|_inf).
PerronPair perron_eigenpair(const MetzlerMatrix& m, const PowerIterationOptions& options = {});

/// Spectral abscissa of any Metzler matrix: the largest spectral abscissa
/// among the irreducible diagonal blocks of its Frobenius normal form.
double spectral_abscissa(const MetzlerMatrix& m);

/// Spectral abscissa and a nonnegative eigenvector for any Metzler matrix.
/// Coincides with perron_eigenpair when m is irreducible. For reducible m
/// the vector is supported on a final basic class and everything downstream
/// of it, which is the unique nonnegative choice whenever one exists.
PerronPair dominant_eigenpair(const MetzlerMatrix& m);

/// Extreme eigenvalues of (m + m^T)/2 by cyclic Jacobi rotations.
SymmetricExtremes symmetric_part_extremes(const Matrix& m);

/// All eigenvalues of a symmetric matrix, ascending.
Vector symmetric_eigenvalues(Matrix sym, double off_tolerance = 1e-12);

/// Hilbert projective distance log(max x_i/y_i) - log(min x_i/y_i).
/// Throws Domain unless every coordinate of x and y is strictly positive.
double hilbert_distance(std::span<const double> x, std::span<const double> y);

/// Birkhoff contraction coefficient of a nonnegative matrix with positive
/// diagonal. 1 whenever any entry is zero.
double birkhoff_tau(const Matrix& m);

/// Solves a x = b by Gaussian elimination with partial pivoting.
/// Throws InvalidMatrix when a is numerically singular.
Vector solve_linear(Matrix a, Vector b);

}  // namespace coop
