#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace coop {

using Vector = std::vector<double>;

/// Dense row-major real matrix. Small sizes only (d up to a few dozen).
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);
  static Matrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool is_square() const noexcept { return rows_ == cols_; }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }

  Matrix transpose() const;
  std::vector<std::vector<double>> to_rows() const;
  bool all_finite() const;

  Matrix& operator+=(const Matrix& other);
  Matrix& operator-=(const Matrix& other);
  Matrix& operator*=(double c);

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator*(Matrix a, double c);
Matrix operator*(double c, Matrix a);
Matrix operator*(const Matrix& a, const Matrix& b);

// y = m x. `out` must not alias x.
void multiply(const Matrix& m, std::span<const double> x, std::span<double> out);
Vector multiply(const Matrix& m, std::span<const double> x);

double inf_norm(const Matrix& m);
double inf_norm(std::span<const double> v);
double sum(std::span<const double> v);

/// Column sums: result[i] = sum_j m(j, i).
Vector column_sums(const Matrix& m);

std::string to_string(const Matrix& m);

/// Square matrix with nonnegative off-diagonal entries.
///
/// Off-diagonal entries in [-1e-14, 0) are clamped to zero with a warning so
/// that values produced by I/O rounding are accepted; anything more negative
/// raises ErrorKind::NotMetzler naming the entry.
class MetzlerMatrix {
 public:
  static constexpr double kClampTolerance = 1e-14;

  explicit MetzlerMatrix(Matrix m, std::string_view context = {});
  MetzlerMatrix(std::initializer_list<std::initializer_list<double>> rows)
      : MetzlerMatrix(Matrix(rows)) {}

  std::size_t dim() const noexcept { return m_.rows(); }
  double operator()(std::size_t i, std::size_t j) const { return m_(i, j); }
  const Matrix& matrix() const noexcept { return m_; }
  operator const Matrix&() const noexcept { return m_; }

  MetzlerMatrix shifted(double c) const;

  bool operator==(const MetzlerMatrix&) const = default;

 private:
  Matrix m_;
};

/// Probability vector on the unit simplex.
class SimplexPoint {
 public:
  static constexpr double kSumTolerance = 1e-12;

  explicit SimplexPoint(Vector coords);

  /// Clips tiny negatives and divides by the sum. Throws on a vector whose
  /// positive part has zero mass.
  static SimplexPoint normalized(Vector v);
  static SimplexPoint barycenter(std::size_t d);
  static SimplexPoint vertex(std::size_t d, std::size_t i);

  std::size_t dim() const noexcept { return coords_.size(); }
  double operator[](std::size_t i) const { return coords_[i]; }
  std::span<const double> coords() const noexcept { return coords_; }
  const Vector& vector() const noexcept { return coords_; }

  /// All coordinates strictly positive.
  bool interior() const;

  bool operator==(const SimplexPoint&) const = default;

 private:
  Vector coords_;
};

}  // namespace coop
