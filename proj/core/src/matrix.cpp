#include "coop/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "coop/error.hpp"
#include "coop/log.hpp"

namespace coop {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ ? rows.begin()->size() : 0;
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) {
      throw Error(ErrorKind::InvalidMatrix, "ragged matrix literal");
    }
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
  Matrix m;
  m.rows_ = rows.size();
  m.cols_ = m.rows_ ? rows.front().size() : 0;
  m.data_.reserve(m.rows_ * m.cols_);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != m.cols_) {
      throw Error(ErrorKind::InvalidMatrix,
                  "ragged matrix: row " + std::to_string(i) + " has " +
                      std::to_string(rows[i].size()) + " entries, expected " +
                      std::to_string(m.cols_));
    }
    m.data_.insert(m.data_.end(), rows[i].begin(), rows[i].end());
  }
  return m;
}

Matrix Matrix::transpose() const {
  Matrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

std::vector<std::vector<double>> Matrix::to_rows() const {
  std::vector<std::vector<double>> out(rows_);
  for (std::size_t i = 0; i < rows_; ++i) out[i].assign(row(i).begin(), row(i).end());
  return out;
}

bool Matrix::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double x) { return std::isfinite(x); });
}

Matrix& Matrix::operator+=(const Matrix& other) {
  if (rows_ != other.rows_ || cols_ != other.cols_) {
    throw Error(ErrorKind::InvalidMatrix, "matrix size mismatch in addition");
  }
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += other.data_[k];
  return *this;
}

Matrix& Matrix::operator-=(const Matrix& other) {
  if (rows_ != other.rows_ || cols_ != other.cols_) {
    throw Error(ErrorKind::InvalidMatrix, "matrix size mismatch in subtraction");
  }
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= other.data_[k];
  return *this;
}

Matrix& Matrix::operator*=(double c) {
  for (auto& x : data_) x *= c;
  return *this;
}

Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
Matrix operator*(Matrix a, double c) { return a *= c; }
Matrix operator*(double c, Matrix a) { return a *= c; }

Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw Error(ErrorKind::InvalidMatrix, "matrix size mismatch in product");
  }
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

void multiply(const Matrix& m, std::span<const double> x, std::span<double> out) {
  const std::size_t n = m.rows();
  const std::size_t k = m.cols();
  for (std::size_t i = 0; i < n; ++i) {
    const double* r = m.data().data() + i * k;
    double acc = 0.0;
    for (std::size_t j = 0; j < k; ++j) acc += r[j] * x[j];
    out[i] = acc;
  }
}

Vector multiply(const Matrix& m, std::span<const double> x) {
  if (m.cols() != x.size()) {
    throw Error(ErrorKind::InvalidMatrix, "matrix-vector dimension mismatch");
  }
  Vector out(m.rows());
  multiply(m, x, out);
  return out;
}

double inf_norm(const Matrix& m) {
  double best = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    double s = 0.0;
    for (double x : m.row(i)) s += std::abs(x);
    best = std::max(best, s);
  }
  return best;
}

double inf_norm(std::span<const double> v) {
  double best = 0.0;
  for (double x : v) best = std::max(best, std::abs(x));
  return best;
}

double sum(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

Vector column_sums(const Matrix& m) {
  Vector s(m.cols(), 0.0);
  for (std::size_t j = 0; j < m.rows(); ++j)
    for (std::size_t i = 0; i < m.cols(); ++i) s[i] += m(j, i);
  return s;
}

std::string to_string(const Matrix& m) {
  std::ostringstream os;
  os.precision(17);
  os << '[';
  for (std::size_t i = 0; i < m.rows(); ++i) {
    os << (i ? ", [" : "[");
    for (std::size_t j = 0; j < m.cols(); ++j) os << (j ? ", " : "") << m(i, j);
    os << ']';
  }
  os << ']';
  return os.str();
}

MetzlerMatrix::MetzlerMatrix(Matrix m, std::string_view context) : m_(std::move(m)) {
  const std::string where = context.empty() ? std::string() : " (" + std::string(context) + ")";
  if (m_.empty() || !m_.is_square()) {
    throw Error(ErrorKind::InvalidMatrix, "Metzler matrix must be square and non-empty" + where);
  }
  if (!m_.all_finite()) {
    throw Error(ErrorKind::InvalidMatrix, "matrix has non-finite entries" + where);
  }
  for (std::size_t i = 0; i < m_.rows(); ++i)
    for (std::size_t j = 0; j < m_.cols(); ++j) {
      if (i == j || m_(i, j) >= 0.0) continue;
      const std::string entry = "entry (" + std::to_string(i + 1) + "," +
                                std::to_string(j + 1) + ") = " + std::to_string(m_(i, j));
      if (m_(i, j) >= -kClampTolerance) {
        warn("clamped off-diagonal " + entry + " to 0" + where);
        m_(i, j) = 0.0;
      } else {
        throw Error(ErrorKind::NotMetzler, "negative off-diagonal " + entry + where);
      }
    }
}

MetzlerMatrix MetzlerMatrix::shifted(double c) const {
  Matrix m = m_;
  for (std::size_t i = 0; i < m.rows(); ++i) m(i, i) += c;
  return MetzlerMatrix(std::move(m));
}

SimplexPoint::SimplexPoint(Vector coords) : coords_(std::move(coords)) {
  if (coords_.empty()) throw Error(ErrorKind::Domain, "simplex point must have dimension >= 1");
  double s = 0.0;
  for (double x : coords_) {
    if (!(x >= 0.0) || !std::isfinite(x)) {
      throw Error(ErrorKind::Domain, "simplex coordinates must be finite and nonnegative");
    }
    s += x;
  }
  if (std::abs(s - 1.0) > kSumTolerance) {
    throw Error(ErrorKind::Domain, "simplex coordinates sum to " + std::to_string(s));
  }
}

SimplexPoint SimplexPoint::normalized(Vector v) {
  double s = 0.0;
  for (auto& x : v) {
    if (!std::isfinite(x)) throw Error(ErrorKind::NumericalBlowup, "non-finite coordinate");
    if (x < 0.0) x = 0.0;
    s += x;
  }
  if (!(s > 0.0)) throw Error(ErrorKind::NumericalBlowup, "cannot normalize a zero vector");
  for (auto& x : v) x /= s;
  return SimplexPoint(std::move(v));
}

SimplexPoint SimplexPoint::barycenter(std::size_t d) {
  return SimplexPoint(Vector(d, 1.0 / static_cast<double>(d)));
}

SimplexPoint SimplexPoint::vertex(std::size_t d, std::size_t i) {
  Vector v(d, 0.0);
  v.at(i) = 1.0;
  return SimplexPoint(std::move(v));
}

bool SimplexPoint::interior() const {
  return std::all_of(coords_.begin(), coords_.end(), [](double x) { return x > 0.0; });
}

}  // namespace coop
