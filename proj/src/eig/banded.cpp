#include "robin/eig/banded.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>

#include "robin/errors.hpp"

namespace robin::eig {

SymmetricBandedMatrix::SymmetricBandedMatrix(std::size_t n, std::size_t bandwidth)
    : n_(n), b_(bandwidth), data_(n * (bandwidth + 1), 0.0) {
  if (n == 0) throw std::invalid_argument("banded matrix: dimension must be positive");
  if (bandwidth >= n && n > 1) b_ = n - 1, data_.assign(n * n, 0.0);
  if (n == 1) b_ = 0, data_.assign(1, 0.0);
}

double SymmetricBandedMatrix::operator()(std::size_t i, std::size_t j) const {
  if (j > i) std::swap(i, j);
  const std::size_t k = i - j;
  return k > b_ ? 0.0 : data_[i * (b_ + 1) + k];
}

void SymmetricBandedMatrix::add(std::size_t i, std::size_t j, double v) {
  if (j > i) std::swap(i, j);
  const std::size_t k = i - j;
  if (k > b_) throw std::out_of_range(fmt::format("banded matrix: ({}, {}) outside bandwidth {}", i, j, b_));
  data_[i * (b_ + 1) + k] += v;
}

void SymmetricBandedMatrix::set(std::size_t i, std::size_t j, double v) {
  if (j > i) std::swap(i, j);
  const std::size_t k = i - j;
  if (k > b_) throw std::out_of_range(fmt::format("banded matrix: ({}, {}) outside bandwidth {}", i, j, b_));
  data_[i * (b_ + 1) + k] = v;
}

void SymmetricBandedMatrix::multiply(std::span<const double> x, std::span<double> y) const {
  std::fill(y.begin(), y.end(), 0.0);
  for (std::size_t i = 0; i < n_; ++i) {
    const double* row = &data_[i * (b_ + 1)];
    double acc = row[0] * x[i];
    const std::size_t kmax = std::min(b_, i);
    const double xi = x[i];
    for (std::size_t k = 1; k <= kmax; ++k) {
      acc += row[k] * x[i - k];
      y[i - k] += row[k] * xi;
    }
    y[i] += acc;
  }
}

Eigen::VectorXd SymmetricBandedMatrix::operator*(const Eigen::VectorXd& x) const {
  Eigen::VectorXd y(static_cast<Eigen::Index>(n_));
  multiply({x.data(), n_}, {y.data(), n_});
  return y;
}

double SymmetricBandedMatrix::quadratic_form(std::span<const double> x) const {
  std::vector<double> y(n_);
  multiply(x, y);
  double acc = 0.0;
  for (std::size_t i = 0; i < n_; ++i) acc += x[i] * y[i];
  return acc;
}

double SymmetricBandedMatrix::norm_inf() const {
  std::vector<double> rows(n_, 0.0);
  for (std::size_t i = 0; i < n_; ++i) {
    const double* row = &data_[i * (b_ + 1)];
    rows[i] += std::abs(row[0]);
    for (std::size_t k = 1; k <= std::min(b_, i); ++k) {
      rows[i] += std::abs(row[k]);
      rows[i - k] += std::abs(row[k]);
    }
  }
  return *std::max_element(rows.begin(), rows.end());
}

Eigen::MatrixXd SymmetricBandedMatrix::dense() const {
  const auto n = static_cast<Eigen::Index>(n_);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t k = 0; k <= std::min(b_, i); ++k) {
      const double v = data_[i * (b_ + 1) + k];
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i - k)) = v;
      m(static_cast<Eigen::Index>(i - k), static_cast<Eigen::Index>(i)) = v;
    }
  }
  return m;
}

SymmetricBandedMatrix SymmetricBandedMatrix::from_dense(const Eigen::MatrixXd& m, std::size_t bandwidth) {
  SymmetricBandedMatrix out(static_cast<std::size_t>(m.rows()), bandwidth);
  for (std::size_t i = 0; i < out.n_; ++i) {
    for (std::size_t k = 0; k <= std::min(out.b_, i); ++k) {
      out.data_[i * (out.b_ + 1) + k] = m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i - k));
    }
  }
  return out;
}

void SymmetricBandedMatrix::write_triplets(std::ostream& out) const {
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t k = std::min(b_, i) + 1; k-- > 0;) {
      const double v = data_[i * (b_ + 1) + k];
      if (v != 0.0) out << fmt::format("{} {} {:.17g}\n", i, i - k, v);
    }
  }
}

ShiftedFactorization factorize_shifted(const SymmetricBandedMatrix& a, const SymmetricBandedMatrix& m, double shift) {
  if (a.size() != m.size()) throw std::invalid_argument("factorize_shifted: dimension mismatch");
  const std::size_t n = a.size();
  const std::size_t b = std::max(a.bandwidth(), m.bandwidth());
  const std::size_t w = b + 1;

  ShiftedFactorization f;
  f.n_ = n;
  f.b_ = b;
  f.shift_ = shift;
  f.lower_.assign(n * w, 0.0);
  f.pivots_.assign(n, 0.0);

  // Working copy of the lower band of A − σM, overwritten by L.
  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k <= std::min(b, i); ++k) {
      const double v = a(i, i - k) - shift * m(i, i - k);
      f.lower_[i * w + k] = v;
      if (k == 0) scale = std::max(scale, std::abs(v));
    }
  }
  scale = std::max(scale, std::numeric_limits<double>::min());
  const double tiny = 64.0 * std::numeric_limits<double>::epsilon() * scale;

  std::vector<double> work(w);  // work[k] = L(j, j−k)·D(j−k)
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t kmax = std::min(b, j);
    double* row_j = &f.lower_[j * w];
    double d = row_j[0];
    for (std::size_t k = 1; k <= kmax; ++k) {
      work[k] = row_j[k] * f.pivots_[j - k];
      d -= row_j[k] * work[k];
    }
    if (!(std::abs(d) > tiny)) {
      throw SingularShift(fmt::format("A − σM is singular to working precision at σ = {:.17g}", shift), shift);
    }
    f.pivots_[j] = d;
    if (d < 0.0) ++f.negatives_;
    // Column j of L below the diagonal: rows i = j+1 .. j+b.
    const std::size_t imax = std::min(n - 1, j + b);
    for (std::size_t i = j + 1; i <= imax; ++i) {
      double* row_i = &f.lower_[i * w];
      const std::size_t off = i - j;  // position of (i, j) in row i
      double v = row_i[off];
      // Σ_{c<j, c ≥ i−b} L(i,c)·L(j,c)·D(c); L(j,c) D(c) = work[j−c]
      const std::size_t cmin = i > b ? i - b : 0;
      for (std::size_t c = std::max(cmin, j > b ? j - b : 0); c < j; ++c) {
        v -= row_i[i - c] * work[j - c];
      }
      row_i[off] = v / d;
    }
  }
  return f;
}

void ShiftedFactorization::solve(std::span<double> x) const {
  const std::size_t w = b_ + 1;
  // L y = rhs
  for (std::size_t i = 0; i < n_; ++i) {
    const double* row = &lower_[i * w];
    double acc = x[i];
    for (std::size_t k = 1; k <= std::min(b_, i); ++k) acc -= row[k] * x[i - k];
    x[i] = acc;
  }
  for (std::size_t i = 0; i < n_; ++i) x[i] /= pivots_[i];
  // Lᵀ x = z
  for (std::size_t i = n_; i-- > 0;) {
    const double* row = &lower_[i * w];
    const double xi = x[i];
    for (std::size_t k = 1; k <= std::min(b_, i); ++k) x[i - k] -= row[k] * xi;
  }
}

}  // namespace robin::eig
