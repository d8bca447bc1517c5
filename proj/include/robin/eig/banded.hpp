#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace robin::eig {

/// Symmetric matrix with half-bandwidth b, lower band stored row by row:
/// entry (i, i−k) for 0 ≤ k ≤ b lives at data[i·(b+1) + k].
class SymmetricBandedMatrix {
 public:
  SymmetricBandedMatrix(std::size_t n, std::size_t bandwidth);

  std::size_t size() const noexcept { return n_; }
  std::size_t bandwidth() const noexcept { return b_; }

  /// Symmetric access; returns 0 outside the band.
  double operator()(std::size_t i, std::size_t j) const;
  /// Adds v to (i, j) and, implicitly, to (j, i). Throws if outside the band.
  void add(std::size_t i, std::size_t j, double v);
  void set(std::size_t i, std::size_t j, double v);

  void multiply(std::span<const double> x, std::span<double> y) const;
  Eigen::VectorXd operator*(const Eigen::VectorXd& x) const;

  double quadratic_form(std::span<const double> x) const;

  /// Largest absolute row sum.
  double norm_inf() const;

  Eigen::MatrixXd dense() const;
  static SymmetricBandedMatrix from_dense(const Eigen::MatrixXd& m, std::size_t bandwidth);

  /// Lower-triangle triplets "row col value", one per line, zeros skipped.
  void write_triplets(std::ostream& out) const;

  const std::vector<double>& data() const noexcept { return data_; }

 private:
  std::size_t n_;
  std::size_t b_;
  std::vector<double> data_;
};

/// LDLᵀ factorization of A − σM without pivoting. By Sylvester's law the
/// number of negative pivots is the number of eigenvalues of (A, M) below σ.
class ShiftedFactorization {
 public:
  double shift() const noexcept { return shift_; }
  std::size_t size() const noexcept { return n_; }
  /// Count of eigenvalues strictly below the shift.
  std::size_t negative_count() const noexcept { return negatives_; }

  /// Solves (A − σM) x = rhs in place.
  void solve(std::span<double> rhs) const;

 private:
  friend ShiftedFactorization factorize_shifted(const SymmetricBandedMatrix&, const SymmetricBandedMatrix&, double);

  std::size_t n_ = 0;
  std::size_t b_ = 0;
  double shift_ = 0.0;
  std::size_t negatives_ = 0;
  std::vector<double> lower_;  // unit lower factor, same layout as the matrix (diagonal slot unused)
  std::vector<double> pivots_;
};

/// Throws SingularShift when a pivot vanishes to working precision.
ShiftedFactorization factorize_shifted(const SymmetricBandedMatrix& a, const SymmetricBandedMatrix& m, double shift);

}  // namespace robin::eig
