#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "robin/eig/banded.hpp"

namespace robin::eig {

struct EigOptions {
  double tol = 1e-10;
  std::size_t block_size = 2;
  std::uint64_t seed = 0x5eedULL;
  /// Krylov basis size before a restart; 0 picks a size from n and k.
  std::size_t max_basis = 0;
  std::size_t max_restarts = 40;
  /// Estimate of the smallest eigenvalue; the solver shifts below it.
  std::optional<double> shift_hint;
};

/// k smallest eigenpairs of A v = λ M v, ascending. Vectors are M-orthonormal.
struct GeneralizedEigResult {
  std::vector<double> values;
  Eigen::MatrixXd vectors;
  /// ‖Av − λMv‖ / ‖Mv‖ per pair.
  std::vector<double> residuals;

  std::size_t iterations = 0;
  std::size_t restarts = 0;
  /// Shift below the spectrum used for shift-invert (inertia 0 there).
  double lower_shift = 0.0;
  /// Shift just above the last returned cluster and its inertia.
  double certificate_shift = 0.0;
  std::size_t certificate_count = 0;
  std::string log;
};

/// Shift-invert block Krylov with full M-reorthogonalization and
/// Rayleigh-Ritz extraction. The count of eigenvalues below the certificate
/// shift is checked against the factorization inertia there; a mismatch
/// widens the search until they agree.
GeneralizedEigResult smallest_eigenpairs(const SymmetricBandedMatrix& a, const SymmetricBandedMatrix& m, std::size_t k,
                                         const EigOptions& options = {});

/// Number of eigenvalues of (A, M) strictly below sigma, perturbing sigma
/// slightly if it happens to be singular.
std::size_t count_below(const SymmetricBandedMatrix& a, const SymmetricBandedMatrix& m, double sigma);

}  // namespace robin::eig
