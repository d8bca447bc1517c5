#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "robin/eig/banded.hpp"
#include "robin/eig/eigensolver.hpp"
#include "robin/fiber/fiber.hpp"
#include "robin/geometry/curve.hpp"

namespace robin::strip {

/// Periodic tensor grid: n_s uniform nodes in s, the nodes of `t` in t.
/// n_t counts t-cells, so `t` has n_t + 1 nodes.
struct StripMesh {
  std::size_t n_s = 0;
  fiber::GradedMesh t;

  std::size_t n_t() const noexcept { return t.elements(); }
  /// Doubles both directions; the refined grid contains every old node.
  StripMesh refined() const;
};

/// Robin Laplacian on the strip {σ(s) + tν(s) : 0 < t < d} over the curve
/// with curvature `profile`, or on the exterior (d = ∞, truncated at the end
/// of the t-mesh with a Dirichlet condition).
struct StripProblem {
  geometry::CurvatureProfile profile = geometry::CurvatureProfile::circle(1.0);
  double width = 0.0;
  double alpha = 0.0;
  StripMesh mesh;
  /// Estimate of λ₁ passed to the eigensolver to save shift searches.
  std::optional<double> lambda_hint;

  bool exterior() const noexcept;
  double truncation() const noexcept { return mesh.t.length(); }
  double length() const noexcept { return profile.length(); }
};

/// Builds a problem with a t-mesh graded toward the boundary layer 1/|α|.
/// For d = ∞ `truncation` is the Dirichlet radius T. Validates the domain:
/// d < d⋆ when κ changes sign, κ ≥ 0 and α < 0 when d = ∞.
StripProblem make_strip_problem(const geometry::CurvatureProfile& profile, double width, double alpha,
                                std::size_t n_s, std::size_t n_t, double truncation = 0.0);

struct StripMatrices {
  eig::SymmetricBandedMatrix a{1, 0};
  eig::SymmetricBandedMatrix m{1, 0};
  std::size_t n_s = 0;
  std::size_t t_nodes = 0;  ///< t-levels carrying unknowns
  /// Unknown index of grid node (i, j).
  std::size_t dof(std::size_t i, std::size_t j) const;
};

/// Bilinear elements, 3×3 Gauss points per cell:
///   ∫∫ ∂_s u ∂_s v/(1+κt) + ∂_t u ∂_t v (1+κt) + α∫u v(s,0) ds + α∫u v(s,d)(1+κd) ds,
///   M = ∫∫ u v (1+κt).
/// Unknowns are ordered t-level by t-level with s interleaved
/// (0, 1, n−1, 2, n−2, …), giving half-bandwidth n_s + 2.
/// Throws JacobianNonPositive if 1 + κt ≤ 0 at a quadrature point.
StripMatrices assemble_strip(const StripProblem& p);

struct StripSolution {
  std::vector<double> values;     ///< ascending; negative only for d = ∞
  std::vector<double> residuals;
  /// Nodal values u(s_i, t_j), rows i < n_s, columns j ≤ n_t (Dirichlet zeros included).
  std::vector<Eigen::MatrixXd> eigenfunctions;
  /// Index pairs (k, k+1) whose relative gap is within the pairing tolerance.
  std::vector<std::pair<std::size_t, std::size_t>> degenerate_pairs;
  bool essential_only = false;
  double truncation = 0.0;
  std::size_t n_s = 0;
  std::size_t n_t = 0;
  std::size_t certificate_count = 0;
  std::string log;
};

constexpr double kPairingTolerance = 1e-7;

/// k smallest eigenpairs. For d = ∞ only eigenvalues below 0 are returned
/// (inertia at 0 bounds how many are requested).
StripSolution solve_strip(const StripProblem& p, std::size_t k, double tol = 1e-8);

/// Eigenvalues over nested refinements starting at p.mesh, extrapolated
/// assuming O(h²).
struct ConvergenceReport {
  std::vector<std::pair<std::size_t, std::size_t>> levels;  ///< (n_s, n_t)
  std::vector<std::vector<double>> values;                  ///< [level][index]
  /// Per index, from the two finest levels. The error bar is |c − f|/3, or with
  /// three or more levels in the O(h²) regime the change of the extrapolated
  /// value over the last refinement.
  std::vector<fiber::Extrapolated> extrapolated;
  /// log2 of successive difference ratios from the three finest levels; NaN with two levels.
  std::vector<double> observed_order;
  /// Per index: every refinement lowered (or kept) the eigenvalue.
  bool monotone = true;
  /// Set when the O(h²) model does not describe the data (reported, not fatal).
  bool non_monotone_convergence = false;
  StripSolution finest;
};
ConvergenceReport convergence_report(const StripProblem& p, std::size_t levels, std::size_t k, double tol = 1e-8);

/// Eigenfunction k on the grid: s, t, x, y, Re u, Im u.
void write_eigenfunction_csv(std::ostream& out, const StripProblem& p, const StripSolution& sol, std::size_t k);

}  // namespace robin::strip
