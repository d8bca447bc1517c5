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

namespace robin::fiber {

/// Node list on [0, length], refined toward t = 0.
///
/// Nodes are t(ξ_i), ξ_i = i/N, for one of two smooth maps:
///  - layer map  t(ξ) = c·(ξ − (1−r)·β·(1 − e^{−ξ/β})), spacing ratio r ≈ layer/length
///    confined to the first ~β of the interval (finite widths);
///  - geometric map  t(ξ) = length·(e^{γξ} − 1)/(e^{γ} − 1), spacing growing by
///    e^{γ} across the interval (exterior fibers, where the profile decays
///    exponentially all the way to T).
/// Doubling N with the same map keeps every old node, so refinements are nested.
class GradedMesh {
 public:
  GradedMesh() = default;
  /// Layer map; `layer` is the boundary-layer width (1/|α| for Robin problems).
  GradedMesh(double length, std::size_t elements, double layer);

  static GradedMesh uniform(double length, std::size_t elements);
  /// Geometric map with last/first spacing ratio `ratio` ≥ 1.
  static GradedMesh geometric(double length, std::size_t elements, double ratio);
  static GradedMesh from_nodes(std::vector<double> nodes);
  /// Default mesh for a Robin problem: geometric (ratio 50) on a truncated
  /// exterior, layer map of width 1/|α| otherwise.
  static GradedMesh for_robin(double length, std::size_t elements, double alpha, bool exterior);

  std::size_t elements() const noexcept { return nodes_.empty() ? 0 : nodes_.size() - 1; }
  double length() const noexcept { return nodes_.empty() ? 0.0 : nodes_.back(); }
  const std::vector<double>& nodes() const noexcept { return nodes_; }

  /// Same map with twice the elements; contains every node of *this.
  GradedMesh refined() const;
  /// Appends uniform elements of the current last spacing out to new_length.
  GradedMesh extended(double new_length) const;

 private:
  enum class Map { None, Layer, Geometric };
  std::vector<double> nodes_;
  double parameter_ = 0.0;
  Map map_ = Map::None;
};

enum class BoundaryKind { Robin, Dirichlet };

/// Angular mode n of the Robin Laplacian on the annulus of inner perimeter L∘
/// and width d, or of the exterior disk (d = ∞, truncated at T with a
/// Dirichlet condition). Weight w(t) = 1 + 2πt/L∘.
struct FiberProblem {
  int mode = 0;
  double perimeter = 0.0;
  double width = 0.0;  ///< may be infinite
  double alpha = 0.0;
  GradedMesh mesh;     ///< spans [0, d] or [0, T]
  BoundaryKind inner = BoundaryKind::Robin;
  BoundaryKind outer = BoundaryKind::Robin;  ///< ignored (Dirichlet) when d = ∞

  bool exterior() const noexcept;
  double truncation() const noexcept { return mesh.length(); }
  double weight(double t) const noexcept;
  void validate() const;
};

struct FiberMatrices {
  eig::SymmetricBandedMatrix a{1, 0};
  eig::SymmetricBandedMatrix m{1, 0};
  /// Mesh node index of each unknown (Dirichlet nodes are eliminated).
  std::vector<std::size_t> node_of_dof;
};

/// Linear elements with 3-point Gauss quadrature per element:
///   A = ∫ψ'φ'w + (2πn/L∘)²∫ψφ/w + αψ(0)φ(0) + α(1 + 2πd/L∘)ψ(d)φ(d),
///   M = ∫ψφw.
/// Throws MeshTooCoarse below 32 elements.
FiberMatrices assemble_fiber(const FiberProblem& p);

/// Piecewise-linear radial eigenfunction, normalized to ∫ψ²w dt = 1 and
/// signed so that ψ(0) ≥ 0.
struct RadialProfile {
  int mode = 0;
  double lambda = 0.0;
  double perimeter = 0.0;
  std::vector<double> t;
  std::vector<double> values;

  double at(double s) const;
  double inner_value() const { return values.front(); }
  double outer_value() const { return values.back(); }
};

struct FiberSolution {
  int mode = 0;
  std::vector<double> values;
  std::vector<double> residuals;
  std::vector<RadialProfile> profiles;
  double truncation = 0.0;  ///< mesh length (T when exterior)
  std::size_t elements = 0;
  /// λ(T) − λ(2T) for the last reported eigenvalue; 0 for finite width.
  double truncation_gap = 0.0;
  std::string log;
};

/// `count` lowest eigenpairs of one fiber. For exterior fibers only negative
/// eigenvalues are returned.
FiberSolution solve_fiber(const FiberProblem& p, std::size_t count, double tol = 1e-10);

struct TruncationPolicy {
  double initial_factor = 12.0;  ///< T = factor / √(−λ_est)
  double tolerance = 1e-9;       ///< accepted λ(T) − λ(2T)
  double max_truncation = 1e4;
};

/// Exterior fiber with the truncation radius chosen adaptively: T starts at
/// 12/|α|, is raised to 12/√(−λ), and doubles until extending the mesh to 2T
/// moves every reported eigenvalue by at most the tolerance. `minimum_T`
/// forces a larger starting radius (to share T across fibers).
FiberSolution solve_exterior_fiber(int mode, double perimeter, double alpha, std::size_t elements,
                                   std::size_t count = 1, const TruncationPolicy& policy = {},
                                   double minimum_truncation = 0.0);

/// Richardson extrapolation of an O(h^order) sequence from a coarse and a
/// once-refined value.
struct Extrapolated {
  double value = 0.0;
  double errbar = 0.0;
  double coarse = 0.0;
  double fine = 0.0;
};
Extrapolated richardson(double coarse, double fine, int order = 2);

/// Fiber eigenvalues at `elements` and 2·`elements` on nested meshes sharing
/// one truncation radius (for d = ∞), extrapolated per index.
struct FiberConvergence {
  int mode = 0;
  std::vector<Extrapolated> values;
  double truncation = 0.0;
  FiberSolution coarse;
  FiberSolution fine;
};
FiberConvergence fiber_convergence(int mode, double perimeter, double width, double alpha, std::size_t elements,
                                   std::size_t count = 1, const TruncationPolicy& policy = {});

struct ModeEigenvalue {
  int mode = 0;  ///< signed angular index
  std::size_t index = 0;  ///< 1-based position inside the fiber
  double lambda = 0.0;
  int multiplicity = 1;  ///< 2 for n ≠ 0
};

struct Spectrum {
  std::vector<ModeEigenvalue> eigenvalues;  ///< ascending, ±n listed separately
  bool essential_only = false;              ///< exterior with no discrete spectrum
  double truncation = 0.0;
  std::vector<FiberSolution> fibers;        ///< one per n ≥ 0 that was solved
};

/// Negative eigenvalues of the exterior disk with boundary length L∘. Fibers
/// n = 0, 1, … are solved until one has no bound state (at most kmax).
Spectrum disk_exterior_spectrum(double perimeter, double alpha, int kmax = 8, std::size_t elements = 512,
                                const TruncationPolicy& policy = {});

/// Lowest `per_fiber` eigenvalues of each fiber 0 ≤ n ≤ kmax of the annulus.
Spectrum annulus_spectrum(double perimeter, double width, double alpha, int kmax = 4, std::size_t elements = 512,
                          std::size_t per_fiber = 2);

struct Lambda2Row {
  double perimeter = 0.0;
  std::optional<double> lambda2;  ///< empty: no second bound state
  double truncation = 0.0;
};
/// λ₂ of the exterior disk for each perimeter in an ascending grid.
std::vector<Lambda2Row> lambda2_vs_perimeter(double alpha, const std::vector<double>& perimeters,
                                             std::size_t elements = 512);

/// Angular Fourier coefficient
///   Π_n u(t_j) = L^{−1/2} Σ_i u(s_i, t_j) e^{−2πi n s_i/L} · L/n_s
/// of values sampled on a periodic grid (rows: s nodes, columns: t nodes).
Eigen::VectorXcd angular_project(const Eigen::MatrixXcd& u, double perimeter, int n);

void write_fiber_csv(std::ostream& out, const std::vector<FiberSolution>& fibers);
void write_profile_csv(std::ostream& out, const RadialProfile& profile);

}  // namespace robin::fiber
