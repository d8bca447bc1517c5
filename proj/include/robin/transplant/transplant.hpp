#pragma once

#include <complex>
#include <string>
#include <vector>

#include <json.hpp>

#include "robin/fiber/fiber.hpp"
#include "robin/geometry/curve.hpp"

namespace robin::transplant {

/// Radial profiles of the disk (or annulus) eigenfunctions
///   u∘(s,t) = ψ(t),  v∘±(s,t) = e^{±2πis/L∘} φ(t),
/// kept piecewise linear on the fiber mesh they were solved on.
struct RadialProfilePair {
  fiber::RadialProfile psi;
  fiber::RadialProfile phi;  ///< empty `t` when only ψ is needed
  std::string source;

  bool has_phi() const noexcept { return !phi.t.empty(); }
  /// Finite, real samples with ∫(ψ² + ψ'²)(1 + 2πt/L∘) dt < ∞ on the mesh.
  void validate() const;
};

/// Slope of a piecewise-linear profile on each element.
std::vector<double> element_slopes(const fiber::RadialProfile& profile);

/// ∫(f² + f'²)(1 + 2πt/L∘) dt for a piecewise-linear profile.
double weighted_h1_norm2(const fiber::RadialProfile& profile);

/// Profiles from converged fiber solves on the exterior of the disk with
/// boundary length L∘: ψ from n = 0, φ from n = 1 (empty when n = 1 has no
/// bound state).
RadialProfilePair disk_profiles(double perimeter, double alpha, std::size_t elements = 1024);
/// Ground-state profile of the annulus of inner length L∘ and width d.
RadialProfilePair annulus_profile(double perimeter, double width, double alpha, std::size_t elements = 1024);

struct RayleighReport {
  double numerator = 0.0;
  double denominator = 0.0;
  double quotient = 0.0;
  /// The same quotient with the s-integrals done on the curve nodes instead
  /// of through the total-curvature identity.
  double direct_quotient = 0.0;
  /// Estimated quadrature error of `quotient` (s-trapezoid at half resolution
  /// against full resolution, plus accumulated rounding).
  double tolerance = 0.0;
};

/// R[u⋆] for u⋆(s,t) = ψ(t) on the strip of width d (d = ∞: the exterior,
/// ψ supported on its truncated mesh):
///   (∫ψ'²(L + 2πt) + αL ψ(0)² + α(L + 2πd) ψ(d)²) / ∫ψ²(L + 2πt).
/// For finite d the profile mesh must end at d.
RayleighReport rayleigh_u_star(const geometry::PlanarCurve& curve, double width, double alpha,
                               const fiber::RadialProfile& psi);

/// R[v⋆] for v⋆(s,t) = 𝐭(s)φ(t) on the exterior of a convex curve:
///   (∫φ'²(L + 2πt) + ∫∫κ²φ²/(1 + tκ) + αL φ(0)²) / ∫φ²(L + 2πt).
struct VStarReport {
  RayleighReport rayleigh;
  double kappa_cap = 0.0;        ///< κ∘ = 2π/L∘ of the profile's disk
  double potential = 0.0;        ///< ∫∫κ²φ²/(1 + tκ)
  double capped_potential = 0.0; ///< L∫κ∘²φ²/(1 + tκ∘)
  /// Quotient with κ replaced by κ∘ (weights still L + 2πt).
  double capped_quotient = 0.0;
  /// Quotient of v∘ on the disk exterior; the discrete λ₂ of the profile's fiber.
  double disk_quotient = 0.0;
};

/// Throws CurvatureCapViolated if max κ > κ∘ and std::invalid_argument if the
/// curve is not convex.
VStarReport rayleigh_v_star(const geometry::PlanarCurve& curve, double alpha, const fiber::RadialProfile& phi);

struct Orthogonality {
  std::complex<double> tangent_integral;           ///< ∫𝐭 ds
  std::complex<double> weighted_tangent_integral;  ///< ∫𝐭κ ds
  /// |(v⋆, u⋆)| / (‖u⋆‖‖v⋆‖), factorized as (∫𝐭)(∫ψφ) + (∫𝐭κ)(∫tψφ).
  double inner_residual = 0.0;
  /// |h[v⋆, u⋆]| / (‖u⋆‖_h‖v⋆‖_h) with ‖·‖_h² the form with |α| in place of α.
  double form_residual = 0.0;
  /// The L² residual from the unfactorized double sum.
  double direct_inner_residual = 0.0;
};
Orthogonality orthogonality_check(const geometry::PlanarCurve& curve, double alpha, const fiber::RadialProfile& psi,
                                  const fiber::RadialProfile& phi);

constexpr double kOrthogonalityLimit = 1e-6;

/// max(Ru, Rv) inflated by residual·(|Ru| + |Rv|). Throws OrthogonalityTooWeak
/// when residual > 1e-6.
double minmax_upper_bound(double ru, double rv, double residual = 0.0);

struct PerimeterGap {
  double length = 0.0;        ///< arclength of the sampled curve
  double disk_length = 0.0;   ///< 2π/κ∘
  double gap = 0.0;           ///< length − disk_length
  double gap_curvature = 0.0; ///< ∫(κ∘ − κ) ds / κ∘
};
PerimeterGap perimeter_gap(const geometry::PlanarCurve& curve, double kappa_cap);

/// Everything one λ₂ sandwich evaluation produces.
struct SandwichReport {
  std::string curve_id;
  double alpha = 0.0;
  double width = geometry::kInfinity;
  double ru = 0.0;
  double rv = 0.0;
  double bound = 0.0;
  double lambda2_disk = 0.0;  ///< discrete λ₂ of the disk fiber (= R_𝓑[v∘])
  Orthogonality residuals;
  double quadrature_tolerance = 0.0;
};

SandwichReport sandwich(const std::string& curve_id, const geometry::PlanarCurve& curve, double alpha,
                        const RadialProfilePair& profiles);

nlohmann::json to_json(const SandwichReport& r);

}  // namespace robin::transplant
