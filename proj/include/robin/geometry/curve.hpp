#pragma once

#include <complex>
#include <cstddef>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace robin::geometry {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;
inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

/// One cosine term a·cos(2πk s/L + φ) of a curvature profile.
struct FourierMode {
  int k = 0;
  double amplitude = 0.0;
  double phase = 0.0;
};

/// Periodic signed curvature κ(s) on [0, L):
///
///   κ(s) = 2π/L + Σ a_k cos(2πk s/L + φ_k)
///
/// The constant term is not a free parameter; it is what makes the tangent
/// angle advance by exactly 2π over one period.
class CurvatureProfile {
 public:
  CurvatureProfile(double length, std::vector<FourierMode> modes);

  static CurvatureProfile circle(double radius);

  /// Band-limited (trigonometric) interpolant of uniform samples κ(iL/N).
  /// The sample mean must equal 2π/L; throws ClosureError otherwise.
  static CurvatureProfile from_samples(double length, std::span<const double> samples);

  double length() const noexcept { return length_; }
  double mean_curvature() const noexcept { return kTwoPi / length_; }
  const std::vector<FourierMode>& modes() const noexcept { return modes_; }
  int max_harmonic() const noexcept;

  double curvature(double s) const;
  /// θ(s) = ∫₀^s κ, so θ(0) = 0 and θ(L) = 2π.
  double tangent_angle(double s) const;

 private:
  double length_;
  std::vector<FourierMode> modes_;
};

struct BuildOptions {
  /// Closure tolerance relative to L.
  double closure_tolerance = 1e-10;
  /// Reject curves whose node polygon intersects itself.
  bool require_simple = true;
};

/// Closed curve sampled at uniform parameter nodes s_i = iL/N.
///
/// A base curve is parametrized by arclength (speed ≡ 1). The parallel
/// curve at distance d keeps the base parameter, so its speed is 1 + dκ(s)
/// and its curvature is κ/(1 + dκ).
struct PlanarCurve {
  CurvatureProfile profile{kTwoPi, {}};
  double offset = 0.0;

  std::vector<double> s;
  std::vector<double> angle;
  std::vector<double> kappa;
  std::vector<double> speed;
  std::vector<Vec2> position;
  std::vector<Vec2> tangent;
  std::vector<Vec2> normal;

  double closure_residual = 0.0;
  double frenet_residual = 0.0;

  std::size_t size() const noexcept { return s.size(); }
  double period() const noexcept { return profile.length(); }
  double step() const noexcept { return profile.length() / static_cast<double>(s.size()); }

  /// Complexified tangent 𝐭 = τ₁ + iτ₂ and normal 𝐧 = ν₁ + iν₂ at node i.
  std::complex<double> t(std::size_t i) const { return {tangent[i].x, tangent[i].y}; }
  std::complex<double> n(std::size_t i) const { return {normal[i].x, normal[i].y}; }

  /// Curvature at an arbitrary parameter value (exact, from the profile).
  double curvature_at(double param) const;

  double arclength() const;
  double signed_area() const;
};

PlanarCurve build_curve(const CurvatureProfile& profile, std::size_t nodes, const BuildOptions& options = {});

struct CurvatureStats {
  double min_kappa = 0.0;
  double max_kappa = 0.0;
  double norm_kappa_minus = 0.0;
  double total_curvature = 0.0;
};

CurvatureStats curvature_stats(const PlanarCurve& curve);

struct CriticalWidth {
  enum class Limit { Unbounded, LocalJacobian, GlobalIntersection };
  double value = kInfinity;
  double tolerance = 0.0;
  Limit limit = Limit::Unbounded;
};

/// Largest d for which (s,t) ↦ σ(s) + tν(s) is injective on [0,L)×(0,d).
///
/// Bisection on d, combining the local test 1 + κ_min d > 0 with a
/// segment-sweep self-intersection test of the offset polygon resampled
/// at max(2048, N) nodes. searchTol ≤ 0 selects 1e-6·L.
CriticalWidth critical_width(const PlanarCurve& curve, double searchTol = 0.0);

/// True iff ∫_s^{s'} κ > −π for all node pairs s < s'.
bool angle_condition(const PlanarCurve& curve);

/// min over node pairs s_i < s_j of θ(s_j) − θ(s_i), clamped above at 0.
double min_partial_turning(const PlanarCurve& curve);

/// The outer boundary s ↦ σ(s) + dν(s) of the strip of width d.
PlanarCurve offset_boundary(const PlanarCurve& curve, double d);

/// Tangent-angle closure integral ∫₀^L 𝐭 ds and ∫₀^L 𝐭κ ds by the periodic trapezoid rule.
std::complex<double> tangent_integral(const PlanarCurve& curve);
std::complex<double> weighted_tangent_integral(const PlanarCurve& curve);

/// Polygon through the points (closed) has a proper or touching crossing
/// between two non-adjacent edges. Sort-and-sweep over x extents.
bool polygon_self_intersects(std::span<const Vec2> points);

void write_curve_csv(std::ostream& out, const PlanarCurve& curve);

/// Profile document: {"length": L, "modes": [{"k", "amplitude", "phase"}], "nodes": N}
/// or {"length": L, "samples": [...], "nodes": N}.
struct ProfileDocument {
  CurvatureProfile profile;
  std::size_t nodes = 256;
};

ProfileDocument read_profile_document(const std::string& text);
std::string write_profile_document(const ProfileDocument& doc);

}  // namespace robin::geometry
