#include "robin/transplant/transplant.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <fmt/format.h>

#include "robin/errors.hpp"

namespace robin::transplant {

namespace {

using geometry::kTwoPi;

constexpr double kGaussX[3] = {0.5 - 0.3872983346207417, 0.5, 0.5 + 0.3872983346207417};
constexpr double kGaussW[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
constexpr double kEps = std::numeric_limits<double>::epsilon();

// ∫ f², ∫ t f², ∫ f'², ∫ t f'² of a piecewise-linear profile, 3-point Gauss
// per element (exact for these polynomial integrands).
struct Moments {
  double m0 = 0, m1 = 0, d0 = 0, d1 = 0;
};

Moments moments(const fiber::RadialProfile& f) {
  Moments m;
  const auto& t = f.t;
  for (std::size_t e = 0; e + 1 < t.size(); ++e) {
    const double h = t[e + 1] - t[e];
    const double slope = (f.values[e + 1] - f.values[e]) / h;
    for (int g = 0; g < 3; ++g) {
      const double x = kGaussX[g];
      const double tt = t[e] + h * x;
      const double v = (1 - x) * f.values[e] + x * f.values[e + 1];
      const double w = h * kGaussW[g];
      m.m0 += w * v * v;
      m.m1 += w * tt * v * v;
      m.d0 += w * slope * slope;
      m.d1 += w * tt * slope * slope;
    }
  }
  return m;
}

// Value and slope of a piecewise-linear profile on a cell of a finer mesh,
// zero beyond its support.
struct Linear {
  double value, slope;
};
Linear sample(const fiber::RadialProfile& f, double left, double right, double x) {
  const double mid = 0.5 * (left + right);
  if (mid >= f.t.back()) return {0.0, 0.0};
  const auto it = std::upper_bound(f.t.begin(), f.t.end(), mid);
  const auto e = static_cast<std::size_t>(it - f.t.begin()) - 1;
  const double slope = (f.values[e + 1] - f.values[e]) / (f.t[e + 1] - f.t[e]);
  const double tt = left + (right - left) * x;
  return {f.values[e] + slope * (tt - f.t[e]), slope};
}

std::vector<double> merged_nodes(const fiber::RadialProfile& a, const fiber::RadialProfile& b) {
  std::vector<double> out;
  out.reserve(a.t.size() + b.t.size());
  std::merge(a.t.begin(), a.t.end(), b.t.begin(), b.t.end(), std::back_inserter(out));
  const double end = std::min(a.t.back(), b.t.back());
  std::vector<double> unique;
  for (double t : out) {
    if (t > end) break;
    if (unique.empty() || t - unique.back() > 1e-14 * std::max(1.0, t)) unique.push_back(t);
  }
  if (unique.back() < end) unique.push_back(end);
  return unique;
}

void require_exterior_profile(const fiber::RadialProfile& f, const char* name) {
  if (f.t.size() < 2) throw std::invalid_argument(fmt::format("transplant: {} is empty", name));
  if (f.values.back() != 0.0) {
    throw std::invalid_argument(fmt::format("transplant: {} must vanish at the truncation radius", name));
  }
}

struct NodeSums {
  double length = 0;  // Σ speed·h
  double total = 0;   // Σ κ·speed·h
};
NodeSums node_sums(const geometry::PlanarCurve& curve) {
  if (curve.offset != 0.0) throw std::invalid_argument("transplant: needs the base curve, not a parallel curve");
  NodeSums s;
  for (std::size_t i = 0; i < curve.size(); ++i) {
    s.length += curve.speed[i];
    s.total += curve.kappa[i] * curve.speed[i];
  }
  s.length *= curve.step();
  s.total *= curve.step();
  return s;
}

// ∫∫ κ²φ²/(1 + tκ) over every `stride`-th curve node.
double potential(const geometry::PlanarCurve& curve, const fiber::RadialProfile& phi, std::size_t stride) {
  double sum = 0.0;
  for (std::size_t i = 0; i < curve.size(); i += stride) {
    const double k = curve.kappa[i];
    double inner = 0.0;
    for (std::size_t e = 0; e + 1 < phi.t.size(); ++e) {
      const double h = phi.t[e + 1] - phi.t[e];
      for (int g = 0; g < 3; ++g) {
        const double x = kGaussX[g];
        const double v = (1 - x) * phi.values[e] + x * phi.values[e + 1];
        inner += h * kGaussW[g] * k * k * v * v / (1 + (phi.t[e] + h * x) * k);
      }
    }
    sum += curve.speed[i] * inner;
  }
  return sum * curve.step() * static_cast<double>(stride);
}

// ∫ κ∘²φ²/(1 + tκ∘) dt
double disk_potential(double kappa, const fiber::RadialProfile& phi) {
  double sum = 0.0;
  for (std::size_t e = 0; e + 1 < phi.t.size(); ++e) {
    const double h = phi.t[e + 1] - phi.t[e];
    for (int g = 0; g < 3; ++g) {
      const double x = kGaussX[g];
      const double v = (1 - x) * phi.values[e] + x * phi.values[e + 1];
      sum += h * kGaussW[g] * kappa * kappa * v * v / (1 + (phi.t[e] + h * x) * kappa);
    }
  }
  return sum;
}

fiber::RadialProfile first_profile(const fiber::FiberSolution& s) {
  if (s.profiles.empty()) return {};
  return s.profiles.front();
}

}  // namespace

void RadialProfilePair::validate() const {
  const auto check = [](const fiber::RadialProfile& f, const char* name) {
    if (f.t.size() < 2 || f.t.size() != f.values.size()) {
      throw std::invalid_argument(fmt::format("profile {}: needs matching t and value samples", name));
    }
    if (f.t.front() != 0.0) throw std::invalid_argument(fmt::format("profile {}: mesh must start at t = 0", name));
    for (std::size_t i = 0; i < f.t.size(); ++i) {
      if (!std::isfinite(f.values[i])) throw std::invalid_argument(fmt::format("profile {}: non-finite sample", name));
      if (i > 0 && !(f.t[i] > f.t[i - 1])) throw std::invalid_argument(fmt::format("profile {}: mesh not increasing", name));
    }
    if (!(f.perimeter > 0.0)) throw std::invalid_argument(fmt::format("profile {}: perimeter must be positive", name));
    if (!std::isfinite(weighted_h1_norm2(f))) throw std::invalid_argument(fmt::format("profile {}: not integrable", name));
  };
  check(psi, "psi");
  if (has_phi()) check(phi, "phi");
}

std::vector<double> element_slopes(const fiber::RadialProfile& profile) {
  std::vector<double> out;
  for (std::size_t e = 0; e + 1 < profile.t.size(); ++e) {
    out.push_back((profile.values[e + 1] - profile.values[e]) / (profile.t[e + 1] - profile.t[e]));
  }
  return out;
}

double weighted_h1_norm2(const fiber::RadialProfile& profile) {
  const auto m = moments(profile);
  const double c = kTwoPi / profile.perimeter;
  return m.m0 + c * m.m1 + m.d0 + c * m.d1;
}

RadialProfilePair disk_profiles(double perimeter, double alpha, std::size_t elements) {
  auto f1 = fiber::solve_exterior_fiber(1, perimeter, alpha, elements);
  auto f0 = fiber::solve_exterior_fiber(0, perimeter, alpha, elements, 1, {}, f1.truncation);
  if (!f1.values.empty() && f0.truncation > f1.truncation) {
    f1 = fiber::solve_exterior_fiber(1, perimeter, alpha, elements, 1, {}, f0.truncation);
  }
  RadialProfilePair out;
  out.psi = first_profile(f0);
  out.phi = first_profile(f1);
  if (out.psi.t.empty()) {
    throw std::invalid_argument(fmt::format("disk exterior with alpha = {} has no bound state", alpha));
  }
  out.source = fmt::format("disk exterior L0={:.17g} alpha={:.17g} elements={} T={:.17g}", perimeter, alpha, elements,
                           f0.truncation);
  return out;
}

RadialProfilePair annulus_profile(double perimeter, double width, double alpha, std::size_t elements) {
  fiber::FiberProblem p;
  p.mode = 0;
  p.perimeter = perimeter;
  p.width = width;
  p.alpha = alpha;
  p.mesh = fiber::GradedMesh::for_robin(width, elements, alpha, false);
  const auto sol = fiber::solve_fiber(p, 1);
  RadialProfilePair out;
  out.psi = first_profile(sol);
  out.source = fmt::format("annulus L0={:.17g} d={:.17g} alpha={:.17g} elements={}", perimeter, width, alpha, elements);
  return out;
}

RayleighReport rayleigh_u_star(const geometry::PlanarCurve& curve, double width, double alpha,
                               const fiber::RadialProfile& psi) {
  const bool exterior = std::isinf(width);
  if (exterior) {
    require_exterior_profile(psi, "psi");
  } else {
    if (psi.t.size() < 2) throw std::invalid_argument("transplant: psi is empty");
    if (std::abs(psi.t.back() - width) > 1e-12 * std::max(1.0, width)) {
      throw std::invalid_argument(fmt::format("transplant: psi spans [0, {}], strip width is {}", psi.t.back(), width));
    }
  }
  const double length = curve.period();
  const auto m = moments(psi);
  const auto ns = node_sums(curve);
  const double p0 = psi.values.front(), pd = psi.values.back();

  RayleighReport r;
  r.numerator = length * m.d0 + kTwoPi * m.d1 + alpha * length * p0 * p0;
  double direct = ns.length * m.d0 + ns.total * m.d1 + alpha * ns.length * p0 * p0;
  if (!exterior) {
    r.numerator += alpha * (length + kTwoPi * width) * pd * pd;
    direct += alpha * (ns.length + width * ns.total) * pd * pd;
  }
  r.denominator = length * m.m0 + kTwoPi * m.m1;
  if (!(r.denominator > 0.0)) throw std::invalid_argument("transplant: psi has zero norm");
  r.quotient = r.numerator / r.denominator;
  r.direct_quotient = direct / (ns.length * m.m0 + ns.total * m.m1);
  const double boundary = exterior ? length : 2 * length + kTwoPi * width;
  const double scale = (length * m.d0 + kTwoPi * m.d1 + std::abs(alpha) * boundary) / r.denominator;
  r.tolerance = std::abs(r.quotient - r.direct_quotient) + 64 * kEps * (scale + std::abs(r.quotient));
  return r;
}

VStarReport rayleigh_v_star(const geometry::PlanarCurve& curve, double alpha, const fiber::RadialProfile& phi) {
  require_exterior_profile(phi, "phi");
  VStarReport v;
  v.kappa_cap = kTwoPi / phi.perimeter;
  const auto stats = geometry::curvature_stats(curve);
  if (stats.min_kappa < 0.0) {
    throw std::invalid_argument(fmt::format("transplant: curve is not convex (min curvature {:.6g})", stats.min_kappa));
  }
  if (stats.max_kappa > v.kappa_cap * (1 + 1e-12)) {
    throw CurvatureCapViolated(
        fmt::format("max curvature {:.12g} exceeds the cap {:.12g}", stats.max_kappa, v.kappa_cap));
  }
  const double length = curve.period();
  const double disk_length = phi.perimeter;
  const auto m = moments(phi);
  const auto ns = node_sums(curve);
  const double f0 = phi.values.front();

  v.potential = potential(curve, phi, 1);
  const double coarse = curve.size() % 2 == 0 ? potential(curve, phi, 2) : v.potential;
  const double dp = disk_potential(v.kappa_cap, phi);
  v.capped_potential = length * dp;

  auto& r = v.rayleigh;
  const double kinetic = length * m.d0 + kTwoPi * m.d1;
  r.numerator = kinetic + v.potential + alpha * length * f0 * f0;
  r.denominator = length * m.m0 + kTwoPi * m.m1;
  if (!(r.denominator > 0.0)) throw std::invalid_argument("transplant: phi has zero norm");
  r.quotient = r.numerator / r.denominator;
  r.direct_quotient = (ns.length * m.d0 + ns.total * m.d1 + v.potential + alpha * ns.length * f0 * f0) /
                      (ns.length * m.m0 + ns.total * m.m1);
  r.tolerance = std::abs(v.potential - coarse) / r.denominator + std::abs(r.quotient - r.direct_quotient) +
                64 * kEps * ((kinetic + v.potential + std::abs(alpha) * length * f0 * f0) / r.denominator);

  v.capped_quotient = (kinetic + v.capped_potential + alpha * length * f0 * f0) / r.denominator;
  v.disk_quotient = (disk_length * m.d0 + kTwoPi * m.d1 + disk_length * dp + alpha * disk_length * f0 * f0) /
                    (disk_length * m.m0 + kTwoPi * m.m1);
  return v;
}

Orthogonality orthogonality_check(const geometry::PlanarCurve& curve, double alpha, const fiber::RadialProfile& psi,
                                  const fiber::RadialProfile& phi) {
  Orthogonality o;
  o.tangent_integral = geometry::tangent_integral(curve);
  o.weighted_tangent_integral = geometry::weighted_tangent_integral(curve);

  const auto nodes = merged_nodes(psi, phi);
  double p0 = 0, p1 = 0, d0 = 0, d1 = 0;
  for (std::size_t e = 0; e + 1 < nodes.size(); ++e) {
    const double a = nodes[e], b = nodes[e + 1];
    for (int g = 0; g < 3; ++g) {
      const auto u = sample(psi, a, b, kGaussX[g]);
      const auto v = sample(phi, a, b, kGaussX[g]);
      const double w = (b - a) * kGaussW[g];
      const double t = a + (b - a) * kGaussX[g];
      p0 += w * u.value * v.value;
      p1 += w * t * u.value * v.value;
      d0 += w * u.slope * v.slope;
      d1 += w * t * u.slope * v.slope;
    }
  }
  const double length = curve.period();
  const auto mu = moments(psi);
  const auto mv = moments(phi);
  const double nu = std::sqrt(length * mu.m0 + kTwoPi * mu.m1);
  const double nv = std::sqrt(length * mv.m0 + kTwoPi * mv.m1);
  const double psi0 = psi.values.front(), phi0 = phi.values.front();
  const double hu = std::sqrt(length * mu.d0 + kTwoPi * mu.d1 + std::abs(alpha) * length * psi0 * psi0);
  const double hv = std::sqrt(length * mv.d0 + kTwoPi * mv.d1 + std::abs(alpha) * length * phi0 * phi0);

  o.inner_residual = std::abs(o.tangent_integral * p0 + o.weighted_tangent_integral * p1) / (nu * nv);
  o.form_residual =
      std::abs(o.tangent_integral * (d0 + alpha * psi0 * phi0) + o.weighted_tangent_integral * d1) / (hu * hv);

  // Same integral summed node by node: Σ_i 𝐭_i (∫ψφ + κ_i ∫tψφ) h.
  std::complex<double> direct{0.0, 0.0};
  for (std::size_t i = 0; i < curve.size(); ++i) direct += curve.t(i) * curve.speed[i] * (p0 + curve.kappa[i] * p1);
  o.direct_inner_residual = std::abs(direct * curve.step()) / (nu * nv);
  return o;
}

double minmax_upper_bound(double ru, double rv, double residual) {
  if (!std::isfinite(ru) || !std::isfinite(rv)) throw std::invalid_argument("minmax_upper_bound: non-finite quotient");
  if (!(residual >= 0.0) || residual > kOrthogonalityLimit) {
    throw OrthogonalityTooWeak(fmt::format("orthogonality residual {:.3e} exceeds {:.0e}", residual, kOrthogonalityLimit));
  }
  return std::max(ru, rv) + residual * (std::abs(ru) + std::abs(rv));
}

PerimeterGap perimeter_gap(const geometry::PlanarCurve& curve, double kappa_cap) {
  if (!(kappa_cap > 0.0)) throw std::invalid_argument("perimeter_gap: curvature cap must be positive");
  PerimeterGap g;
  g.length = curve.arclength();
  g.disk_length = kTwoPi / kappa_cap;
  g.gap = g.length - g.disk_length;
  double deficit = 0.0;
  for (std::size_t i = 0; i < curve.size(); ++i) deficit += (kappa_cap - curve.kappa[i]) * curve.speed[i];
  g.gap_curvature = deficit * curve.step() / kappa_cap;
  return g;
}

SandwichReport sandwich(const std::string& curve_id, const geometry::PlanarCurve& curve, double alpha,
                        const RadialProfilePair& profiles) {
  if (!profiles.has_phi()) throw std::invalid_argument("sandwich: the disk has no second bound state");
  profiles.validate();
  SandwichReport r;
  r.curve_id = curve_id;
  r.alpha = alpha;
  const auto u = rayleigh_u_star(curve, geometry::kInfinity, alpha, profiles.psi);
  const auto v = rayleigh_v_star(curve, alpha, profiles.phi);
  r.ru = u.quotient;
  r.rv = v.rayleigh.quotient;
  r.residuals = orthogonality_check(curve, alpha, profiles.psi, profiles.phi);
  r.bound = minmax_upper_bound(r.ru, r.rv, std::max(r.residuals.inner_residual, r.residuals.form_residual));
  r.lambda2_disk = v.disk_quotient;
  r.quadrature_tolerance = std::max(u.tolerance, v.rayleigh.tolerance);
  return r;
}

nlohmann::json to_json(const SandwichReport& r) {
  nlohmann::json j;
  j["curve_id"] = r.curve_id;
  j["alpha"] = r.alpha;
  if (std::isinf(r.width)) {
    j["d"] = "inf";
  } else {
    j["d"] = r.width;
  }
  j["Ru"] = r.ru;
  j["Rv"] = r.rv;
  j["bound"] = r.bound;
  j["lambda2_disk"] = r.lambda2_disk;
  j["residuals"] = {
      {"tangent_integral", std::abs(r.residuals.tangent_integral)},
      {"weighted_tangent_integral", std::abs(r.residuals.weighted_tangent_integral)},
      {"inner", r.residuals.inner_residual},
      {"form", r.residuals.form_residual},
      {"inner_direct", r.residuals.direct_inner_residual},
  };
  j["tolerances"] = {{"quadrature", r.quadrature_tolerance}, {"orthogonality", kOrthogonalityLimit}};
  return j;
}

}  // namespace robin::transplant
