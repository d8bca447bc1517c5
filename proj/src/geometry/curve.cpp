#include "robin/geometry/curve.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>
#include <json.hpp>
#include <unsupported/Eigen/FFT>

#include "robin/errors.hpp"

namespace robin::geometry {

namespace {

using cplx = std::complex<double>;

std::vector<cplx> forward_fft(const std::vector<cplx>& values) {
  Eigen::FFT<double> fft;
  std::vector<cplx> out;
  fft.fwd(out, values);
  return out;
}

std::vector<cplx> inverse_fft(const std::vector<cplx>& coefficients) {
  Eigen::FFT<double> fft;
  std::vector<cplx> out;
  fft.inv(out, coefficients);  // includes the 1/N factor
  return out;
}

// Signed frequency of FFT bin j; the Nyquist bin is reported as 0 so that it
// drops out of differentiation and integration.
int signed_frequency(std::size_t j, std::size_t n) {
  if (2 * j == n) return 0;
  return j < n / 2 + 1 ? static_cast<int>(j) : static_cast<int>(j) - static_cast<int>(n);
}

double golden_minimize(const auto& f, double a, double b) {
  constexpr double kInvPhi = 0.6180339887498949;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int it = 0; it < 200 && std::abs(b - a) > 1e-15 * (1.0 + std::abs(a)); ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = f(d);
    }
  }
  return std::min(fc, fd);
}

// Smallest value of f over the periodic node grid, refined around every
// discrete local minimum.
double periodic_minimum(const auto& f, const std::vector<double>& nodes, double step) {
  const std::size_t n = nodes.size();
  std::vector<double> values(n);
  for (std::size_t i = 0; i < n; ++i) values[i] = f(nodes[i]);
  double best = *std::min_element(values.begin(), values.end());
  for (std::size_t i = 0; i < n; ++i) {
    const double prev = values[(i + n - 1) % n];
    const double next = values[(i + 1) % n];
    if (values[i] <= prev && values[i] <= next) {
      best = std::min(best, golden_minimize(f, nodes[i] - step, nodes[i] + step));
    }
  }
  return best;
}

double cross(const Vec2& o, const Vec2& a, const Vec2& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

bool on_segment(const Vec2& p, const Vec2& a, const Vec2& b) {
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
         p.y <= std::max(a.y, b.y);
}

bool segments_intersect(const Vec2& p1, const Vec2& p2, const Vec2& q1, const Vec2& q2) {
  const double d1 = cross(q1, q2, p1);
  const double d2 = cross(q1, q2, p2);
  const double d3 = cross(p1, p2, q1);
  const double d4 = cross(p1, p2, q2);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) return true;
  if (d1 == 0 && on_segment(p1, q1, q2)) return true;
  if (d2 == 0 && on_segment(p2, q1, q2)) return true;
  if (d3 == 0 && on_segment(q1, p1, p2)) return true;
  if (d4 == 0 && on_segment(q2, p1, p2)) return true;
  return false;
}

std::vector<Vec2> offset_points(const PlanarCurve& curve, double d) {
  std::vector<Vec2> pts(curve.size());
  for (std::size_t i = 0; i < curve.size(); ++i) {
    pts[i] = {curve.position[i].x + d * curve.normal[i].x, curve.position[i].y + d * curve.normal[i].y};
  }
  return pts;
}

}  // namespace

// --- CurvatureProfile -------------------------------------------------------

CurvatureProfile::CurvatureProfile(double length, std::vector<FourierMode> modes) : length_(length) {
  if (!(length > 0.0) || !std::isfinite(length)) throw std::invalid_argument("curvature profile: length must be positive");
  for (const auto& m : modes) {
    if (m.k < 0) throw std::invalid_argument("curvature profile: harmonic index must be non-negative");
    if (!std::isfinite(m.amplitude) || !std::isfinite(m.phase)) {
      throw std::invalid_argument("curvature profile: non-finite mode");
    }
    if (m.amplitude == 0.0) continue;
    if (m.k == 0) {
      throw std::invalid_argument("curvature profile: the constant term is fixed at 2π/L and cannot be set");
    }
    modes_.push_back(m);
  }
}

CurvatureProfile CurvatureProfile::circle(double radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("circle: radius must be positive");
  return CurvatureProfile(kTwoPi * radius, {});
}

CurvatureProfile CurvatureProfile::from_samples(double length, std::span<const double> samples) {
  const std::size_t n = samples.size();
  if (n < 4) throw std::invalid_argument("curvature samples: need at least 4 values");
  std::vector<cplx> values(samples.begin(), samples.end());
  const auto c = forward_fft(values);
  const double mean = c[0].real() / static_cast<double>(n);
  const double expected = kTwoPi / length;
  if (std::abs(mean - expected) > 1e-10 * expected) {
    throw ClosureError(fmt::format("curvature samples integrate to {:.17g} instead of 2π", mean * length),
                       std::abs(mean - expected) * length);
  }
  double scale = 0.0;
  for (double v : samples) scale = std::max(scale, std::abs(v));
  std::vector<FourierMode> modes;
  for (std::size_t j = 1; 2 * j <= n; ++j) {
    const cplx cj = c[j] / static_cast<double>(n);
    double amplitude = 2.0 * std::abs(cj);
    double phase = std::arg(cj);
    if (2 * j == n) {
      amplitude = cj.real();
      phase = 0.0;
    }
    if (std::abs(amplitude) > 1e-15 * scale) modes.push_back({static_cast<int>(j), amplitude, phase});
  }
  return CurvatureProfile(length, std::move(modes));
}

int CurvatureProfile::max_harmonic() const noexcept {
  int k = 0;
  for (const auto& m : modes_) k = std::max(k, m.k);
  return k;
}

double CurvatureProfile::curvature(double s) const {
  double value = mean_curvature();
  const double w = kTwoPi / length_;
  for (const auto& m : modes_) value += m.amplitude * std::cos(w * m.k * s + m.phase);
  return value;
}

double CurvatureProfile::tangent_angle(double s) const {
  double value = mean_curvature() * s;
  const double w = kTwoPi / length_;
  for (const auto& m : modes_) {
    value += m.amplitude / (w * m.k) * (std::sin(w * m.k * s + m.phase) - std::sin(m.phase));
  }
  return value;
}

// --- PlanarCurve ------------------------------------------------------------

double PlanarCurve::curvature_at(double param) const {
  const double k = profile.curvature(param);
  return k / (1.0 + offset * k);
}

double PlanarCurve::arclength() const {
  double sum = 0.0;
  for (double v : speed) sum += v;
  return sum * step();
}

double PlanarCurve::signed_area() const {
  double twice = 0.0;
  const std::size_t n = size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = position[i];
    const auto& b = position[(i + 1) % n];
    twice += a.x * b.y - b.x * a.y;
  }
  return 0.5 * twice;
}

PlanarCurve build_curve(const CurvatureProfile& profile, std::size_t nodes, const BuildOptions& options) {
  if (nodes < 16) throw std::invalid_argument("build_curve: need at least 16 nodes");
  if (nodes < 8 * static_cast<std::size_t>(profile.max_harmonic())) {
    throw std::invalid_argument("build_curve: node count must be at least 8x the largest harmonic index");
  }

  PlanarCurve curve;
  curve.profile = profile;
  const double length = profile.length();
  const double h = length / static_cast<double>(nodes);

  curve.s.resize(nodes);
  curve.angle.resize(nodes);
  curve.kappa.resize(nodes);
  curve.speed.assign(nodes, 1.0);
  curve.tangent.resize(nodes);
  curve.normal.resize(nodes);
  curve.position.resize(nodes);

  std::vector<cplx> t(nodes);
  for (std::size_t i = 0; i < nodes; ++i) {
    const double s = h * static_cast<double>(i);
    const double theta = profile.tangent_angle(s);
    curve.s[i] = s;
    curve.angle[i] = theta;
    curve.kappa[i] = profile.curvature(s);
    curve.tangent[i] = {std::cos(theta), std::sin(theta)};
    // Outer normal of a counter-clockwise curve: τ rotated clockwise.
    curve.normal[i] = {std::sin(theta), -std::cos(theta)};
    t[i] = {curve.tangent[i].x, curve.tangent[i].y};
  }

  const auto c = forward_fft(t);
  curve.closure_residual = std::abs(c[0]) * h;
  if (curve.closure_residual > options.closure_tolerance * length) {
    throw ClosureError(fmt::format("curve does not close: |σ(L) − σ(0)| = {:.3e}", curve.closure_residual),
                       curve.closure_residual);
  }

  // σ = ∫𝐭 and 𝐭' by spectral integration/differentiation of the node values.
  const double w = kTwoPi / length;
  std::vector<cplx> integral(nodes, cplx{0.0, 0.0});
  std::vector<cplx> derivative(nodes, cplx{0.0, 0.0});
  for (std::size_t j = 0; j < nodes; ++j) {
    const int m = signed_frequency(j, nodes);
    if (m == 0) continue;
    const cplx iw{0.0, w * m};
    integral[j] = c[j] / iw;
    derivative[j] = c[j] * iw;
  }
  const auto sigma = inverse_fft(integral);
  const auto dt = inverse_fft(derivative);
  double frenet = 0.0;
  for (std::size_t i = 0; i < nodes; ++i) {
    curve.position[i] = {sigma[i].real(), sigma[i].imag()};
    frenet = std::max(frenet, std::abs(dt[i] - cplx{0.0, curve.kappa[i]} * t[i]));
  }
  curve.frenet_residual = frenet;

  if (options.require_simple && polygon_self_intersects(curve.position)) {
    throw SelfIntersectionError("curve intersects itself");
  }
  return curve;
}

// --- statistics and validity ------------------------------------------------

CurvatureStats curvature_stats(const PlanarCurve& curve) {
  CurvatureStats stats;
  const auto kappa = [&](double s) { return curve.curvature_at(s); };
  const auto neg_kappa = [&](double s) { return -curve.curvature_at(s); };
  stats.min_kappa = periodic_minimum(kappa, curve.s, curve.step());
  stats.max_kappa = -periodic_minimum(neg_kappa, curve.s, curve.step());
  stats.norm_kappa_minus = std::max(0.0, -stats.min_kappa);
  double total = 0.0;
  for (std::size_t i = 0; i < curve.size(); ++i) total += curve.kappa[i] * curve.speed[i];
  stats.total_curvature = total * curve.step();
  return stats;
}

CriticalWidth critical_width(const PlanarCurve& curve, double searchTol) {
  if (curve.offset != 0.0) throw std::invalid_argument("critical_width: expects a base curve");
  const auto stats = curvature_stats(curve);
  CriticalWidth result;
  if (stats.min_kappa >= 0.0) return result;

  const double tol = searchTol > 0.0 ? searchTol : 1e-6 * curve.period();
  result.tolerance = tol;

  BuildOptions relaxed;
  relaxed.require_simple = false;
  const PlanarCurve probe = curve.size() >= 2048 ? curve : build_curve(curve.profile, 2048, relaxed);

  const auto jacobian_ok = [&](double d) { return 1.0 + d * stats.min_kappa > 0.0; };
  const auto valid = [&](double d) { return jacobian_ok(d) && !polygon_self_intersects(offset_points(probe, d)); };

  if (!valid(tol)) throw DegenerateCurve("offset map is not injective even for the smallest tested width");

  double lo = tol;
  double hi = 1.0 / stats.norm_kappa_minus;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    (valid(mid) ? lo : hi) = mid;
  }
  result.value = lo;
  result.limit = jacobian_ok(hi) ? CriticalWidth::Limit::GlobalIntersection : CriticalWidth::Limit::LocalJacobian;
  return result;
}

double min_partial_turning(const PlanarCurve& curve) {
  double running_max = -kInfinity;
  double worst = 0.0;
  for (double theta : curve.angle) {
    if (running_max > -kInfinity) worst = std::min(worst, theta - running_max);
    running_max = std::max(running_max, theta);
  }
  return worst;
}

bool angle_condition(const PlanarCurve& curve) { return min_partial_turning(curve) > -std::numbers::pi; }

PlanarCurve offset_boundary(const PlanarCurve& curve, double d) {
  if (curve.offset != 0.0) throw std::invalid_argument("offset_boundary: expects a base curve");
  if (!(d > 0.0)) throw std::invalid_argument("offset_boundary: width must be positive");
  const auto critical = critical_width(curve);
  if (!(d < critical.value)) {
    throw WidthExceedsCritical(fmt::format("width {} is not below the critical width {}", d, critical.value));
  }
  PlanarCurve out = curve;
  out.offset = d;
  out.position = offset_points(curve, d);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double k = curve.kappa[i];
    out.speed[i] = 1.0 + d * k;
    out.kappa[i] = k / (1.0 + d * k);
  }
  return out;
}

std::complex<double> tangent_integral(const PlanarCurve& curve) {
  cplx sum{0.0, 0.0};
  for (std::size_t i = 0; i < curve.size(); ++i) sum += curve.t(i) * curve.speed[i];
  return sum * curve.step();
}

std::complex<double> weighted_tangent_integral(const PlanarCurve& curve) {
  cplx sum{0.0, 0.0};
  for (std::size_t i = 0; i < curve.size(); ++i) sum += curve.t(i) * curve.kappa[i] * curve.speed[i];
  return sum * curve.step();
}

bool polygon_self_intersects(std::span<const Vec2> points) {
  const std::size_t n = points.size();
  if (n < 4) return false;
  struct Extent {
    double xmin, xmax, ymin, ymax;
  };
  std::vector<Extent> extent(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = points[i];
    const auto& b = points[(i + 1) % n];
    extent[i] = {std::min(a.x, b.x), std::max(a.x, b.x), std::min(a.y, b.y), std::max(a.y, b.y)};
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return extent[a].xmin < extent[b].xmin; });

  const auto adjacent = [n](std::size_t i, std::size_t j) {
    const std::size_t d = i > j ? i - j : j - i;
    return d == 1 || d == n - 1;
  };

  std::vector<std::size_t> active;
  for (std::size_t idx : order) {
    const auto& e = extent[idx];
    std::erase_if(active, [&](std::size_t j) { return extent[j].xmax < e.xmin; });
    for (std::size_t j : active) {
      if (adjacent(idx, j)) continue;
      if (extent[j].ymax < e.ymin || e.ymax < extent[j].ymin) continue;
      if (segments_intersect(points[idx], points[(idx + 1) % n], points[j], points[(j + 1) % n])) return true;
    }
    active.push_back(idx);
  }
  return false;
}

// --- I/O --------------------------------------------------------------------

void write_curve_csv(std::ostream& out, const PlanarCurve& curve) {
  out << "s,x,y,tau_x,tau_y,nu_x,nu_y,kappa\n";
  for (std::size_t i = 0; i < curve.size(); ++i) {
    out << fmt::format("{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", curve.s[i],
                       curve.position[i].x, curve.position[i].y, curve.tangent[i].x, curve.tangent[i].y,
                       curve.normal[i].x, curve.normal[i].y, curve.kappa[i]);
  }
}

ProfileDocument read_profile_document(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("profile document: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("profile document: expected an object");
  for (const auto& [key, value] : doc.items()) {
    if (key != "length" && key != "modes" && key != "samples" && key != "nodes") {
      throw ConfigError("profile document: unknown key '" + key + "'");
    }
  }
  if (!doc.contains("length") || !doc["length"].is_number()) throw ConfigError("profile document: missing numeric 'length'");
  if (doc.contains("modes") && doc.contains("samples")) {
    throw ConfigError("profile document: 'modes' and 'samples' are mutually exclusive");
  }
  const double length = doc["length"].get<double>();
  std::size_t nodes = 256;
  if (doc.contains("nodes")) {
    if (!doc["nodes"].is_number_unsigned()) throw ConfigError("profile document: 'nodes' must be a positive integer");
    nodes = doc["nodes"].get<std::size_t>();
  }
  try {
    if (doc.contains("samples")) {
      const auto samples = doc["samples"].get<std::vector<double>>();
      return {CurvatureProfile::from_samples(length, samples), nodes};
    }
    std::vector<FourierMode> modes;
    if (doc.contains("modes")) {
      if (!doc["modes"].is_array()) throw ConfigError("profile document: 'modes' must be an array");
      for (const auto& m : doc["modes"]) {
        for (const auto& [key, value] : m.items()) {
          if (key != "k" && key != "amplitude" && key != "phase") {
            throw ConfigError("profile document: unknown mode key '" + key + "'");
          }
        }
        FourierMode mode;
        mode.k = m.at("k").get<int>();
        mode.amplitude = m.at("amplitude").get<double>();
        mode.phase = m.value("phase", 0.0);
        modes.push_back(mode);
      }
    }
    return {CurvatureProfile(length, std::move(modes)), nodes};
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("profile document: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("profile document: ") + e.what());
  }
}

std::string write_profile_document(const ProfileDocument& doc) {
  nlohmann::json out;
  out["length"] = doc.profile.length();
  out["modes"] = nlohmann::json::array();
  for (const auto& m : doc.profile.modes()) {
    out["modes"].push_back({{"k", m.k}, {"amplitude", m.amplitude}, {"phase", m.phase}});
  }
  out["nodes"] = doc.nodes;
  return out.dump(2);
}

}  // namespace robin::geometry
