#include "robin/fiber/fiber.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>

#include "robin/errors.hpp"

namespace robin::fiber {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kBeta = 0.15;
constexpr std::size_t kMinElements = 32;
// Last/first spacing on truncated exteriors; larger ratios make the
// residual ‖Av − λMv‖/‖Mv‖ stagnate above 1e-10 on fine meshes.
constexpr double kGeometricRatio = 50.0;

// 3-point Gauss–Legendre on [0, 1].
constexpr double kGaussX[3] = {0.5 - 0.3872983346207417, 0.5, 0.5 + 0.3872983346207417};
constexpr double kGaussW[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};

double layer_ratio(double length, double layer) {
  if (!std::isfinite(layer)) return 1.0;
  return std::clamp(layer / length, 0.02, 1.0);
}

std::vector<double> mapped_nodes(double length, std::size_t elements, double layer) {
  const double r = layer_ratio(length, layer);
  const auto raw = [&](double xi) { return xi - (1.0 - r) * kBeta * (1.0 - std::exp(-xi / kBeta)); };
  const double c = length / raw(1.0);
  std::vector<double> nodes(elements + 1);
  for (std::size_t i = 0; i <= elements; ++i) nodes[i] = c * raw(static_cast<double>(i) / elements);
  nodes.front() = 0.0;
  nodes.back() = length;
  return nodes;
}

}  // namespace

// --- mesh -------------------------------------------------------------------

GradedMesh::GradedMesh(double length, std::size_t elements, double layer) : parameter_(layer), map_(Map::Layer) {
  if (!(length > 0.0) || !std::isfinite(length)) throw std::invalid_argument("GradedMesh: length must be finite and positive");
  if (elements == 0) throw std::invalid_argument("GradedMesh: need at least one element");
  if (!(layer > 0.0)) throw std::invalid_argument("GradedMesh: layer width must be positive");
  nodes_ = mapped_nodes(length, elements, layer);
}

GradedMesh GradedMesh::uniform(double length, std::size_t elements) {
  return GradedMesh(length, elements, std::numeric_limits<double>::infinity());
}

GradedMesh GradedMesh::geometric(double length, std::size_t elements, double ratio) {
  if (!(length > 0.0) || !std::isfinite(length)) throw std::invalid_argument("GradedMesh: length must be finite and positive");
  if (elements == 0) throw std::invalid_argument("GradedMesh: need at least one element");
  if (!(ratio >= 1.0)) throw std::invalid_argument("GradedMesh: geometric ratio must be at least 1");
  if (ratio == 1.0) return uniform(length, elements);
  const double gamma = std::log(ratio);
  GradedMesh m;
  m.map_ = Map::Geometric;
  m.parameter_ = ratio;
  m.nodes_.resize(elements + 1);
  for (std::size_t i = 0; i <= elements; ++i) {
    m.nodes_[i] = length * std::expm1(gamma * static_cast<double>(i) / static_cast<double>(elements)) / std::expm1(gamma);
  }
  m.nodes_.front() = 0.0;
  m.nodes_.back() = length;
  return m;
}

GradedMesh GradedMesh::for_robin(double length, std::size_t elements, double alpha, bool exterior) {
  if (exterior) return geometric(length, elements, kGeometricRatio);
  return GradedMesh(length, elements, alpha == 0.0 ? std::numeric_limits<double>::infinity() : 1.0 / std::abs(alpha));
}

GradedMesh GradedMesh::from_nodes(std::vector<double> nodes) {
  if (nodes.size() < 2 || nodes.front() != 0.0) throw std::invalid_argument("GradedMesh: nodes must start at 0");
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    if (!(nodes[i] > nodes[i - 1])) throw std::invalid_argument("GradedMesh: nodes must increase");
  }
  GradedMesh m;
  m.nodes_ = std::move(nodes);
  return m;
}

GradedMesh GradedMesh::refined() const {
  switch (map_) {
    case Map::Layer:
      return GradedMesh(length(), 2 * elements(), parameter_);
    case Map::Geometric:
      return geometric(length(), 2 * elements(), parameter_);
    case Map::None:
      break;
  }
  std::vector<double> out;
  out.reserve(2 * nodes_.size());
  for (std::size_t i = 0; i + 1 < nodes_.size(); ++i) {
    out.push_back(nodes_[i]);
    out.push_back(0.5 * (nodes_[i] + nodes_[i + 1]));
  }
  out.push_back(nodes_.back());
  return from_nodes(std::move(out));
}

GradedMesh GradedMesh::extended(double new_length) const {
  if (!(new_length > length())) throw std::invalid_argument("GradedMesh::extended: new length must exceed the old");
  const double last = nodes_[nodes_.size() - 1] - nodes_[nodes_.size() - 2];
  const auto extra = static_cast<std::size_t>(std::ceil((new_length - length()) / last - 1e-9));
  std::vector<double> out = nodes_;
  const double h = (new_length - length()) / static_cast<double>(extra);
  for (std::size_t i = 1; i <= extra; ++i) out.push_back(length() + h * static_cast<double>(i));
  out.back() = new_length;
  return from_nodes(std::move(out));
}

// --- problem ------------------------------------------------------------------

bool FiberProblem::exterior() const noexcept { return std::isinf(width); }

double FiberProblem::weight(double t) const noexcept { return 1.0 + kTwoPi * t / perimeter; }

void FiberProblem::validate() const {
  if (!(perimeter > 0.0) || !std::isfinite(perimeter)) throw std::invalid_argument("fiber: perimeter must be positive");
  if (!(width > 0.0)) throw std::invalid_argument("fiber: width must be positive");
  if (!std::isfinite(alpha)) throw std::invalid_argument("fiber: alpha must be finite");
  if (mesh.elements() < kMinElements) {
    throw MeshTooCoarse(fmt::format("fiber mesh has {} elements, need at least {}", mesh.elements(), kMinElements));
  }
  if (!exterior() && std::abs(mesh.length() - width) > 1e-12 * width) {
    throw std::invalid_argument("fiber: mesh must span [0, d]");
  }
}

FiberMatrices assemble_fiber(const FiberProblem& p) {
  p.validate();
  const auto& t = p.mesh.nodes();
  const std::size_t nodes = t.size();
  const bool drop_first = p.inner == BoundaryKind::Dirichlet;
  const bool drop_last = p.exterior() || p.outer == BoundaryKind::Dirichlet;

  FiberMatrices out;
  std::vector<std::ptrdiff_t> dof(nodes, -1);
  for (std::size_t i = 0; i < nodes; ++i) {
    if ((i == 0 && drop_first) || (i == nodes - 1 && drop_last)) continue;
    dof[i] = static_cast<std::ptrdiff_t>(out.node_of_dof.size());
    out.node_of_dof.push_back(i);
  }
  const std::size_t n = out.node_of_dof.size();
  out.a = eig::SymmetricBandedMatrix(n, 1);
  out.m = eig::SymmetricBandedMatrix(n, 1);

  const double q = std::pow(kTwoPi * p.mode / p.perimeter, 2);
  for (std::size_t e = 0; e + 1 < nodes; ++e) {
    const double h = t[e + 1] - t[e];
    double ke[2][2] = {};
    double me[2][2] = {};
    for (int g = 0; g < 3; ++g) {
      const double x = kGaussX[g];
      const double w = p.weight(t[e] + h * x);
      const double phi[2] = {1.0 - x, x};
      const double dphi[2] = {-1.0 / h, 1.0 / h};
      for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
          ke[i][j] += h * kGaussW[g] * (dphi[i] * dphi[j] * w + q * phi[i] * phi[j] / w);
          me[i][j] += h * kGaussW[g] * phi[i] * phi[j] * w;
        }
      }
    }
    for (int i = 0; i < 2; ++i) {
      const auto di = dof[e + i];
      if (di < 0) continue;
      for (int j = 0; j <= i; ++j) {
        const auto dj = dof[e + j];
        if (dj < 0) continue;
        out.a.add(static_cast<std::size_t>(di), static_cast<std::size_t>(dj), ke[i][j]);
        out.m.add(static_cast<std::size_t>(di), static_cast<std::size_t>(dj), me[i][j]);
      }
    }
  }
  if (!drop_first) out.a.add(0, 0, p.alpha);
  if (!drop_last) out.a.add(n - 1, n - 1, p.alpha * p.weight(p.width));
  return out;
}

// --- solves -------------------------------------------------------------------

double RadialProfile::at(double s) const {
  if (s <= t.front()) return values.front();
  if (s >= t.back()) return values.back();
  const auto it = std::upper_bound(t.begin(), t.end(), s);
  const auto i = static_cast<std::size_t>(it - t.begin()) - 1;
  const double x = (s - t[i]) / (t[i + 1] - t[i]);
  return (1.0 - x) * values[i] + x * values[i + 1];
}

FiberSolution solve_fiber(const FiberProblem& p, std::size_t count, double tol) {
  const auto mats = assemble_fiber(p);
  const std::size_t n = mats.node_of_dof.size();
  FiberSolution sol;
  sol.mode = p.mode;
  sol.truncation = p.mesh.length();
  sol.elements = p.mesh.elements();
  std::size_t want = std::min(count, n);
  if (p.exterior()) {
    // Only the discrete spectrum below 0 is wanted; inertia at 0 says how much there is.
    want = std::min(want, eig::count_below(mats.a, mats.m, 0.0));
    if (want == 0) return sol;
  }
  eig::EigOptions opts;
  opts.tol = tol;
  const auto r = eig::smallest_eigenpairs(mats.a, mats.m, want, opts);
  sol.log = r.log;
  for (std::size_t k = 0; k < r.values.size(); ++k) {
    if (p.exterior() && !(r.values[k] < 0.0)) break;
    RadialProfile prof;
    prof.mode = p.mode;
    prof.lambda = r.values[k];
    prof.perimeter = p.perimeter;
    prof.t = p.mesh.nodes();
    prof.values.assign(prof.t.size(), 0.0);
    for (std::size_t d = 0; d < n; ++d) prof.values[mats.node_of_dof[d]] = r.vectors(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(k));
    const auto lead = std::find_if(prof.values.begin(), prof.values.end(), [](double v) { return std::abs(v) > 1e-300; });
    if (lead != prof.values.end() && *lead < 0.0) {
      for (auto& v : prof.values) v = -v;
    }
    sol.values.push_back(r.values[k]);
    sol.residuals.push_back(r.residuals[k]);
    sol.profiles.push_back(std::move(prof));
  }
  return sol;
}

FiberSolution solve_exterior_fiber(int mode, double perimeter, double alpha, std::size_t elements, std::size_t count,
                                   const TruncationPolicy& policy, double minimum_truncation) {
  if (!(alpha < 0.0)) throw std::invalid_argument("exterior fiber: alpha must be negative");
  double truncation = std::max(minimum_truncation, policy.initial_factor / std::abs(alpha));
  std::string log;

  FiberProblem p;
  p.mode = mode;
  p.perimeter = perimeter;
  p.width = std::numeric_limits<double>::infinity();
  p.alpha = alpha;

  for (;;) {
    p.mesh = GradedMesh::for_robin(truncation, elements, alpha, true);
    auto sol = solve_fiber(p, count);
    if (sol.values.empty()) {
      log += fmt::format("n={} T={:.6g}: no negative eigenvalue\n", mode, truncation);
      if (truncation * 2.0 > policy.max_truncation) {
        log += fmt::format("n={}: no bound state up to T={:.6g}\n", mode, truncation);
        sol.log = log + sol.log;
        return sol;
      }
      truncation *= 2.0;
      continue;
    }
    const double needed = policy.initial_factor / std::sqrt(-sol.values.back());
    if (needed > truncation * (1.0 + 1e-12)) {
      log += fmt::format("n={} T={:.6g}: lambda={:.12g} needs T={:.6g}\n", mode, truncation, sol.values.back(), needed);
      truncation = needed;
      if (truncation > policy.max_truncation) {
        throw NoConvergence(fmt::format("exterior fiber n={}: truncation radius {:.6g} exceeds the limit", mode, truncation), log);
      }
      continue;
    }
    // Certificate: the space on [0, T] embeds in the space on [0, 2T].
    FiberProblem wide = p;
    wide.mesh = p.mesh.extended(2.0 * truncation);
    const auto ext = solve_fiber(wide, count);
    double gap = ext.values.size() > sol.values.size() ? std::numeric_limits<double>::infinity() : 0.0;
    for (std::size_t i = 0; i < std::min(sol.values.size(), ext.values.size()); ++i) {
      gap = std::max(gap, sol.values[i] - ext.values[i]);
    }
    log += fmt::format("n={} T={:.6g}: lambda={:.15g}, gap to 2T {:.3e}\n", mode, truncation, sol.values.back(), gap);
    if (gap <= policy.tolerance) {
      sol.truncation_gap = gap;
      sol.log = log + sol.log;
      return sol;
    }
    truncation *= 2.0;
    if (truncation > policy.max_truncation) {
      throw NoConvergence(fmt::format("exterior fiber n={}: truncation certificate failed up to T={:.6g}", mode,
                                      policy.max_truncation),
                          log);
    }
  }
}

Extrapolated richardson(double coarse, double fine, int order) {
  const double factor = std::pow(2.0, order) - 1.0;
  Extrapolated e;
  e.coarse = coarse;
  e.fine = fine;
  e.value = fine + (fine - coarse) / factor;
  e.errbar = std::abs(coarse - fine) / factor;
  return e;
}

FiberConvergence fiber_convergence(int mode, double perimeter, double width, double alpha, std::size_t elements,
                                   std::size_t count, const TruncationPolicy& policy) {
  FiberConvergence c;
  c.mode = mode;
  FiberProblem p;
  p.mode = mode;
  p.perimeter = perimeter;
  p.width = width;
  p.alpha = alpha;
  if (std::isinf(width)) {
    c.coarse = solve_exterior_fiber(mode, perimeter, alpha, elements, count, policy);
    c.truncation = c.coarse.truncation;
    p.mesh = GradedMesh::for_robin(c.truncation, elements, alpha, true);
  } else {
    p.mesh = GradedMesh::for_robin(width, elements, alpha, false);
    c.coarse = solve_fiber(p, count);
    c.truncation = width;
  }
  p.mesh = p.mesh.refined();
  c.fine = solve_fiber(p, count);
  for (std::size_t i = 0; i < std::min(c.coarse.values.size(), c.fine.values.size()); ++i) {
    c.values.push_back(richardson(c.coarse.values[i], c.fine.values[i]));
  }
  return c;
}

// --- spectra --------------------------------------------------------------------

namespace {

void add_fiber(Spectrum& s, const FiberSolution& f) {
  for (std::size_t k = 0; k < f.values.size(); ++k) {
    const int mult = f.mode == 0 ? 1 : 2;
    s.eigenvalues.push_back({f.mode, k + 1, f.values[k], mult});
    if (f.mode != 0) s.eigenvalues.push_back({-f.mode, k + 1, f.values[k], mult});
  }
}

void sort_spectrum(Spectrum& s) {
  std::stable_sort(s.eigenvalues.begin(), s.eigenvalues.end(), [](const ModeEigenvalue& a, const ModeEigenvalue& b) {
    if (a.lambda != b.lambda) return a.lambda < b.lambda;
    return a.mode > b.mode;  // +n before −n
  });
}

}  // namespace

Spectrum disk_exterior_spectrum(double perimeter, double alpha, int kmax, std::size_t elements,
                                const TruncationPolicy& policy) {
  Spectrum s;
  if (!(alpha < 0.0)) {
    s.essential_only = true;
    return s;
  }
  for (int n = 0; n <= kmax; ++n) {
    auto f = solve_exterior_fiber(n, perimeter, alpha, elements, 2, policy);
    s.truncation = std::max(s.truncation, f.truncation);
    const bool bound = !f.values.empty();
    add_fiber(s, f);
    s.fibers.push_back(std::move(f));
    if (!bound) break;
  }
  sort_spectrum(s);
  s.essential_only = s.eigenvalues.empty();
  return s;
}

Spectrum annulus_spectrum(double perimeter, double width, double alpha, int kmax, std::size_t elements,
                          std::size_t per_fiber) {
  if (!std::isfinite(width)) throw std::invalid_argument("annulus_spectrum: width must be finite");
  Spectrum s;
  s.truncation = width;
  for (int n = 0; n <= kmax; ++n) {
    FiberProblem p;
    p.mode = n;
    p.perimeter = perimeter;
    p.width = width;
    p.alpha = alpha;
    p.mesh = GradedMesh::for_robin(width, elements, alpha, false);
    auto f = solve_fiber(p, per_fiber);
    add_fiber(s, f);
    s.fibers.push_back(std::move(f));
  }
  sort_spectrum(s);
  return s;
}

std::vector<Lambda2Row> lambda2_vs_perimeter(double alpha, const std::vector<double>& perimeters,
                                             std::size_t elements) {
  if (!(alpha < 0.0)) throw std::invalid_argument("lambda2_vs_perimeter: alpha must be negative");
  if (!std::is_sorted(perimeters.begin(), perimeters.end())) {
    throw std::invalid_argument("lambda2_vs_perimeter: perimeter grid must be ascending");
  }
  std::vector<Lambda2Row> rows;
  for (double perimeter : perimeters) {
    const auto s = disk_exterior_spectrum(perimeter, alpha, 2, elements);
    Lambda2Row row;
    row.perimeter = perimeter;
    row.truncation = s.truncation;
    if (s.eigenvalues.size() >= 2) row.lambda2 = s.eigenvalues[1].lambda;
    rows.push_back(row);
  }
  return rows;
}

Eigen::VectorXcd angular_project(const Eigen::MatrixXcd& u, double perimeter, int n) {
  const auto ns = u.rows();
  Eigen::VectorXcd phase(ns);
  for (Eigen::Index i = 0; i < ns; ++i) {
    const double angle = -kTwoPi * static_cast<double>(n) * static_cast<double>(i) / static_cast<double>(ns);
    phase(i) = std::polar(1.0, angle);
  }
  const double scale = perimeter / static_cast<double>(ns) / std::sqrt(perimeter);
  return scale * (u.transpose() * phase);
}

void write_fiber_csv(std::ostream& out, const std::vector<FiberSolution>& fibers) {
  out << "n,lambda_index,lambda,residual,T,elements\n";
  for (const auto& f : fibers) {
    for (std::size_t k = 0; k < f.values.size(); ++k) {
      out << fmt::format("{},{},{:.17g},{:.3e},{:.17g},{}\n", f.mode, k + 1, f.values[k], f.residuals[k], f.truncation,
                         f.elements);
    }
  }
}

void write_profile_csv(std::ostream& out, const RadialProfile& profile) {
  out << "t,psi\n";
  for (std::size_t i = 0; i < profile.t.size(); ++i) out << fmt::format("{:.17g},{:.17g}\n", profile.t[i], profile.values[i]);
}

}  // namespace robin::fiber
