#include "robin/strip/strip.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>

#include "robin/errors.hpp"

namespace robin::strip {

namespace {

constexpr double kGaussX[3] = {0.5 - 0.3872983346207417, 0.5, 0.5 + 0.3872983346207417};
constexpr double kGaussW[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};

// Position of s-node i in the interleaved order 0, 1, n−1, 2, n−2, …
std::size_t interleaved(std::size_t i, std::size_t n) {
  if (i == 0) return 0;
  if (2 * i < n) return 2 * i - 1;
  if (2 * i == n) return n - 1;
  return 2 * (n - i);
}

geometry::PlanarCurve sampling_curve(const geometry::CurvatureProfile& profile, std::size_t n_s, std::size_t& stride) {
  const std::size_t need = std::max<std::size_t>(16, 8 * static_cast<std::size_t>(profile.max_harmonic()));
  stride = (need + n_s - 1) / n_s;
  geometry::BuildOptions relaxed;
  relaxed.require_simple = false;
  return geometry::build_curve(profile, n_s * stride, relaxed);
}

}  // namespace

StripMesh StripMesh::refined() const { return {2 * n_s, t.refined()}; }

bool StripProblem::exterior() const noexcept { return std::isinf(width); }

StripProblem make_strip_problem(const geometry::CurvatureProfile& profile, double width, double alpha,
                                std::size_t n_s, std::size_t n_t, double truncation) {
  if (n_s < 8 || n_s % 4 != 0) throw std::invalid_argument("strip mesh: n_s must be a multiple of 4, at least 8");
  if (!(width > 0.0)) throw std::invalid_argument("strip: width must be positive");
  if (!std::isfinite(alpha)) throw std::invalid_argument("strip: alpha must be finite");

  const std::size_t nodes = std::max<std::size_t>(256, 16 * static_cast<std::size_t>(profile.max_harmonic()));
  const auto curve = geometry::build_curve(profile, nodes);
  const auto stats = geometry::curvature_stats(curve);

  StripProblem p;
  p.profile = profile;
  p.width = width;
  p.alpha = alpha;
  double extent = width;
  if (std::isinf(width)) {
    if (stats.min_kappa < 0.0) {
      throw WidthExceedsCritical(fmt::format("exterior problem needs a convex curve (min curvature {:.6g})", stats.min_kappa));
    }
    if (!(alpha < 0.0)) throw std::invalid_argument("strip: exterior problems need alpha < 0");
    extent = truncation > 0.0 ? truncation : 12.0 / std::abs(alpha);
  } else if (stats.min_kappa < 0.0) {
    const auto cw = geometry::critical_width(curve);
    if (!(width < cw.value)) {
      throw WidthExceedsCritical(fmt::format("width {:.6g} is not below the critical width {:.6g}", width, cw.value));
    }
  }
  p.mesh = {n_s, fiber::GradedMesh::for_robin(extent, n_t, alpha, std::isinf(width))};
  return p;
}

std::size_t StripMatrices::dof(std::size_t i, std::size_t j) const { return j * n_s + interleaved(i, n_s); }

StripMatrices assemble_strip(const StripProblem& p) {
  const std::size_t ns = p.mesh.n_s;
  const std::size_t nt = p.mesh.n_t();
  if (ns < 8 || ns % 4 != 0) throw std::invalid_argument("strip mesh: n_s must be a multiple of 4, at least 8");
  if (nt < 2) throw MeshTooCoarse("strip mesh needs at least two t-cells");
  const auto& tn = p.mesh.t.nodes();
  const double length = p.length();
  const double hs = length / static_cast<double>(ns);

  StripMatrices out;
  out.n_s = ns;
  out.t_nodes = p.exterior() ? nt : nt + 1;  // outer Dirichlet row dropped
  const std::size_t n = ns * out.t_nodes;
  out.a = eig::SymmetricBandedMatrix(n, ns + 2);
  out.m = eig::SymmetricBandedMatrix(n, ns + 2);

  // Curvature at the s-Gauss points of every column of cells.
  std::vector<double> kappa(ns * 3);
  for (std::size_t i = 0; i < ns; ++i) {
    for (int g = 0; g < 3; ++g) kappa[i * 3 + g] = p.profile.curvature(hs * (static_cast<double>(i) + kGaussX[g]));
  }

  const auto local_dof = [&](std::size_t i, std::size_t j) -> std::ptrdiff_t {
    if (j >= out.t_nodes) return -1;
    return static_cast<std::ptrdiff_t>(out.dof(i % ns, j));
  };

  for (std::size_t j = 0; j < nt; ++j) {
    const double ht = tn[j + 1] - tn[j];
    for (std::size_t i = 0; i < ns; ++i) {
      // Local nodes: 0 (i, j), 1 (i+1, j), 2 (i, j+1), 3 (i+1, j+1).
      const std::ptrdiff_t dofs[4] = {local_dof(i, j), local_dof(i + 1, j), local_dof(i, j + 1), local_dof(i + 1, j + 1)};
      double ke[4][4] = {};
      double me[4][4] = {};
      for (int gs = 0; gs < 3; ++gs) {
        const double x = kGaussX[gs];
        const double k = kappa[i * 3 + gs];
        for (int gt = 0; gt < 3; ++gt) {
          const double y = kGaussX[gt];
          const double jac = 1.0 + k * (tn[j] + ht * y);
          if (!(jac > 0.0)) {
            throw JacobianNonPositive(fmt::format("1 + κt = {:.6g} at s = {:.6g}, t = {:.6g}", jac,
                                                  hs * (static_cast<double>(i) + x), tn[j] + ht * y));
          }
          const double w = kGaussW[gs] * kGaussW[gt] * hs * ht;
          const double phi[4] = {(1 - x) * (1 - y), x * (1 - y), (1 - x) * y, x * y};
          const double ds[4] = {-(1 - y) / hs, (1 - y) / hs, -y / hs, y / hs};
          const double dt[4] = {-(1 - x) / ht, -x / ht, (1 - x) / ht, x / ht};
          for (int a = 0; a < 4; ++a) {
            for (int b = 0; b <= a; ++b) {
              ke[a][b] += w * (ds[a] * ds[b] / jac + dt[a] * dt[b] * jac);
              me[a][b] += w * phi[a] * phi[b] * jac;
            }
          }
        }
      }
      // Robin terms on the edges t = 0 and t = d.
      const bool inner_edge = j == 0;
      const bool outer_edge = !p.exterior() && j + 1 == nt;
      if (inner_edge || outer_edge) {
        for (int gs = 0; gs < 3; ++gs) {
          const double x = kGaussX[gs];
          const double phi[2] = {1 - x, x};
          if (inner_edge) {
            const double w = kGaussW[gs] * hs * p.alpha;
            for (int a = 0; a < 2; ++a)
              for (int b = 0; b <= a; ++b) ke[a][b] += w * phi[a] * phi[b];
          }
          if (outer_edge) {
            const double w = kGaussW[gs] * hs * p.alpha * (1.0 + kappa[i * 3 + gs] * p.width);
            for (int a = 0; a < 2; ++a)
              for (int b = 0; b <= a; ++b) ke[a + 2][b + 2] += w * phi[a] * phi[b];
          }
        }
      }
      for (int a = 0; a < 4; ++a) {
        if (dofs[a] < 0) continue;
        for (int b = 0; b <= a; ++b) {
          if (dofs[b] < 0) continue;
          const auto da = static_cast<std::size_t>(dofs[a]);
          const auto db = static_cast<std::size_t>(dofs[b]);
          out.a.add(da, db, ke[a][b]);
          out.m.add(da, db, me[a][b]);
        }
      }
    }
  }
  return out;
}

StripSolution solve_strip(const StripProblem& p, std::size_t k, double tol) {
  const auto mats = assemble_strip(p);
  const std::size_t n = mats.a.size();
  StripSolution sol;
  sol.truncation = p.truncation();
  sol.n_s = p.mesh.n_s;
  sol.n_t = p.mesh.n_t();

  std::size_t want = std::min(k, n);
  if (p.exterior()) {
    const std::size_t negatives = eig::count_below(mats.a, mats.m, 0.0);
    sol.log += fmt::format("inertia at 0: {}\n", negatives);
    want = std::min(want, negatives);
    if (want == 0) {
      sol.essential_only = true;
      return sol;
    }
  }
  eig::EigOptions opts;
  opts.tol = tol;
  opts.shift_hint = p.lambda_hint;
  const auto r = eig::smallest_eigenpairs(mats.a, mats.m, want, opts);
  sol.log += r.log;
  sol.certificate_count = r.certificate_count;

  const std::size_t ns = p.mesh.n_s;
  for (std::size_t q = 0; q < r.values.size(); ++q) {
    sol.values.push_back(r.values[q]);
    sol.residuals.push_back(r.residuals[q]);
    Eigen::MatrixXd grid = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(ns), static_cast<Eigen::Index>(sol.n_t + 1));
    for (std::size_t j = 0; j < mats.t_nodes; ++j) {
      for (std::size_t i = 0; i < ns; ++i) {
        grid(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            r.vectors(static_cast<Eigen::Index>(mats.dof(i, j)), static_cast<Eigen::Index>(q));
      }
    }
    sol.eigenfunctions.push_back(std::move(grid));
  }
  for (std::size_t q = 0; q + 1 < sol.values.size(); ++q) {
    const double scale = std::max(std::abs(sol.values[q]), std::abs(sol.values[q + 1]));
    if (std::abs(sol.values[q + 1] - sol.values[q]) <= kPairingTolerance * scale) sol.degenerate_pairs.emplace_back(q, q + 1);
  }
  return sol;
}

ConvergenceReport convergence_report(const StripProblem& p, std::size_t levels, std::size_t k, double tol) {
  if (levels < 2) throw std::invalid_argument("convergence_report: need at least two levels");
  ConvergenceReport rep;
  StripProblem level = p;
  std::size_t count = k;
  for (std::size_t l = 0; l < levels; ++l) {
    if (l > 0) level.mesh = level.mesh.refined();
    auto sol = solve_strip(level, k, tol);
    rep.levels.emplace_back(level.mesh.n_s, level.mesh.n_t());
    count = std::min(count, sol.values.size());
    rep.values.push_back(sol.values);
    // Nested refinement only lowers eigenvalues: the previous λ₁ is a safe hint.
    if (!sol.values.empty()) level.lambda_hint = sol.values.front();
    if (l + 1 == levels) rep.finest = std::move(sol);
  }
  for (auto& v : rep.values) v.resize(count);

  // Rounding level of the finest discrete problem: ε times its largest
  // eigenvalue, about 12/h² for the smallest cell.
  const auto& nodes = level.mesh.t.nodes();
  double h_min = p.profile.length() / static_cast<double>(level.mesh.n_s);
  for (std::size_t j = 1; j < nodes.size(); ++j) h_min = std::min(h_min, nodes[j] - nodes[j - 1]);
  const double rounding = 4 * std::numeric_limits<double>::epsilon() * 12.0 / (h_min * h_min);

  for (std::size_t q = 0; q < count; ++q) {
    for (std::size_t l = 1; l < levels; ++l) {
      const double before = rep.values[l - 1][q];
      const double after = rep.values[l][q];
      if (after > before + std::max(1e-12 * std::abs(before), rounding)) rep.monotone = false;
    }
    rep.extrapolated.push_back(fiber::richardson(rep.values[levels - 2][q], rep.values[levels - 1][q]));
    double order = std::numeric_limits<double>::quiet_NaN();
    if (levels >= 3) {
      const double d1 = rep.values[levels - 3][q] - rep.values[levels - 2][q];
      const double d2 = rep.values[levels - 2][q] - rep.values[levels - 1][q];
      order = std::log2(std::abs(d1) / std::abs(d2));
      if (!(order >= 1.5 && order <= 2.5) || d1 * d2 <= 0.0) {
        rep.non_monotone_convergence = true;
      } else {
        // In the asymptotic range the extrapolated values converge faster than
        // the raw ones; their spread bounds the error of the last one.
        const auto previous = fiber::richardson(rep.values[levels - 3][q], rep.values[levels - 2][q]);
        auto& last = rep.extrapolated.back();
        last.errbar = std::max(std::abs(last.value - previous.value),
                               64 * std::numeric_limits<double>::epsilon() * std::abs(last.value));
      }
    }
    rep.observed_order.push_back(order);
  }
  if (!rep.monotone) rep.non_monotone_convergence = true;
  return rep;
}

void write_eigenfunction_csv(std::ostream& out, const StripProblem& p, const StripSolution& sol, std::size_t k) {
  if (k >= sol.eigenfunctions.size()) throw std::out_of_range("write_eigenfunction_csv: no such eigenfunction");
  std::size_t stride = 1;
  const auto curve = sampling_curve(p.profile, p.mesh.n_s, stride);
  const auto& u = sol.eigenfunctions[k];
  const auto& tn = p.mesh.t.nodes();
  out << "s,t,x,y,re_u,im_u\n";
  for (std::size_t i = 0; i < p.mesh.n_s; ++i) {
    const std::size_t c = i * stride;
    for (std::size_t j = 0; j < tn.size(); ++j) {
      const double x = curve.position[c].x + tn[j] * curve.normal[c].x;
      const double y = curve.position[c].y + tn[j] * curve.normal[c].y;
      out << fmt::format("{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},0\n", curve.s[c], tn[j], x, y,
                         u(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
    }
  }
}

}  // namespace robin::strip
