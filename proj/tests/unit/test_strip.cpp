#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "robin/errors.hpp"
#include "robin/fiber/fiber.hpp"
#include "robin/special/bessel.hpp"
#include "robin/strip/strip.hpp"

using namespace robin;

namespace {

constexpr double kPi = std::numbers::pi;

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

// On a circle the bilinear space splits into discrete Fourier modes. Mode n
// is the 1-D linear-element problem on the same t-mesh with the angular
// factor (2πn/L)² replaced by its periodic P1 symbol
//   S_n = (6/h²)(1 − cos θ)/(2 + cos θ),  θ = 2πn/n_s.
// The 1-D matrices come from assemble_fiber at modes 0 and 1.
std::vector<double> separated_spectrum(double radius, double width, double alpha, const strip::StripProblem& p,
                                       std::size_t count) {
  const double length = 2 * kPi * radius;
  fiber::FiberProblem f;
  f.perimeter = length;
  f.width = width;
  f.alpha = alpha;
  f.mesh = p.mesh.t;
  f.mode = 0;
  const auto m0 = fiber::assemble_fiber(f);
  f.mode = 1;
  const auto m1 = fiber::assemble_fiber(f);
  const Eigen::MatrixXd a0 = m0.a.dense();
  const Eigen::MatrixXd b = m1.a.dense() - a0;  // (2π/L)² ∫ψφ/w
  const Eigen::MatrixXd m = m0.m.dense();

  const auto ns = p.mesh.n_s;
  const double h = length / static_cast<double>(ns);
  const double unit = std::pow(2 * kPi / length, 2);
  std::vector<double> all;
  for (std::size_t n = 0; n < ns; ++n) {
    const double theta = 2 * kPi * static_cast<double>(n) / static_cast<double>(ns);
    const double symbol = 6.0 / (h * h) * (1 - std::cos(theta)) / (2 + std::cos(theta));
    const Eigen::MatrixXd a = a0 + (symbol / unit) * b;
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(a, m, Eigen::EigenvaluesOnly);
    for (Eigen::Index q = 0; q < std::min<Eigen::Index>(es.eigenvalues().size(), 4); ++q) all.push_back(es.eigenvalues()(q));
  }
  std::sort(all.begin(), all.end());
  all.resize(count);
  return all;
}

// uᵀAu and uᵀMu for a nodal vector, by 6×6 Gauss per cell on the bilinear
// interpolant, with the profile evaluated directly.
std::pair<double, double> quadrature_forms(const strip::StripProblem& p, const Eigen::MatrixXd& u) {
  static const double x6[6] = {-0.9324695142031521, -0.6612093864662645, -0.2386191860831969,
                               0.2386191860831969,  0.6612093864662645,  0.9324695142031521};
  static const double w6[6] = {0.1713244923791704, 0.3607615730481386, 0.4679139345726910,
                               0.4679139345726910, 0.3607615730481386, 0.1713244923791704};
  const auto ns = p.mesh.n_s;
  const auto& tn = p.mesh.t.nodes();
  const double hs = p.length() / static_cast<double>(ns);
  double a = 0, m = 0;
  for (std::size_t j = 0; j + 1 < tn.size(); ++j) {
    const double ht = tn[j + 1] - tn[j];
    for (std::size_t i = 0; i < ns; ++i) {
      const std::size_t i1 = (i + 1) % ns;
      const double u00 = u(i, j), u10 = u(i1, j), u01 = u(i, j + 1), u11 = u(i1, j + 1);
      for (int gs = 0; gs < 6; ++gs) {
        const double x = 0.5 * (1 + x6[gs]);
        const double kappa = p.profile.curvature(hs * (static_cast<double>(i) + x));
        for (int gt = 0; gt < 6; ++gt) {
          const double y = 0.5 * (1 + x6[gt]);
          const double w = 0.25 * w6[gs] * w6[gt] * hs * ht;
          const double jac = 1 + kappa * (tn[j] + ht * y);
          const double val = u00 * (1 - x) * (1 - y) + u10 * x * (1 - y) + u01 * (1 - x) * y + u11 * x * y;
          const double us = ((u10 - u00) * (1 - y) + (u11 - u01) * y) / hs;
          const double ut = ((u01 - u00) * (1 - x) + (u11 - u10) * x) / ht;
          a += w * (us * us / jac + ut * ut * jac);
          m += w * val * val * jac;
        }
      }
      if (j == 0 || (!p.exterior() && j + 2 == tn.size())) {
        const std::size_t jj = j == 0 ? j : j + 1;
        const double tt = tn[jj];
        for (int gs = 0; gs < 6; ++gs) {
          const double x = 0.5 * (1 + x6[gs]);
          const double kappa = p.profile.curvature(hs * (static_cast<double>(i) + x));
          const double val = u(i, jj) * (1 - x) + u(i1, jj) * x;
          a += 0.5 * w6[gs] * hs * p.alpha * (1 + kappa * tt) * val * val;
        }
      }
    }
  }
  return {a, m};
}

geometry::CurvatureProfile oval() { return {2 * kPi, {{2, 0.5, 0.0}}}; }

}  // namespace

TEST_CASE("circle with Neumann condition: zero ground state with constant eigenfunction") {
  const auto p = strip::make_strip_problem(geometry::CurvatureProfile::circle(1.0), 1.0, 0.0, 32, 16);
  const auto sol = strip::solve_strip(p, 2);
  REQUIRE(sol.values.size() == 2);
  CHECK(std::abs(sol.values[0]) < 1e-10);
  const auto& u = sol.eigenfunctions[0];
  CHECK((u.maxCoeff() - u.minCoeff()) < 1e-8 * u.cwiseAbs().maxCoeff());
  CHECK(sol.values[1] > 0.1);
}

TEST_CASE("circle annulus splits exactly into discrete Fourier modes") {
  const double d = 0.5, alpha = -1.0;
  const auto p = strip::make_strip_problem(geometry::CurvatureProfile::circle(1.0), d, alpha, 16, 32);
  const auto sol = strip::solve_strip(p, 6, 1e-11);
  const auto oracle = separated_spectrum(1.0, d, alpha, p, 6);
  REQUIRE(sol.values.size() == 6);
  for (std::size_t q = 0; q < 6; ++q) CHECK(std::abs(sol.values[q] - oracle[q]) <= 1e-9 * std::max(1.0, std::abs(oracle[q])));
}

TEST_CASE("circle exterior splits exactly into discrete Fourier modes") {
  const double alpha = -2.0;
  const auto p = strip::make_strip_problem(geometry::CurvatureProfile::circle(1.0), geometry::kInfinity, alpha, 16, 32, 6.0);
  const auto sol = strip::solve_strip(p, 4, 1e-11);
  const auto oracle = separated_spectrum(1.0, geometry::kInfinity, alpha, p, 4);
  std::size_t negatives = 0;
  for (double v : oracle) negatives += v < 0;
  REQUIRE(sol.values.size() == negatives);
  for (std::size_t q = 0; q < negatives; ++q) CHECK(std::abs(sol.values[q] - oracle[q]) <= 1e-9 * std::abs(oracle[q]));
}

TEST_CASE("circle annulus converges to the fiber eigenvalues at second order") {
  const double d = 0.5, alpha = -1.0;
  const auto p = strip::make_strip_problem(geometry::CurvatureProfile::circle(1.0), d, alpha, 16, 16);
  const auto rep = strip::convergence_report(p, 3, 2);
  CHECK(rep.monotone);
  CHECK_FALSE(rep.non_monotone_convergence);
  const auto f0 = fiber::fiber_convergence(0, 2 * kPi, d, alpha, 512);
  const auto f1 = fiber::fiber_convergence(1, 2 * kPi, d, alpha, 512);
  const double ref[2] = {f0.values[0].value, f1.values[0].value};
  for (int q = 0; q < 2; ++q) {
    CHECK(rep.observed_order[q] > 1.7);
    CHECK(rep.observed_order[q] < 2.3);
    CHECK(rel(rep.values.back()[q], ref[q]) < 2e-3);
    CHECK(rel(rep.extrapolated[q].value, ref[q]) < 2e-5);
    // Upper bounds at every level.
    for (const auto& lv : rep.values) CHECK(lv[q] >= ref[q] - 1e-12);
  }
}

TEST_CASE("circle exterior: extrapolated eigenvalues match the secular equation") {
  const double alpha = -4.0;
  const double l1 = *special::secular_oracle(0, 1.0, alpha);
  const double l2 = *special::secular_oracle(1, 1.0, alpha);
  const auto f = fiber::solve_exterior_fiber(1, 2 * kPi, alpha, 256);
  const auto p = strip::make_strip_problem(geometry::CurvatureProfile::circle(1.0), geometry::kInfinity, alpha, 32, 64,
                                           f.truncation);
  const auto rep = strip::convergence_report(p, 3, 3);
  REQUIRE(rep.values.back().size() == 3);
  CHECK(rep.monotone);
  CHECK(rel(rep.extrapolated[0].value, l1) <= 1e-7);
  CHECK(rel(rep.extrapolated[1].value, l2) <= 1e-6);
  CHECK(rel(rep.extrapolated[2].value, l2) <= 1e-6);
  REQUIRE(rep.finest.degenerate_pairs.size() == 1);
  CHECK(rep.finest.degenerate_pairs[0].first == 1);
  CHECK(rel(rep.finest.values[1], rep.finest.values[2]) <= strip::kPairingTolerance);
}

TEST_CASE("exterior below the n = 1 threshold has a single bound state in the sanity window") {
  const double alpha = -0.5;
  const auto p = strip::make_strip_problem(geometry::CurvatureProfile::circle(1.0), geometry::kInfinity, alpha, 32, 64,
                                           48.0);
  const auto sol = strip::solve_strip(p, 3);
  REQUIRE(sol.values.size() == 1);
  CHECK(sol.values[0] < 0.0);
  CHECK(sol.values[0] >= -alpha * alpha - 1.0 * std::abs(alpha));
  CHECK(sol.degenerate_pairs.empty());
}

TEST_CASE("convex oval exterior sits in the sanity window") {
  const double alpha = -2.0;
  const geometry::CurvatureProfile prof{2 * kPi, {{2, 0.4, 0.0}}};
  const auto p = strip::make_strip_problem(prof, geometry::kInfinity, alpha, 32, 64);
  const auto sol = strip::solve_strip(p, 1);
  REQUIRE(sol.values.size() == 1);
  CHECK(sol.values[0] < 0.0);
  CHECK(sol.values[0] >= -alpha * alpha - 1.4 * std::abs(alpha));
}

TEST_CASE("nested refinement never raises an eigenvalue") {
  const auto p = strip::make_strip_problem(oval(), 0.5, -1.0, 16, 8);
  const auto rep = strip::convergence_report(p, 3, 3);
  CHECK(rep.monotone);
  for (std::size_t q = 0; q < 3; ++q)
    for (std::size_t l = 1; l < rep.values.size(); ++l) CHECK(rep.values[l][q] <= rep.values[l - 1][q] + 1e-12);
  CHECK(rep.extrapolated[0].errbar < std::abs(rep.values[2][0] - rep.values[1][0]));
}

TEST_CASE("oval strip has a lower ground state than the annulus of the same length and width") {
  const double d = 0.5, alpha = -1.0;
  const auto oval_p = strip::make_strip_problem(oval(), d, alpha, 64, 32);
  const auto circ_p = strip::make_strip_problem(geometry::CurvatureProfile::circle(1.0), d, alpha, 64, 32);
  const auto ro = strip::convergence_report(oval_p, 2, 1);
  const auto rc = strip::convergence_report(circ_p, 2, 1);
  const auto& eo = ro.extrapolated[0];
  const auto& ec = rc.extrapolated[0];
  CHECK(eo.value + eo.errbar < ec.value - ec.errbar);
}

TEST_CASE("convergence report needs two levels") {
  const auto p = strip::make_strip_problem(oval(), 0.5, -1.0, 16, 8);
  CHECK_THROWS_AS(strip::convergence_report(p, 1, 1), std::invalid_argument);
}

TEST_CASE("assembled forms agree with an independent quadrature") {
  const auto p = strip::make_strip_problem(oval(), 0.5, -1.0, 16, 8);
  const auto mats = strip::assemble_strip(p);
  Eigen::MatrixXd u(16, 9);
  for (Eigen::Index i = 0; i < u.rows(); ++i)
    for (Eigen::Index j = 0; j < u.cols(); ++j) u(i, j) = std::sin(1.3 * i + 0.7 * j) + 0.1 * j;
  Eigen::VectorXd x(static_cast<Eigen::Index>(mats.a.size()));
  for (std::size_t i = 0; i < 16; ++i)
    for (std::size_t j = 0; j < 9; ++j) x(mats.dof(i, j)) = u(i, j);
  const std::vector<double> xv(x.data(), x.data() + x.size());
  const auto [qa, qm] = quadrature_forms(p, u);
  CHECK(rel(mats.a.quadratic_form(xv), qa) < 1e-5);
  CHECK(rel(mats.m.quadratic_form(xv), qm) < 1e-5);
}

TEST_CASE("shifting the profile by one s-node leaves the spectrum unchanged") {
  const std::size_t ns = 32;
  const double h = 2 * kPi / ns;
  const geometry::CurvatureProfile base{2 * kPi, {{2, 0.5, 0.3}, {4, 0.1, -0.2}}};
  const geometry::CurvatureProfile shifted{2 * kPi, {{2, 0.5, 0.3 + 2 * h}, {4, 0.1, -0.2 + 4 * h}}};
  const auto a = strip::solve_strip(strip::make_strip_problem(base, 0.4, -1.5, ns, 16), 4, 1e-11);
  const auto b = strip::solve_strip(strip::make_strip_problem(shifted, 0.4, -1.5, ns, 16), 4, 1e-11);
  for (std::size_t q = 0; q < 4; ++q) CHECK(std::abs(a.values[q] - b.values[q]) <= 1e-10 * std::abs(a.values[q]));
}

TEST_CASE("ground state has one sign") {
  const auto p = strip::make_strip_problem(oval(), 0.5, -1.0, 32, 16);
  const auto sol = strip::solve_strip(p, 1);
  const auto& u = sol.eigenfunctions[0];
  const double sign = u(0, 0) > 0 ? 1.0 : -1.0;
  CHECK((sign * u).minCoeff() > 0.0);

  const auto e = strip::make_strip_problem(oval(), geometry::kInfinity, -2.0, 32, 32);
  const auto se = strip::solve_strip(e, 1);
  const auto& v = se.eigenfunctions[0];
  const double ve = v(0, 0) > 0 ? 1.0 : -1.0;
  CHECK((ve * v.leftCols(v.cols() - 1)).minCoeff() > 0.0);
  CHECK(v.col(v.cols() - 1).isZero(0.0));
}

TEST_CASE("annulus ground state has no first angular harmonic") {
  const auto p = strip::make_strip_problem(geometry::CurvatureProfile::circle(1.0), 0.5, -1.0, 32, 16);
  const auto sol = strip::solve_strip(p, 1);
  const Eigen::MatrixXcd u = sol.eigenfunctions[0].cast<std::complex<double>>();
  const double scale = u.cwiseAbs().maxCoeff();
  CHECK(fiber::angular_project(u, 2 * kPi, 1).cwiseAbs().maxCoeff() <= 1e-8 * scale);
  CHECK(fiber::angular_project(u, 2 * kPi, 0).cwiseAbs().maxCoeff() > 0.1 * scale);
}

TEST_CASE("domain validation") {
  const geometry::CurvatureProfile wavy{2 * kPi, {{2, 1.5, 0.0}}};
  CHECK_THROWS_AS(strip::make_strip_problem(wavy, 3.0, -1.0, 32, 8), WidthExceedsCritical);
  CHECK_THROWS_AS(strip::make_strip_problem(wavy, geometry::kInfinity, -1.0, 32, 8), WidthExceedsCritical);
  CHECK_THROWS_AS(strip::make_strip_problem(oval(), geometry::kInfinity, 0.5, 32, 8), std::invalid_argument);
  CHECK_THROWS_AS(strip::make_strip_problem(oval(), 0.5, -1.0, 30, 8), std::invalid_argument);
  CHECK_THROWS_AS(strip::make_strip_problem(oval(), -0.5, -1.0, 32, 8), std::invalid_argument);

  // Bypass the validation to reach the assembly check.
  auto p = strip::make_strip_problem(wavy, 0.2, -1.0, 32, 8);
  p.width = 3.0;
  p.mesh.t = fiber::GradedMesh::uniform(3.0, 8);
  CHECK_THROWS_AS(strip::assemble_strip(p), JacobianNonPositive);
}

TEST_CASE("eigenfunction CSV") {
  const auto p = strip::make_strip_problem(geometry::CurvatureProfile::circle(1.0), 0.5, -1.0, 8, 4);
  const auto sol = strip::solve_strip(p, 1);
  std::ostringstream out;
  strip::write_eigenfunction_csv(out, p, sol, 0);
  const std::string text = out.str();
  CHECK(text.rfind("s,t,x,y,re_u,im_u\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 1 + 8 * 5);
  // Node (0, t) on the unit circle sits at (1 + t, 0) with the outward normal.
  std::istringstream in(text);
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  std::getline(in, row);
  double s, t, x, y;
  char c;
  std::istringstream(row) >> s >> c >> t >> c >> x >> c >> y;
  CHECK(s == 0.0);
  CHECK(std::abs(std::hypot(x, y) - (1 + t)) < 1e-12);
  CHECK_THROWS_AS(strip::write_eigenfunction_csv(out, p, sol, 1), std::out_of_range);
}
