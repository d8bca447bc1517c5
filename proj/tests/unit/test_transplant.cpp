#include <doctest.h>

#include <cmath>
#include <numbers>

#include "robin/errors.hpp"
#include "robin/strip/strip.hpp"
#include "robin/transplant/transplant.hpp"

using namespace robin;

namespace {

constexpr double kPi = std::numbers::pi;

// κ = κ∘(c + (1 − c)cos(2πks/L)) with L = 2π/(κ∘c): convex for c ≥ 1/2,
// max κ = κ∘.
geometry::CurvatureProfile capped(double kappa_cap, double c, int k = 2) {
  return {2 * kPi / (kappa_cap * c), {{k, kappa_cap * (1 - c), 0.0}}};
}

geometry::PlanarCurve curve(const geometry::CurvatureProfile& p, std::size_t n = 512) {
  return geometry::build_curve(p, n);
}

}  // namespace

TEST_CASE("transplanted annulus ground state reproduces the annulus eigenvalue on any strip of the same length") {
  const geometry::CurvatureProfile oval{2 * kPi, {{2, 0.5, 0.0}}};
  const geometry::CurvatureProfile wavy{2 * kPi, {{3, 1.5, 0.0}}};
  for (const auto* prof : {&oval, &wavy}) {
    const auto c = curve(*prof);
    for (double alpha : {-3.0, -1.0, 0.0, 1.0, 3.0}) {
      for (double d : {0.25, 0.5}) {
        if (prof == &wavy && d > 0.3) continue;
        const auto pair = transplant::annulus_profile(2 * kPi, d, alpha, 256);
        pair.validate();
        const auto r = transplant::rayleigh_u_star(c, d, alpha, pair.psi);
        CAPTURE(alpha);
        CAPTURE(d);
        CHECK(std::abs(r.quotient - pair.psi.lambda) <= 1e-9 * std::max(1.0, std::abs(pair.psi.lambda)));
        CHECK(std::abs(r.direct_quotient - r.quotient) <= 1e-12 * std::max(1.0, std::abs(r.quotient)));
        CHECK(r.tolerance < 1e-11);
        CHECK(r.denominator > 0.0);
      }
    }
  }
}

TEST_CASE("profile mesh must match the strip width") {
  const auto pair = transplant::annulus_profile(2 * kPi, 0.5, -1.0, 64);
  CHECK_THROWS_AS(transplant::rayleigh_u_star(curve(geometry::CurvatureProfile::circle(1.0)), 0.25, -1.0, pair.psi),
                  std::invalid_argument);
  CHECK_THROWS_AS(transplant::rayleigh_u_star(curve(geometry::CurvatureProfile::circle(1.0)), geometry::kInfinity, -1.0,
                                              pair.psi),
                  std::invalid_argument);
}

TEST_CASE("exterior: u-star quotient on a longer curve lies below the disk ground state") {
  for (double alpha : {-2.0, -4.0}) {
    const auto pair = transplant::disk_profiles(2 * kPi, alpha, 512);
    const auto circle = transplant::rayleigh_u_star(curve(geometry::CurvatureProfile::circle(1.0)), geometry::kInfinity,
                                                    alpha, pair.psi);
    CHECK(std::abs(circle.quotient - pair.psi.lambda) <= 1e-9 * std::abs(pair.psi.lambda));
    for (double c : {0.6, 0.8}) {
      const auto r = transplant::rayleigh_u_star(curve(capped(1.0, c)), geometry::kInfinity, alpha, pair.psi);
      CHECK(r.quotient <= pair.psi.lambda + 1e-9);
    }
  }
}

TEST_CASE("v-star on the disk itself is the second disk eigenvalue") {
  const double alpha = -2.0;
  const auto pair = transplant::disk_profiles(2 * kPi, alpha, 512);
  REQUIRE(pair.has_phi());
  const auto v = transplant::rayleigh_v_star(curve(geometry::CurvatureProfile::circle(1.0)), alpha, pair.phi);
  CHECK(std::abs(v.rayleigh.quotient - pair.phi.lambda) <= 1e-9 * std::abs(pair.phi.lambda));
  CHECK(std::abs(v.disk_quotient - pair.phi.lambda) <= 1e-9 * std::abs(pair.phi.lambda));
  CHECK(std::abs(v.potential - v.capped_potential) <= 1e-12 * v.capped_potential);
  CHECK(v.kappa_cap == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("v-star on capped convex curves is strictly below the disk") {
  for (double alpha : {-2.0, -4.0}) {
    const auto pair = transplant::disk_profiles(2 * kPi, alpha, 512);
    for (double c : {0.6, 0.7, 0.9}) {
      for (int k : {2, 4}) {
        const auto v = transplant::rayleigh_v_star(curve(capped(1.0, c, k)), alpha, pair.phi);
        const double tol = v.rayleigh.tolerance;
        CAPTURE(c);
        CAPTURE(k);
        // Pointwise κ ≤ κ∘ and x ↦ x²/(1 + tx) increasing.
        CHECK(v.potential < v.capped_potential);
        CHECK(v.rayleigh.quotient + 10 * tol < v.capped_quotient);
        CHECK(v.capped_quotient <= v.disk_quotient + tol);
        CHECK(v.disk_quotient == doctest::Approx(pair.phi.lambda).epsilon(1e-12));
        CHECK(tol < 1e-10);
      }
    }
  }
}

TEST_CASE("curvature cap and convexity preconditions") {
  const auto pair = transplant::disk_profiles(2 * kPi, -2.0, 256);
  CHECK_THROWS_AS(transplant::rayleigh_v_star(curve(geometry::CurvatureProfile::circle(0.9)), -2.0, pair.phi),
                  CurvatureCapViolated);
  const geometry::CurvatureProfile bean{2 * kPi, {{2, 1.3, 0.0}}};
  CHECK_THROWS_AS(transplant::rayleigh_v_star(curve(bean), -2.0, pair.phi), std::invalid_argument);
}

TEST_CASE("transplanted pair is orthogonal in both forms") {
  const double alpha = -2.0;
  const auto pair = transplant::disk_profiles(2 * kPi, alpha, 512);
  for (const auto& prof : {geometry::CurvatureProfile::circle(1.0), capped(1.0, 0.7), capped(1.0, 0.55, 4),
                           geometry::CurvatureProfile{2 * kPi, {{2, 0.4, 0.3}, {4, 0.2, -1.0}}}}) {
    const auto c = curve(prof);
    const auto o = transplant::orthogonality_check(c, alpha, pair.psi, pair.phi);
    CHECK(std::abs(o.tangent_integral) <= 1e-12);
    CHECK(std::abs(o.weighted_tangent_integral) <= 1e-12);
    CHECK(o.inner_residual <= 1e-10);
    CHECK(o.form_residual <= 1e-10);
    CHECK(o.direct_inner_residual <= 1e-10);
  }
}

TEST_CASE("min-max bound") {
  CHECK(transplant::minmax_upper_bound(-1.0, -0.5) == -0.5);
  CHECK(transplant::minmax_upper_bound(-1.0, -0.5, 1e-8) == doctest::Approx(-0.5 + 1.5e-8).epsilon(1e-14));
  CHECK_THROWS_AS(transplant::minmax_upper_bound(-1.0, -0.5, 1e-5), OrthogonalityTooWeak);
}

TEST_CASE("perimeter gap") {
  const auto circle = transplant::perimeter_gap(curve(geometry::CurvatureProfile::circle(1.0)), 1.0);
  CHECK(std::abs(circle.gap) <= 1e-12);
  for (double c : {0.6, 0.7, 0.9}) {
    const auto g = transplant::perimeter_gap(curve(capped(1.0, c)), 1.0);
    CHECK(g.gap > 0.0);
    CHECK(g.gap == doctest::Approx(2 * kPi / c - 2 * kPi).epsilon(1e-12));
    CHECK(std::abs(g.gap - g.gap_curvature) <= 1e-12);
  }
}

TEST_CASE("three-way sandwich against the 2-D solver") {
  const double alpha = -2.0;
  const auto pair = transplant::disk_profiles(2 * kPi, alpha, 512);
  const auto prof = capped(1.0, 0.8);
  const auto rep = transplant::sandwich("capped-0.8", curve(prof), alpha, pair);
  CHECK(rep.bound + 10 * rep.quadrature_tolerance < rep.lambda2_disk);
  CHECK(rep.bound >= rep.ru);

  const auto p = strip::make_strip_problem(prof, geometry::kInfinity, alpha, 32, 64, pair.psi.t.back());
  const auto conv = strip::convergence_report(p, 2, 2);
  REQUIRE(conv.extrapolated.size() == 2);
  const auto& l2 = conv.extrapolated[1];
  CHECK(l2.value - l2.errbar <= rep.bound);

  const auto j = transplant::to_json(rep);
  CHECK(j.at("d") == "inf");
  CHECK(j.at("curve_id") == "capped-0.8");
  CHECK(j.at("bound").get<double>() == rep.bound);
  CHECK(j.at("residuals").contains("form"));
}

TEST_CASE("profile validation") {
  auto pair = transplant::annulus_profile(2 * kPi, 0.5, -1.0, 64);
  CHECK_NOTHROW(pair.validate());
  CHECK(transplant::element_slopes(pair.psi).size() == 64);
  CHECK(std::isfinite(transplant::weighted_h1_norm2(pair.psi)));
  pair.psi.values[3] = std::nan("");
  CHECK_THROWS_AS(pair.validate(), std::invalid_argument);
}
