#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "robin/eig/banded.hpp"
#include "robin/eig/eigensolver.hpp"
#include "robin/errors.hpp"

using namespace robin::eig;

namespace {

SymmetricBandedMatrix diagonal(std::initializer_list<double> values) {
  SymmetricBandedMatrix m(values.size(), 0);
  std::size_t i = 0;
  for (double v : values) m.set(i, i, v), ++i;
  return m;
}

SymmetricBandedMatrix identity(std::size_t n, double scale = 1.0) {
  SymmetricBandedMatrix m(n, 0);
  for (std::size_t i = 0; i < n; ++i) m.set(i, i, scale);
  return m;
}

// Random symmetric banded A and SPD banded M.
std::pair<SymmetricBandedMatrix, SymmetricBandedMatrix> random_pencil(std::size_t n, std::size_t b, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  SymmetricBandedMatrix a(n, b), m(n, b);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k <= std::min(b, i); ++k) {
      a.set(i, i - k, u(rng));
      if (k > 0) m.set(i, i - k, 0.1 * u(rng));
    }
    m.set(i, i, 1.0 + 0.2 * b + 0.5 * std::abs(u(rng)));  // diagonally dominant
  }
  return {std::move(a), std::move(m)};
}

}  // namespace

TEST_CASE("banded storage") {
  SymmetricBandedMatrix a(5, 2);
  a.add(3, 1, 2.0);
  a.add(1, 3, 0.5);
  CHECK(a(1, 3) == 2.5);
  CHECK(a(3, 1) == 2.5);
  CHECK(a(4, 0) == 0.0);
  CHECK_THROWS_AS(a.add(4, 0, 1.0), std::out_of_range);

  const auto [p, q] = random_pencil(12, 3, 1);
  const Eigen::MatrixXd dense = p.dense();
  Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(12, -1.0, 2.0);
  CHECK(((p * x) - dense * x).norm() < 1e-14);
  CHECK(p.quadratic_form({x.data(), 12}) == doctest::Approx(x.dot(dense * x)).epsilon(1e-14));
  CHECK(p.norm_inf() == doctest::Approx(dense.cwiseAbs().rowwise().sum().maxCoeff()).epsilon(1e-15));
  const auto round = SymmetricBandedMatrix::from_dense(dense, 3);
  CHECK((round.dense() - dense).norm() == 0.0);
}

TEST_CASE("triplet dump") {
  SymmetricBandedMatrix a(3, 1);
  a.set(0, 0, 2.0);
  a.set(1, 0, -1.0);
  a.set(2, 2, 4.0);
  std::ostringstream out;
  a.write_triplets(out);
  CHECK(out.str() == "0 0 2\n1 0 -1\n2 2 4\n");
}

TEST_CASE("inertia by Sylvester's law") {
  CHECK(factorize_shifted(diagonal({1.0, 2.0}), identity(2), 0.0).negative_count() == 0);
  CHECK(factorize_shifted(diagonal({-1.0, 2.0}), identity(2), 0.0).negative_count() == 1);
  CHECK(factorize_shifted(diagonal({1.0, 2.0, 3.0}), identity(3), 2.5).negative_count() == 2);
  CHECK_THROWS_AS(factorize_shifted(diagonal({1.0, 2.0}), identity(2), 1.0), robin::SingularShift);

  // Inertia matches a dense count on random pencils.
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto [a, m] = random_pencil(40, 4, seed);
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> dense(a.dense(), m.dense());
    for (double sigma : {-1.5, -0.3, 0.0, 0.4, 1.1}) {
      const auto expected = (dense.eigenvalues().array() < sigma).count();
      CHECK(count_below(a, m, sigma) == static_cast<std::size_t>(expected));
    }
  }
}

TEST_CASE("factorization solves the shifted system") {
  const auto [a, m] = random_pencil(30, 5, 3);
  const auto f = factorize_shifted(a, m, 0.37);
  Eigen::VectorXd rhs = Eigen::VectorXd::LinSpaced(30, 1.0, 3.0);
  Eigen::VectorXd x = rhs;
  f.solve({x.data(), 30});
  const Eigen::MatrixXd shifted = a.dense() - 0.37 * m.dense();
  CHECK((shifted * x - rhs).norm() < 1e-11 * rhs.norm() * shifted.norm());
}

TEST_CASE("diagonal pencil") {
  const auto r = smallest_eigenpairs(diagonal({3.0, 1.0, 2.0, 5.0}), identity(4), 2);
  REQUIRE(r.values.size() == 2);
  CHECK(r.values[0] == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(r.values[1] == doctest::Approx(2.0).epsilon(1e-13));
  CHECK(std::abs(r.vectors(1, 0)) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(r.vectors(2, 1)) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("discrete Dirichlet Laplacian matches the closed form") {
  const std::size_t n = 400;
  const double h = 1.0 / static_cast<double>(n + 1);
  SymmetricBandedMatrix a(n, 1);
  for (std::size_t i = 0; i < n; ++i) {
    a.set(i, i, 2.0 / (h * h));
    if (i > 0) a.set(i, i - 1, -1.0 / (h * h));
  }
  const auto r = smallest_eigenpairs(a, identity(n), 6);
  for (std::size_t k = 1; k <= 6; ++k) {
    const double exact = 2.0 / (h * h) * (1.0 - std::cos(k * std::numbers::pi * h));
    CHECK(std::abs(r.values[k - 1] - exact) <= 1e-10 * exact);
  }
  CHECK(r.certificate_count == 6);

  SUBCASE("mass scaling divides the spectrum") {
    const auto scaled = smallest_eigenpairs(a, identity(n, h), 3);
    for (std::size_t k = 0; k < 3; ++k) CHECK(scaled.values[k] == doctest::Approx(r.values[k] / h).epsilon(1e-11));
  }
}

TEST_CASE("random banded pencils agree with a dense solver") {
  for (std::uint64_t seed = 10; seed < 30; ++seed) {
    const std::size_t n = 60 + 7 * (seed % 5);
    const std::size_t b = 1 + seed % 6;
    const auto [a, m] = random_pencil(n, b, seed);
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> dense(a.dense(), m.dense());
    const std::size_t k = 1 + seed % 5;
    const auto r = smallest_eigenpairs(a, m, k);
    REQUIRE(r.values.size() == k);
    const Eigen::MatrixXd mm = m.dense();
    const Eigen::MatrixXd gram = r.vectors.transpose() * mm * r.vectors;
    CHECK((gram - Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k))).norm() <
          1e-10);
    for (std::size_t i = 0; i < k; ++i) {
      const double exact = dense.eigenvalues()(static_cast<Eigen::Index>(i));
      CHECK(std::abs(r.values[i] - exact) <= 1e-9 * std::max(1.0, std::abs(exact)));
      CHECK(r.residuals[i] <= 1e-9);
    }
  }
}

TEST_CASE("repeated eigenvalues are both resolved") {
  // Block-diagonal pencil with an exactly double lowest eigenvalue.
  const std::size_t n = 80;
  SymmetricBandedMatrix a(n, 1);
  for (std::size_t i = 0; i < n; ++i) a.set(i, i, 1.0 + static_cast<double>(i / 2));
  for (std::size_t i = 2; i < n; i += 2) a.set(i + 1, i, 0.1);
  const auto r = smallest_eigenpairs(a, identity(n), 2);
  CHECK(r.values[0] == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(r.values[1] == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(r.certificate_count == 2);

  // Asking for one eigenvalue of a double pair still returns the lowest.
  const auto one = smallest_eigenpairs(a, identity(n), 1);
  CHECK(one.values[0] == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("indefinite spectrum and shift hints") {
  const std::size_t n = 50;
  SymmetricBandedMatrix a(n, 0);
  for (std::size_t i = 0; i < n; ++i) a.set(i, i, -20.0 + static_cast<double>(i));
  for (double hint : {-100.0, -19.0, 0.0, 30.0}) {
    EigOptions opts;
    opts.shift_hint = hint;
    const auto r = smallest_eigenpairs(a, identity(n), 3, opts);
    CHECK(r.values[0] == doctest::Approx(-20.0).epsilon(1e-13));
    CHECK(r.values[2] == doctest::Approx(-18.0).epsilon(1e-13));
    CHECK(r.lower_shift < -20.0);
  }
}

TEST_CASE("seeded runs are reproducible") {
  const auto [a, m] = random_pencil(90, 4, 77);
  const auto r1 = smallest_eigenpairs(a, m, 3);
  const auto r2 = smallest_eigenpairs(a, m, 3);
  CHECK(r1.values == r2.values);
  CHECK((r1.vectors - r2.vectors).norm() == 0.0);
}

TEST_CASE("argument validation") {
  CHECK_THROWS_AS(smallest_eigenpairs(identity(3), identity(4), 1), std::invalid_argument);
  CHECK_THROWS_AS(smallest_eigenpairs(identity(3), identity(3), 0), std::invalid_argument);
  CHECK_THROWS_AS(smallest_eigenpairs(identity(3), identity(3), 4), std::invalid_argument);
}
