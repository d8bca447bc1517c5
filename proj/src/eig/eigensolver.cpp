#include "robin/eig/eigensolver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

#include <fmt/format.h>

#include "robin/errors.hpp"

namespace robin::eig {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// Factorizes at sigma, nudging it when it lands on an eigenvalue.
ShiftedFactorization robust_factor(const SymmetricBandedMatrix& a, const SymmetricBandedMatrix& m, double sigma,
                                   std::string& log) {
  double s = sigma;
  for (int attempt = 0; attempt < 8; ++attempt) {
    try {
      return factorize_shifted(a, m, s);
    } catch (const SingularShift&) {
      const double nudge = 1e-10 * std::max(1.0, std::abs(sigma)) * std::pow(10.0, attempt);
      s = sigma - nudge;
      log += fmt::format("singular shift {:.17g}, retrying at {:.17g}\n", sigma, s);
    }
  }
  return factorize_shifted(a, m, s);
}

class KrylovBasis {
 public:
  KrylovBasis(const SymmetricBandedMatrix& m, std::size_t n, std::size_t capacity)
      : mass_(m), v_(n, capacity), mv_(n, capacity), images_(n, capacity) {}

  std::size_t size() const noexcept { return cols_; }
  std::size_t capacity() const noexcept { return static_cast<std::size_t>(v_.cols()); }
  std::size_t images() const noexcept { return images_done_; }

  void clear() { cols_ = images_done_ = 0; }

  // M-orthogonalizes x against the basis (twice) and appends it if it
  // carries a new direction. Returns false when x was (numerically) in span.
  bool append(Eigen::VectorXd x) {
    if (cols_ >= capacity()) return false;
    const auto n = x.size();
    Eigen::VectorXd mx(n);
    double original = std::sqrt(std::max(0.0, x.dot(mass_ * x)));
    if (!(original > 0.0)) return false;
    for (int pass = 0; pass < 2; ++pass) {
      if (cols_ > 0) {
        const auto c = static_cast<Eigen::Index>(cols_);
        const Eigen::VectorXd coeff = mv_.leftCols(c).transpose() * x;
        x -= v_.leftCols(c) * coeff;
      }
    }
    mx = mass_ * x;
    const double norm = std::sqrt(std::max(0.0, x.dot(mx)));
    if (!(norm > 1e-10 * original)) return false;
    const auto c = static_cast<Eigen::Index>(cols_);
    v_.col(c) = x / norm;
    mv_.col(c) = mx / norm;
    ++cols_;
    return true;
  }

  void compute_images(const ShiftedFactorization& f) {
    for (; images_done_ < cols_; ++images_done_) {
      const auto c = static_cast<Eigen::Index>(images_done_);
      Eigen::VectorXd w = mv_.col(c);
      f.solve({w.data(), static_cast<std::size_t>(w.size())});
      images_.col(c) = w;
    }
  }

  Eigen::MatrixXd projected() const {
    const auto c = static_cast<Eigen::Index>(cols_);
    Eigen::MatrixXd h = mv_.leftCols(c).transpose() * images_.leftCols(c);
    return 0.5 * (h + h.transpose());
  }

  const Eigen::MatrixXd& vectors() const noexcept { return v_; }
  const Eigen::MatrixXd& image_vectors() const noexcept { return images_; }

 private:
  const SymmetricBandedMatrix& mass_;
  Eigen::MatrixXd v_;
  Eigen::MatrixXd mv_;
  Eigen::MatrixXd images_;
  std::size_t cols_ = 0;
  std::size_t images_done_ = 0;
};

struct RitzPair {
  double value;
  Eigen::VectorXd vector;
  double residual;
  bool converged;
};

}  // namespace

std::size_t count_below(const SymmetricBandedMatrix& a, const SymmetricBandedMatrix& m, double sigma) {
  std::string log;
  return robust_factor(a, m, sigma, log).negative_count();
}

GeneralizedEigResult smallest_eigenpairs(const SymmetricBandedMatrix& a, const SymmetricBandedMatrix& m, std::size_t k,
                                         const EigOptions& options) {
  const std::size_t n = a.size();
  if (m.size() != n) throw std::invalid_argument("smallest_eigenpairs: dimension mismatch");
  if (k == 0 || k > n) throw std::invalid_argument("smallest_eigenpairs: need 1 <= k <= n");
  if (!(options.tol > 0.0)) throw std::invalid_argument("smallest_eigenpairs: tolerance must be positive");

  GeneralizedEigResult result;
  std::string& log = result.log;
  const double norm_a = a.norm_inf();
  const double norm_m = m.norm_inf();

  // --- a shift strictly below the spectrum --------------------------------
  double upper = 0.0;
  if (options.shift_hint) {
    upper = *options.shift_hint;
  } else {
    upper = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) upper = std::min(upper, a(i, i) / m(i, i));
  }
  double delta = 0.05 * std::max(1.0, std::abs(upper));
  double sigma = upper - delta;
  std::optional<double> occupied;  // a shift with at least one eigenvalue below
  ShiftedFactorization factor = robust_factor(a, m, sigma, log);
  for (int step = 0; factor.negative_count() > 0; ++step) {
    if (step > 200) throw NoConvergence("could not find a shift below the spectrum", log);
    occupied = sigma;
    delta *= 4.0;
    sigma = upper - delta;
    factor = robust_factor(a, m, sigma, log);
  }
  for (int step = 0; occupied && step < 16; ++step) {
    if (*occupied - sigma <= 0.5 * (std::abs(sigma) + 1.0)) break;
    const double mid = 0.5 * (sigma + *occupied);
    auto trial = robust_factor(a, m, mid, log);
    if (trial.negative_count() == 0) {
      sigma = mid;
      factor = std::move(trial);
    } else {
      occupied = mid;
    }
  }
  result.lower_shift = factor.shift();
  log += fmt::format("lower shift {:.17g}\n", result.lower_shift);

  // --- block Krylov iteration ---------------------------------------------
  const std::size_t p = std::max<std::size_t>(1, options.block_size);
  std::size_t want = k;
  const std::size_t capacity =
      std::min(n, options.max_basis > 0 ? options.max_basis : std::max<std::size_t>(48, 4 * (k + p) + 24));
  KrylovBasis basis(m, n, capacity);

  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto random_vector = [&] {
    Eigen::VectorXd x(static_cast<Eigen::Index>(n));
    for (auto& v : x) v = normal(rng);
    return x;
  };

  for (std::size_t j = 0; j < p; ++j) basis.append(random_vector());

  std::vector<RitzPair> ritz;
  const auto rayleigh_ritz = [&] {
    basis.compute_images(factor);
    const Eigen::MatrixXd h = basis.projected();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> small(h);
    const auto& theta = small.eigenvalues();
    const auto cols = static_cast<Eigen::Index>(basis.size());
    ritz.clear();
    // Largest θ ↔ smallest λ = σ + 1/θ.
    for (Eigen::Index idx = cols - 1; idx >= 0; --idx) {
      if (!(theta(idx) > 0.0)) break;
      RitzPair pair;
      pair.value = factor.shift() + 1.0 / theta(idx);
      pair.vector = basis.vectors().leftCols(cols) * small.eigenvectors().col(idx);
      pair.residual = std::numeric_limits<double>::infinity();
      pair.converged = false;
      ritz.push_back(std::move(pair));
    }
  };
  const auto check_residuals = [&](std::size_t count) {
    bool all = ritz.size() >= count;
    for (std::size_t i = 0; i < std::min(count, ritz.size()); ++i) {
      auto& pair = ritz[i];
      const Eigen::VectorXd ax = a * pair.vector;
      const Eigen::VectorXd mx = m * pair.vector;
      // The Rayleigh quotient is quadratically accurate in the vector error.
      pair.value = pair.vector.dot(ax) / pair.vector.dot(mx);
      const double rnorm = (ax - pair.value * mx).norm();
      pair.residual = rnorm / mx.norm();
      const double backward = rnorm / ((norm_a + std::abs(pair.value) * norm_m) * pair.vector.norm());
      pair.converged = pair.residual <= options.tol || backward <= 1e3 * kEps;
      all = all && pair.converged;
    }
    return all;
  };

  std::size_t certificate_attempts = 0;
  for (;;) {
    ++result.iterations;
    if (result.iterations > 100000) throw NoConvergence("iteration limit reached", log);
    rayleigh_ritz();
    const bool done = check_residuals(want);

    if (done) {
      const double top = ritz[want - 1].value;
      const double tau = top + 1e-8 * std::max(1.0, std::abs(top));
      const std::size_t count = count_below(a, m, tau);
      std::size_t found = 0;
      while (found < ritz.size() && ritz[found].value < tau) ++found;
      log += fmt::format("certificate: {} eigenvalues below {:.17g}, {} Ritz values\n", count, tau, found);
      result.certificate_shift = tau;
      result.certificate_count = count;
      if (count <= want || count > n) break;
      // A cluster member (or a missed eigenvalue) sits below tau: widen.
      if (++certificate_attempts > 6) {
        throw NoConvergence(fmt::format("inertia reports {} eigenvalues below {:.17g}, solver resolved {}", count,
                                        tau, want),
                            log);
      }
      want = count;
      if (want + p > basis.capacity()) {
        throw NoConvergence("eigenvalue cluster exceeds the Krylov basis capacity", log);
      }
      basis.append(random_vector());
      continue;
    }

    // Expand with images of the newest block, or restart.
    const std::size_t cols = basis.size();
    bool grew = false;
    if (cols + p <= basis.capacity()) {
      const std::size_t first = cols >= p ? cols - p : 0;
      for (std::size_t j = first; j < cols; ++j) {
        grew |= basis.append(basis.image_vectors().col(static_cast<Eigen::Index>(j)));
      }
      if (!grew && cols < n) grew = basis.append(random_vector());
    }
    if (!grew) {
      if (cols >= n) {
        throw NoConvergence("Krylov space exhausted without meeting the residual tolerance", log);
      }
      log += fmt::format("restart {}: basis {}, lowest Ritz value {:.17g}, residual {:.3e}\n", result.restarts + 1,
                         cols, ritz.empty() ? 0.0 : ritz[0].value, ritz.empty() ? 0.0 : ritz[0].residual);
      if (++result.restarts > options.max_restarts) throw NoConvergence("restart limit reached", log);
      const std::size_t keep = std::min(ritz.size(), want + p);
      std::vector<Eigen::VectorXd> seeds;
      for (std::size_t i = 0; i < keep; ++i) seeds.push_back(ritz[i].vector);
      basis.clear();
      for (auto& s : seeds) basis.append(std::move(s));
      while (basis.size() < want + p && basis.size() < n) basis.append(random_vector());
    }
  }

  result.values.resize(k);
  result.residuals.resize(k);
  result.vectors.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k));
  for (std::size_t i = 0; i < k; ++i) {
    Eigen::VectorXd v = ritz[i].vector;
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0.0) v = -v;
    result.values[i] = ritz[i].value;
    result.residuals[i] = ritz[i].residual;
    result.vectors.col(static_cast<Eigen::Index>(i)) = v;
  }
  return result;
}

}  // namespace robin::eig
