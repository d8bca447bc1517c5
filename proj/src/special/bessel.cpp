#include "robin/special/bessel.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace robin::special {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kEuler = 0.57721566490153286061;
constexpr double kSeriesLimitI = 30.0;
constexpr double kSeriesLimitK = 2.0;

void require_positive(double x, const char* name) {
  if (!(x > 0.0) || !std::isfinite(x)) throw std::domain_error(std::string(name) + ": argument must be positive");
}

// Σ (x/2)^{2m+ν} / (m! (m+ν)!), ν ∈ {0, 1}
double i_series(int nu, double x) {
  const double q = 0.25 * x * x;
  double term = nu == 0 ? 1.0 : 0.5 * x;
  double sum = term;
  for (int m = 1; m < 500; ++m) {
    term *= q / (static_cast<double>(m) * (m + nu));
    sum += term;
    if (term < kEps * sum) break;
  }
  return sum;
}

// e^{−x} I_ν(x) ~ (2πx)^{−1/2} Σ (−1)^k a_k(ν) / x^k for large x.
double i_asymptotic_scaled(int nu, double x) {
  const double mu = 4.0 * nu * nu;
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 200; ++k) {
    const double odd = 2.0 * k - 1.0;
    const double next = -term * (mu - odd * odd) / (k * 8.0 * x);
    if (std::abs(next) > std::abs(term)) break;  // asymptotic series starts to diverge
    term = next;
    sum += term;
    if (std::abs(term) < kEps * std::abs(sum)) break;
  }
  return sum / std::sqrt(2.0 * std::numbers::pi * x);
}

// Small-argument series for K₀ and K₁ with digamma coefficients.
double k0_series(double x) {
  const double q = 0.25 * x * x;
  const double log_term = std::log(0.5 * x) + kEuler;
  double term = 1.0;
  double harmonic = 0.0;
  double sum = 0.0;
  double i0 = 1.0;
  for (int m = 1; m < 200; ++m) {
    term *= q / (static_cast<double>(m) * m);
    harmonic += 1.0 / m;
    sum += term * harmonic;
    i0 += term;
    if (term * harmonic < kEps * std::abs(sum)) break;
  }
  return -log_term * i0 + sum;
}

double k1_series(double x) {
  const double q = 0.25 * x * x;
  // ψ(k+1) + ψ(k+2) = −2γ + 2H_k + 1/(k+1)
  double term = 1.0;  // q^k / (k!(k+1)!)
  double harmonic = 0.0;
  double sum = -2.0 * kEuler + 1.0;
  for (int k = 1; k < 200; ++k) {
    term *= q / (static_cast<double>(k) * (k + 1));
    harmonic += 1.0 / k;
    const double add = term * (-2.0 * kEuler + 2.0 * harmonic + 1.0 / (k + 1));
    sum += add;
    if (std::abs(add) < kEps * std::abs(sum)) break;
  }
  return 1.0 / x + std::log(0.5 * x) * i_series(1, x) - 0.25 * x * sum;
}

// Steed's continued fraction (Temme's CF2) for e^{x}K₀ and e^{x}K₁, x ≥ 2.
void k_continued_fraction_scaled(double x, double& k0, double& k1) {
  double b = 2.0 * (1.0 + x);
  double d = 1.0 / b;
  double h = d;
  double delh = d;
  double q1 = 0.0;
  double q2 = 1.0;
  const double a1 = 0.25;
  double q = a1;
  double c = a1;
  double a = -a1;
  double s = 1.0 + q * delh;
  for (int i = 1; i < 100000; ++i) {
    a -= 2.0 * i;
    c = -a * c / (i + 1.0);
    const double qnew = (q1 - b * q2) / a;
    q1 = q2;
    q2 = qnew;
    q += c * qnew;
    b += 2.0;
    d = 1.0 / (b + a * d);
    delh = (b * d - 1.0) * delh;
    h += delh;
    const double dels = q * delh;
    s += dels;
    if (std::abs(dels / s) < kEps) break;
  }
  h *= a1;
  k0 = std::sqrt(std::numbers::pi / (2.0 * x)) / s;
  k1 = k0 * (x + 0.5 - h) / x;
}

}  // namespace

double bessel_i0(double x) {
  x = std::abs(x);
  return x <= kSeriesLimitI ? i_series(0, x) : std::exp(x) * i_asymptotic_scaled(0, x);
}

double bessel_i1(double x) {
  const double ax = std::abs(x);
  const double v = ax <= kSeriesLimitI ? i_series(1, ax) : std::exp(ax) * i_asymptotic_scaled(1, ax);
  return x < 0.0 ? -v : v;
}

double bessel_i0_scaled(double x) {
  x = std::abs(x);
  return x <= kSeriesLimitI ? std::exp(-x) * i_series(0, x) : i_asymptotic_scaled(0, x);
}

double bessel_i1_scaled(double x) {
  const double ax = std::abs(x);
  const double v = ax <= kSeriesLimitI ? std::exp(-ax) * i_series(1, ax) : i_asymptotic_scaled(1, ax);
  return x < 0.0 ? -v : v;
}

double bessel_k0(double x) {
  require_positive(x, "bessel_k0");
  if (x <= kSeriesLimitK) return k0_series(x);
  return std::exp(-x) * bessel_k0_scaled(x);
}

double bessel_k1(double x) {
  require_positive(x, "bessel_k1");
  if (x <= kSeriesLimitK) return k1_series(x);
  return std::exp(-x) * bessel_k1_scaled(x);
}

double bessel_k0_scaled(double x) {
  require_positive(x, "bessel_k0_scaled");
  if (x <= kSeriesLimitK) return std::exp(x) * k0_series(x);
  double k0 = 0.0, k1 = 0.0;
  k_continued_fraction_scaled(x, k0, k1);
  return k0;
}

double bessel_k1_scaled(double x) {
  require_positive(x, "bessel_k1_scaled");
  if (x <= kSeriesLimitK) return std::exp(x) * k1_series(x);
  double k0 = 0.0, k1 = 0.0;
  k_continued_fraction_scaled(x, k0, k1);
  return k1;
}

double bessel_kn_scaled(int n, double x) {
  if (n < 0) n = -n;
  double km = bessel_k0_scaled(x);
  if (n == 0) return km;
  double k = bessel_k1_scaled(x);
  for (int j = 1; j < n; ++j) {
    const double next = km + (2.0 * j / x) * k;
    km = k;
    k = next;
  }
  return k;
}

double disk_exterior_secular(int n, double radius, double alpha, double k) {
  n = std::abs(n);
  const double x = k * radius;
  // K_n' = −K_{n−1} − (n/x) K_n, with K_{−1} = K_1.
  const double ratio = bessel_kn_scaled(n == 0 ? 1 : n - 1, x) / bessel_kn_scaled(n, x);
  return -k * ratio - n / radius - alpha;
}

std::optional<double> secular_oracle(int n, double radius, double alpha) {
  if (!(radius > 0.0)) throw std::invalid_argument("secular_oracle: radius must be positive");
  n = std::abs(n);
  if (!(alpha < 0.0)) return std::nullopt;
  // g(0+) = −n/R − α; g → −∞ as k → ∞.
  const double g0 = -n / radius - alpha;
  if (!(g0 > 0.0)) return std::nullopt;
  const auto g = [&](double k) { return disk_exterior_secular(n, radius, alpha, k); };

  double hi = std::abs(alpha);
  while (g(hi) >= 0.0) {
    hi *= 2.0;
    if (hi > 1e300) return std::nullopt;
  }
  // Scan downwards on a geometric grid for the sign change nearest to hi.
  double lo = 0.0;
  double glo = g0;
  double ghi = g(hi);
  {
    double k = hi;
    for (int i = 0; i < 600; ++i) {
      const double next = k * 0.9;
      const double gn = g(next);
      if (gn > 0.0) {
        lo = next;
        glo = gn;
        hi = k;
        ghi = g(k);
        break;
      }
      k = next;
    }
  }
  // Safeguarded secant on [lo, hi] with g(lo) > 0 > g(hi).
  for (int it = 0; it < 300; ++it) {
    double mid = hi - ghi * (hi - lo) / (ghi - glo);
    const bool secant_ok = mid > lo && mid < hi && std::isfinite(mid) && it % 4 != 3;
    if (!secant_ok) mid = 0.5 * (lo + hi);
    const double gm = g(mid);
    if (gm == 0.0) {
      lo = hi = mid;
      break;
    }
    if (gm > 0.0) {
      lo = mid;
      glo = gm;
    } else {
      hi = mid;
      ghi = gm;
    }
    if (hi - lo <= 2.0 * kEps * hi) break;
  }
  const double k = 0.5 * (lo + hi);
  return -k * k;
}

}  // namespace robin::special
