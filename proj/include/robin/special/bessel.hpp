#pragma once

#include <optional>

namespace robin::special {

/// Modified Bessel functions of the first and second kind, orders 0 and 1,
/// for x > 0 (I accepts x ≥ 0).
double bessel_i0(double x);
double bessel_i1(double x);
double bessel_k0(double x);
double bessel_k1(double x);

/// Exponentially scaled forms: e^{−x}·I_n(x) and e^{x}·K_n(x).
double bessel_i0_scaled(double x);
double bessel_i1_scaled(double x);
double bessel_k0_scaled(double x);
double bessel_k1_scaled(double x);

/// e^{x}·K_n(x) for any n ≥ 0 by upward recurrence.
double bessel_kn_scaled(int n, double x);

/// Secular function for the exterior disk of radius R with Robin coefficient α,
/// divided by K_n(kR) > 0:  g(k) = k·K_n'(kR)/K_n(kR) − α, k = √(−λ).
double disk_exterior_secular(int n, double radius, double alpha, double k);

/// Bound state λ < 0 of angular mode n on the exterior of the disk of radius R,
/// i.e. the root of √(−λ)·K_n'(√(−λ)R) − α·K_n(√(−λ)R) = 0.
/// Empty when the mode has no negative eigenvalue.
std::optional<double> secular_oracle(int n, double radius, double alpha);

}  // namespace robin::special
