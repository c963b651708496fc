#pragma once

// Independent reference computations. None of these call into the library
// code path they check.

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

namespace oracle {

/// sum_{n >= 1} ln(1 + c / n^2): direct sum to N plus Euler-Maclaurin tail.
inline double log_product_tail(double c, int N = 2000) {
  double s = 0.0;
  for (int n = N; n >= 1; --n) s += std::log1p(c / (static_cast<double>(n) * n));
  const double x = N;
  const double rc = std::sqrt(c);
  auto f = [c](double y) { return std::log1p(c / (y * y)); };
  auto fp = [c](double y) { return -2.0 * c / (y * (y * y + c)); };
  // int_N^inf f, then the trapezoid correction for starting the sum at N + 1.
  const double integral = -x * std::log1p(c / (x * x)) + 2.0 * rc * (0.5 * std::numbers::pi - std::atan(x / rc));
  return s + integral - 0.5 * f(x) - fp(x) / 12.0;
}

/// zeta'(0) of {(n pi / L)^2 + m^2 : n >= 1}: -ln(2L) - sum ln(1 + (mL)^2/(n pi)^2).
inline double dirichlet_zeta_prime(double m, double L) {
  const double c = std::pow(m * L / std::numbers::pi, 2);
  return -std::log(2.0 * L) - log_product_tail(c);
}

/// zeta'(0) of {(2 pi n / L)^2 + m^2 : n in Z}.
inline double circle_zeta_prime(double m, double L) {
  const double c = std::pow(m * L / (2.0 * std::numbers::pi), 2);
  // n = 0 gives m^2; the pairs n, -n give twice the Dirichlet-type product on L/2.
  return -std::log(m * m) + 2.0 * (-std::log(L) - log_product_tail(c));
}

/// Hurwitz zeta at s > 1 by direct summation plus integral tail.
inline double hurwitz_direct(double s, double a, int N = 200000) {
  double acc = 0.0;
  for (int n = N - 1; n >= 0; --n) acc += std::pow(n + a, -s);
  const double x = N + a;
  return acc + std::pow(x, 1.0 - s) / (s - 1.0) + 0.5 * std::pow(x, -s) +
         s * std::pow(x, -s - 1.0) / 12.0;
}

/// zeta_H(-n, a) for n = 0, 1, 2 from explicit Bernoulli polynomials.
inline double hurwitz_negative(int n, double a) {
  switch (n) {
    case 0: return 0.5 - a;
    case 1: return -(a * a - a + 1.0 / 6.0) / 2.0;
    case 2: return -(a * a * a - 1.5 * a * a + 0.5 * a) / 3.0;
    default: return std::nan("");
  }
}

/// sum_k m exp(-t mu_k^2) with mu_k = a + k d, summed until negligible.
inline double gaussian_family(double a, double d, int m, double t) {
  double acc = 0.0;
  for (int k = 0;; ++k) {
    const double mu = a + k * d;
    const double term = std::exp(-t * mu * mu);
    acc += term;
    if (term < 1e-19 * acc && t * mu * mu > 40.0) break;
  }
  return m * acc;
}

/// Tr exp(-t B^2) over both signs: 2 sum_k m exp(-t mu_k^2).
inline double heat_B2(double a, double d, int m, double t) { return 2.0 * gaussian_family(a, d, m, t); }

/// sum_{n >= 1} exp(-t (n pi / L)^2), direct.
inline double dirichlet_sum(double t, double L) {
  double acc = 0.0;
  for (int n = 1;; ++n) {
    const double x = n * std::numbers::pi / L;
    const double term = std::exp(-t * x * x);
    acc += term;
    if (t * x * x > 46.0) break;
  }
  return acc;
}

/// sum_{n in Z} exp(-t (2 pi n / L)^2), direct.
inline double circle_sum(double t, double L) {
  double acc = 1.0;
  for (int n = 1;; ++n) {
    const double x = 2.0 * n * std::numbers::pi / L;
    const double term = std::exp(-t * x * x);
    acc += 2.0 * term;
    if (t * x * x > 46.0) break;
  }
  return acc;
}

/// Wave numbers k > 0 of k cos kR + h sin kR = 0 (Dirichlet at 0, Robin at R)
/// by plain bisection inside ((j - 1/2) pi / R, j pi / R).
inline std::vector<double> robin_wave_numbers(double h, double R, int count) {
  std::vector<double> out;
  auto f = [h, R](double k) { return k * std::cos(k * R) + h * std::sin(k * R); };
  for (int j = 1; j <= count; ++j) {
    double a = (j - 0.5) * std::numbers::pi / R, b = j * std::numbers::pi / R;
    double fa = f(a);
    for (int it = 0; it < 200; ++it) {
      const double m = 0.5 * (a + b);
      const double fm = f(m);
      if ((fm < 0) == (fa < 0)) {
        a = m;
        fa = fm;
      } else {
        b = m;
      }
    }
    out.push_back(0.5 * (a + b));
  }
  return out;
}

/// Per-mode APS split ratio for the two-cut circle: ((1 - e^{-2 mu R}) / 2)^4.
inline double aps_mode_ratio(double mu, double R) {
  return std::pow(0.5 * (1.0 - std::exp(-2.0 * mu * R)), 4);
}

/// Exact APS split ratio for mu_k = a + k d: 2^{-2 zeta(0)} prod (1 - e^{-2 mu R})^{4m}
/// with zeta_{B0^2}(0) = 2 m zeta_H(0, a/d).
inline double aps_split_exact(double a, double d, int m, double R) {
  const double z0 = 2.0 * m * (0.5 - a / d);
  double logp = 0.0;
  for (int k = 0; k < 2000; ++k) logp += 4.0 * m * std::log1p(-std::exp(-2.0 * (a + k * d) * R));
  return std::pow(2.0, -2.0 * z0) * std::exp(logp);
}

/// prod (1 + d_k) by direct complex multiplication.
inline std::complex<double> direct_product(const std::vector<std::complex<double>>& d) {
  std::complex<double> p(1.0, 0.0);
  for (const auto& x : d) p *= 1.0 + x;
  return p;
}

}  // namespace oracle
