#pragma once

#include <boost/math/special_functions/bernoulli.hpp>
#include <boost/math/special_functions/binomial.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "detlab/errors.hpp"

namespace detlab {

/// Complementary error function, erfc(x) = 2/sqrt(pi) * int_x^inf exp(-r^2) dr.
inline double erfc(double x) { return std::erfc(x); }

/// exp(x^2) * erfc(x), stable for large positive x.
inline double erfcx(double x) {
  if (x < 25.0) return std::exp(x * x) * std::erfc(x);
  // Continued-fraction tail: erfcx(x) ~ 1/(x sqrt(pi)) (1 - 1/(2x^2) + 3/(4x^4) - ...)
  const double inv = 1.0 / (x * x);
  const double series = 1.0 - 0.5 * inv + 0.75 * inv * inv - 1.875 * inv * inv * inv;
  return series / (x * std::sqrt(std::numbers::pi));
}

/// Even-index Bernoulli number B_{2n}.
inline double bernoulli_b2n(int n) { return boost::math::bernoulli_b2n<double>(n); }

/// Bernoulli number B_n with the B_1 = -1/2 convention.
inline double bernoulli_number(int n) {
  if (n == 0) return 1.0;
  if (n == 1) return -0.5;
  if (n % 2 == 1) return 0.0;
  return bernoulli_b2n(n / 2);
}

/// Bernoulli polynomial B_n(x).
inline double bernoulli_polynomial(int n, double x) {
  double acc = 0.0;
  for (int k = 0; k <= n; ++k) {
    const double b = bernoulli_number(k);
    if (b == 0.0) continue;
    acc += boost::math::binomial_coefficient<double>(static_cast<unsigned>(n),
                                                     static_cast<unsigned>(k)) *
           b * std::pow(x, n - k);
  }
  return acc;
}

/// Hurwitz zeta at a non-positive integer: zeta(-n, a) = -B_{n+1}(a)/(n+1).
inline double hurwitz_zeta_negative_integer(int n, double a) {
  return -bernoulli_polynomial(n + 1, a) / static_cast<double>(n + 1);
}

namespace detail {

struct HurwitzTerms {
  std::complex<double> value;
  std::complex<double> derivative;
};

// Euler-Maclaurin evaluation of sum_{k>=0} (k+a)^{-s} and its s-derivative.
inline HurwitzTerms hurwitz_euler_maclaurin(std::complex<double> s, double a) {
  using cd = std::complex<double>;
  constexpr int kBernoulliTerms = 14;
  const int n_direct =
      std::max(24, static_cast<int>(std::ceil(std::abs(s) + 12.0 - a)));
  cd value = 0.0;
  cd deriv = 0.0;
  for (int k = 0; k < n_direct; ++k) {
    const double x = k + a;
    const double lx = std::log(x);
    const cd term = std::exp(-s * lx);
    value += term;
    deriv -= lx * term;
  }
  const double x = n_direct + a;
  const double lx = std::log(x);
  const cd x_ms = std::exp(-s * lx);       // x^{-s}
  const cd x_1ms = x * x_ms;               // x^{1-s}
  const cd sm1 = s - 1.0;
  value += x_1ms / sm1 + 0.5 * x_ms;
  deriv += -lx * x_1ms / sm1 - x_1ms / (sm1 * sm1) - 0.5 * lx * x_ms;

  // Rising factorial P_j(s) = s (s+1) ... (s+2j-2) and its derivative.
  cd poly = s;
  cd dpoly = 1.0;
  double factorial = 2.0;  // (2j)!
  cd x_pow = x_ms / x;     // x^{-s-1}
  for (int j = 1; j <= kBernoulliTerms; ++j) {
    if (j > 1) {
      const cd f1 = s + static_cast<double>(2 * j - 3);
      const cd f2 = s + static_cast<double>(2 * j - 2);
      dpoly = dpoly * f1 * f2 + poly * (f1 + f2);
      poly = poly * f1 * f2;
      factorial *= static_cast<double>((2 * j - 1) * (2 * j));
      x_pow /= x * x;
    }
    const double coeff = bernoulli_b2n(j) / factorial;
    value += coeff * poly * x_pow;
    deriv += coeff * (dpoly * x_pow - lx * poly * x_pow);
  }
  return {value, deriv};
}

}  // namespace detail

/// Hurwitz zeta function zeta(s, a) = sum_{k>=0} (k + a)^{-s}, continued to
/// the whole s-plane except s = 1.
inline std::complex<double> hurwitz_zeta(std::complex<double> s, double a) {
  if (!(a > 0.0)) throw DomainError("hurwitz_zeta: a must be positive");
  if (std::abs(s - 1.0) < 1e-14) throw PoleError("hurwitz_zeta: pole at s = 1", 1.0);
  return detail::hurwitz_euler_maclaurin(s, a).value;
}

inline double hurwitz_zeta(double s, double a) {
  return hurwitz_zeta(std::complex<double>(s, 0.0), a).real();
}

/// Partial derivative d/ds zeta(s, a).
inline std::complex<double> hurwitz_zeta_ds(std::complex<double> s, double a) {
  if (!(a > 0.0)) throw DomainError("hurwitz_zeta_ds: a must be positive");
  if (std::abs(s - 1.0) < 1e-14) throw PoleError("hurwitz_zeta_ds: pole at s = 1", 1.0);
  return detail::hurwitz_euler_maclaurin(s, a).derivative;
}

inline double hurwitz_zeta_ds(double s, double a) {
  return hurwitz_zeta_ds(std::complex<double>(s, 0.0), a).real();
}

/// log(1 + z) for complex z, accurate when |z| is small.
inline std::complex<double> log1p(std::complex<double> z) {
  const double x = z.real();
  const double y = z.imag();
  const double re = 0.5 * std::log1p(2.0 * x + x * x + y * y);
  const double im = std::atan2(y, 1.0 + x);
  return {re, im};
}

}  // namespace detlab
