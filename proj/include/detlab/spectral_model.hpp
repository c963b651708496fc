#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "detlab/errors.hpp"
#include "detlab/expansion.hpp"
#include "detlab/special_functions.hpp"
#include "detlab/summation.hpp"

namespace detlab {

/// One positive eigenvalue mu of B together with its multiplicity.
struct SpectralMode {
  double mu = 1.0;
  int multiplicity = 1;
};

/// The tangential operator B, stored through its positive spectrum. The full
/// spectrum is {+mu_k} U {-mu_k} with equal multiplicities.
class TangentialSpectrum {
 public:
  enum class Generator { Arithmetic, Explicit };

  /// mu_k = a + k d, k >= 0, each with the given multiplicity.
  static TangentialSpectrum arithmetic(double a, double d, int multiplicity = 1) {
    if (!(a > 0.0) || !(d > 0.0))
      throw DomainError("arithmetic spectrum needs a > 0 and d > 0");
    if (multiplicity < 1) throw DomainError("multiplicity must be >= 1");
    TangentialSpectrum s;
    s.generator_ = Generator::Arithmetic;
    s.a_ = a;
    s.d_ = d;
    s.multiplicity_ = multiplicity;
    return s;
  }

  /// Finite list of positive eigenvalues. tail_exponent is bookkeeping for a
  /// truncated power-law family and does not change any computed value.
  static TangentialSpectrum explicit_modes(std::vector<SpectralMode> modes,
                                           double tail_exponent = 0.0) {
    if (modes.empty()) throw DomainError("explicit spectrum must be non-empty");
    for (std::size_t i = 0; i < modes.size(); ++i) {
      if (!(modes[i].mu > 0.0)) throw DomainError("eigenvalues mu_k must be positive");
      if (modes[i].multiplicity < 1) throw DomainError("multiplicity must be >= 1");
      if (i > 0 && modes[i].mu < modes[i - 1].mu)
        throw DomainError("eigenvalues mu_k must be nondecreasing");
    }
    TangentialSpectrum s;
    s.generator_ = Generator::Explicit;
    s.modes_ = std::move(modes);
    s.tail_exponent_ = tail_exponent;
    return s;
  }

  static TangentialSpectrum explicit_values(const std::vector<double>& mus) {
    std::vector<SpectralMode> m;
    for (double mu : mus) m.push_back({mu, 1});
    return explicit_modes(std::move(m));
  }

  Generator generator() const { return generator_; }
  bool is_arithmetic() const { return generator_ == Generator::Arithmetic; }
  double a() const { return a_; }
  double d() const { return d_; }
  /// Uniform multiplicity of an arithmetic family.
  int multiplicity() const { return multiplicity_; }
  double tail_exponent() const { return tail_exponent_; }

  int kernel_dimension() const { return kernel_dimension_; }
  TangentialSpectrum with_kernel_dimension(int dim) const {
    if (dim < 0) throw DomainError("kernel dimension must be nonnegative");
    TangentialSpectrum s = *this;
    s.kernel_dimension_ = dim;
    return s;
  }

  void require_invertible(const std::string& who) const {
    if (kernel_dimension_ > 0)
      throw InvertibilityError(who + ": tangential operator has a kernel");
  }

  /// Every multiplicity doubled: the cut boundary Y0 u Y0.
  TangentialSpectrum doubled() const {
    TangentialSpectrum s = *this;
    s.multiplicity_ *= 2;
    for (auto& m : s.modes_) m.multiplicity *= 2;
    return s;
  }

  /// Number of distinct positive eigenvalues (max size_t if infinite).
  std::size_t mode_count() const {
    return is_arithmetic() ? std::numeric_limits<std::size_t>::max() : modes_.size();
  }

  SpectralMode mode(std::size_t k) const {
    if (is_arithmetic()) return {a_ + static_cast<double>(k) * d_, multiplicity_};
    return modes_.at(k);
  }

  std::vector<SpectralMode> modes(std::size_t cutoff) const {
    const std::size_t n = std::min(cutoff, mode_count());
    std::vector<SpectralMode> out;
    out.reserve(n);
    for (std::size_t k = 0; k < n; ++k) out.push_back(mode(k));
    return out;
  }

  /// Signed eigenvalues of B with multiplicity, as +mu, -mu pairs.
  std::vector<double> full_spectrum(std::size_t cutoff) const {
    std::vector<double> out;
    for (const auto& m : modes(cutoff))
      for (int j = 0; j < m.multiplicity; ++j) {
        out.push_back(m.mu);
        out.push_back(-m.mu);
      }
    return out;
  }

  double lowest() const { return mode(0).mu; }

 private:
  Generator generator_ = Generator::Explicit;
  double a_ = 1.0;
  double d_ = 1.0;
  int multiplicity_ = 1;
  double tail_exponent_ = 0.0;
  int kernel_dimension_ = 0;
  std::vector<SpectralMode> modes_;
};

/// The 2x2 block of (B, G) on span(phi, G phi) for a positive eigenvalue mu.
struct ModePair {
  double mu = 1.0;

  explicit ModePair(double mu_) : mu(mu_) {
    if (!(mu > 0.0)) throw DomainError("mode eigenvalue must be positive");
  }
  Eigen::Matrix2d b_matrix() const {
    Eigen::Matrix2d b;
    b << mu, 0.0, 0.0, -mu;
    return b;
  }
  static Eigen::Matrix2d g_matrix() {
    Eigen::Matrix2d g;
    g << 0.0, -1.0, 1.0, 0.0;
    return g;
  }
};

namespace detail {

// Sum_{k >= from} m f(mu_k) for an arithmetic family: direct terms until they
// are negligible, Euler-Maclaurin on the remainder when the family is dense.
// integral(X) = int_X^inf f, deriv(j, X) = f^{(2j-1)}(X) for j = 1..3.
template <typename F, typename I, typename Dv>
double arithmetic_family_sum(const TangentialSpectrum& spec, double t, std::size_t from,
                             F f, I integral, Dv deriv) {
  constexpr std::size_t kMaxDirect = 4096;
  constexpr double kNegligibleExponent = 50.0;
  const double a = spec.a();
  const double d = spec.d();
  std::vector<double> terms;
  std::size_t k = from;
  for (; k < from + kMaxDirect; ++k) {
    const double x = a + static_cast<double>(k) * d;
    if (t * x * x > kNegligibleExponent) return spec.multiplicity() * pairwise_sum(terms);
    terms.push_back(f(x));
  }
  const double x = a + static_cast<double>(k) * d;
  double tail = integral(x) / d + 0.5 * f(x);
  double dpow = d;
  double fact = 2.0;
  for (int j = 1; j <= 3; ++j) {
    if (j > 1) {
      dpow *= d * d;
      fact *= (2.0 * j - 1.0) * (2.0 * j);
    }
    tail -= bernoulli_b2n(j) / fact * dpow * deriv(j, x);
  }
  terms.push_back(tail);
  return spec.multiplicity() * pairwise_sum(terms);
}

}  // namespace detail

/// Sum over positive modes k >= from of m_k exp(-t mu_k^2).
inline double gaussian_mode_sum(const TangentialSpectrum& spec, double t,
                                std::size_t from = 0) {
  if (!(t > 0.0)) throw DomainError("gaussian_mode_sum: t must be positive");
  if (!spec.is_arithmetic()) {
    std::vector<double> terms;
    for (std::size_t k = from; k < spec.mode_count(); ++k) {
      const auto m = spec.mode(k);
      terms.push_back(m.multiplicity * std::exp(-t * m.mu * m.mu));
    }
    return pairwise_sum(terms);
  }
  const double st = std::sqrt(t);
  auto f = [t](double x) { return std::exp(-t * x * x); };
  auto integral = [st](double x) {
    return 0.5 * std::sqrt(std::numbers::pi) / st * std::erfc(x * st);
  };
  auto deriv = [t](int j, double x) {
    const double g = std::exp(-t * x * x);
    const double x2 = x * x;
    switch (j) {
      case 1: return -2.0 * t * x * g;
      case 2: return (12.0 * t * t * x - 8.0 * t * t * t * x * x2) * g;
      default:
        return (-32.0 * std::pow(t, 5) * x2 * x2 * x + 160.0 * std::pow(t, 4) * x2 * x -
                120.0 * t * t * t * x) * g;
    }
  };
  return detail::arithmetic_family_sum(spec, t, from, f, integral, deriv);
}

/// Sum over positive modes k >= from of m_k erfc(mu_k sqrt t).
inline double erfc_mode_sum(const TangentialSpectrum& spec, double t, std::size_t from = 0) {
  if (!(t > 0.0)) throw DomainError("erfc_mode_sum: t must be positive");
  const double st = std::sqrt(t);
  if (!spec.is_arithmetic()) {
    std::vector<double> terms;
    for (std::size_t k = from; k < spec.mode_count(); ++k) {
      const auto m = spec.mode(k);
      terms.push_back(m.multiplicity * std::erfc(m.mu * st));
    }
    return pairwise_sum(terms);
  }
  const double spi = std::sqrt(std::numbers::pi);
  auto f = [st](double x) { return std::erfc(x * st); };
  auto integral = [st, spi](double x) {
    const double z = x * st;
    return (std::exp(-z * z) / spi - z * std::erfc(z)) / st;
  };
  auto deriv = [t, st, spi](int j, double x) {
    const double g = -2.0 * st / spi * std::exp(-t * x * x);
    const double x2 = x * x;
    switch (j) {
      case 1: return g;
      case 2: return (4.0 * t * t * x2 - 2.0 * t) * g;
      default:
        return (16.0 * std::pow(t, 4) * x2 * x2 - 48.0 * t * t * t * x2 + 12.0 * t * t) * g;
    }
  };
  return detail::arithmetic_family_sum(spec, t, from, f, integral, deriv);
}

/// Small-time expansion of sum_k m_k exp(-t mu_k^2).
inline AsymptoticExpansion gaussian_mode_sum_expansion(const TangentialSpectrum& spec) {
  AsymptoticExpansion e;
  if (!spec.is_arithmetic()) {
    for (std::size_t k = 0; k < spec.mode_count(); ++k) {
      const auto m = spec.mode(k);
      e += series::exp_linear(-m.mu * m.mu) * static_cast<double>(m.multiplicity);
    }
    e.dimension = 0;
    return e;
  }
  const double d = spec.d();
  const double x = spec.a() / d;
  const double m = spec.multiplicity();
  e.add(-1, m * std::sqrt(std::numbers::pi) / (2.0 * d));
  double fact = 1.0;
  for (int j = 0; 2 * j <= AsymptoticExpansion::kMaxTwiceExponent; ++j) {
    if (j > 0) fact *= j;
    const double sgn = (j % 2 == 0) ? 1.0 : -1.0;
    e.add(2 * j, m * sgn / fact * std::pow(d, 2 * j) * hurwitz_zeta_negative_integer(2 * j, x));
  }
  e.dimension = 1;
  return e;
}

/// Small-time expansion of sum_k m_k erfc(mu_k sqrt t).
inline AsymptoticExpansion erfc_mode_sum_expansion(const TangentialSpectrum& spec) {
  AsymptoticExpansion e;
  if (!spec.is_arithmetic()) {
    for (std::size_t k = 0; k < spec.mode_count(); ++k) {
      const auto m = spec.mode(k);
      e += series::erfc_sqrt(m.mu) * static_cast<double>(m.multiplicity);
    }
    e.dimension = 0;
    return e;
  }
  const double d = spec.d();
  const double x = spec.a() / d;
  const double m = spec.multiplicity();
  const double spi = std::sqrt(std::numbers::pi);
  e.add(-1, m / (d * spi));
  e.add(0, m * hurwitz_zeta_negative_integer(0, x));
  double fact = 1.0;
  for (int j = 0; 2 * j + 1 <= AsymptoticExpansion::kMaxTwiceExponent; ++j) {
    if (j > 0) fact *= j;
    const double sgn = (j % 2 == 0) ? 1.0 : -1.0;
    e.add(2 * j + 1, m * sgn / fact * std::pow(d, 2 * j + 1) *
                         hurwitz_zeta_negative_integer(2 * j + 1, x) / ((-0.5 - j) * spi));
  }
  e.dimension = 1;
  return e;
}

/// Tr exp(-t B^2): 2 sum_{k < cutoff} m_k exp(-t mu_k^2) plus, for arithmetic
/// families, the Euler-Maclaurin tail beyond the cutoff.
inline double heat_trace_B2(const TangentialSpectrum& spec, double t, std::size_t cutoff) {
  if (!(t > 0.0)) throw DomainError("heat_trace_B2: t must be positive");
  if (cutoff < 1) throw DomainError("heat_trace_B2: cutoff must be >= 1");
  std::vector<double> terms;
  for (const auto& m : spec.modes(cutoff))
    terms.push_back(m.multiplicity * std::exp(-t * m.mu * m.mu));
  double total = pairwise_sum(terms);
  if (spec.is_arithmetic()) total += gaussian_mode_sum(spec, t, cutoff);
  return 2.0 * total;
}

/// Small-time expansion of Tr exp(-t B^2).
inline AsymptoticExpansion heat_trace_B2_expansion(const TangentialSpectrum& spec) {
  return 2.0 * gaussian_mode_sum_expansion(spec);
}

/// zeta_{B^2}(s) = Tr (B^2)^{-s}.
inline std::complex<double> zeta_B2(const TangentialSpectrum& spec, std::complex<double> s) {
  spec.require_invertible("zeta_B2");
  if (spec.is_arithmetic()) {
    const double d = spec.d();
    if (std::abs(s - 0.5) < 1e-14)
      throw PoleError("zeta_B2: pole at s = 1/2", spec.multiplicity() / d);
    return 2.0 * static_cast<double>(spec.multiplicity()) * std::exp(-2.0 * s * std::log(d)) *
           hurwitz_zeta(2.0 * s, spec.a() / d);
  }
  std::vector<std::complex<double>> terms;
  for (std::size_t k = 0; k < spec.mode_count(); ++k) {
    const auto m = spec.mode(k);
    terms.push_back(2.0 * static_cast<double>(m.multiplicity) *
                    std::exp(-2.0 * s * std::log(m.mu)));
  }
  return pairwise_sum(terms);
}

inline double zeta_B2(const TangentialSpectrum& spec, double s) {
  return zeta_B2(spec, std::complex<double>(s, 0.0)).real();
}

/// d/ds zeta_{B^2}(s) at s = 0.
inline double zeta_B2_prime_at_0(const TangentialSpectrum& spec) {
  spec.require_invertible("zeta_B2_prime_at_0");
  if (spec.is_arithmetic()) {
    const double d = spec.d();
    const double x = spec.a() / d;
    return 2.0 * spec.multiplicity() *
           (-2.0 * std::log(d) * hurwitz_zeta(0.0, x) + 2.0 * hurwitz_zeta_ds(0.0, x));
  }
  std::vector<double> terms;
  for (std::size_t k = 0; k < spec.mode_count(); ++k) {
    const auto m = spec.mode(k);
    terms.push_back(-2.0 * m.multiplicity * std::log(m.mu * m.mu));
  }
  return pairwise_sum(terms);
}

/// det_zeta B^2 = exp(-zeta'_{B^2}(0)).
inline double det_zeta_B2(const TangentialSpectrum& spec) {
  spec.require_invertible("det_zeta_B2");
  return std::exp(-zeta_B2_prime_at_0(spec));
}

}  // namespace detlab
