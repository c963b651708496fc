#pragma once

#include <Eigen/Dense>
#include <boost/math/tools/roots.hpp>

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "detlab/errors.hpp"
#include "detlab/quadrature.hpp"
#include "detlab/special_functions.hpp"
#include "detlab/spectral_model.hpp"
#include "detlab/summation.hpp"

namespace detlab {

enum class CylinderBC { Dirichlet, Neumann, ChiralPlus, ChiralMinus, APS };

inline std::string to_string(CylinderBC bc) {
  switch (bc) {
    case CylinderBC::Dirichlet: return "dirichlet";
    case CylinderBC::Neumann: return "neumann";
    case CylinderBC::ChiralPlus: return "chiral_plus";
    case CylinderBC::ChiralMinus: return "chiral_minus";
    case CylinderBC::APS: return "aps";
  }
  return "?";
}

/// Crude bound erfc(x) < 2/sqrt(pi) exp(-x^2), x > 0.
inline double erfc_upper_bound(double x) {
  return 2.0 / std::sqrt(std::numbers::pi) * std::exp(-x * x);
}

/// Free one-dimensional heat kernel exp(-x^2/4t)/sqrt(4 pi t).
inline double free_kernel(double t, double x) {
  return std::exp(-x * x / (4.0 * t)) / std::sqrt(4.0 * std::numbers::pi * t);
}

/// h exp(2hu + (h^2 - mu^2) t) erfc(u/sqrt t + h sqrt t): the correction term of
/// the half-line Robin kernel (f' = h f at u = 0) on the diagonal, with the
/// tangential mass factor exp(-t mu^2) included.
inline double robin_correction_diag(double t, double u, double h, double mu) {
  const double st = std::sqrt(t);
  const double z = u / st + h * st;
  if (z > 0.0) return h * erfcx(z) * std::exp(-u * u / t - mu * mu * t);
  return h * std::exp(2.0 * h * u + (h * h - mu * mu) * t) * std::erfc(z);
}

/// Diagonal of the Robin half-line kernel of -d^2 + mu^2.
inline double robin_kernel_diag(double t, double u, double h, double mu) {
  const double mass = std::exp(-t * mu * mu);
  return mass * (free_kernel(t, 0.0) + free_kernel(t, 2.0 * u)) -
         robin_correction_diag(t, u, h, mu);
}

/// Diagonal (u = v) of the heat kernel of D^2 on one mode pair of the
/// half-cylinder [0, inf) x Y, in the basis (phi, G phi).
inline Eigen::Matrix2cd mode_kernel_diag(CylinderBC bc, const ModePair& mode, double t,
                                         double u) {
  if (!(t > 0.0)) throw DomainError("mode_kernel_diag: t must be positive");
  if (u < 0.0) throw DomainError("mode_kernel_diag: u must be nonnegative");
  const double mass = std::exp(-t * mode.mu * mode.mu);
  const double free0 = free_kernel(t, 0.0);
  const double image = free_kernel(t, 2.0 * u);
  const double dir = mass * (free0 - image);
  const double neu = mass * (free0 + image);
  using cd = std::complex<double>;
  Eigen::Matrix2cd k = Eigen::Matrix2cd::Zero();
  switch (bc) {
    case CylinderBC::Dirichlet:
      k(0, 0) = k(1, 1) = dir;
      break;
    case CylinderBC::Neumann:
      k(0, 0) = k(1, 1) = neu;
      break;
    case CylinderBC::ChiralPlus:
    case CylinderBC::ChiralMinus: {
      // Dirichlet on one eigenspace of iG, Neumann on the other.
      const Eigen::Matrix2cd g = ModePair::g_matrix().cast<cd>();
      const Eigen::Matrix2cd id = Eigen::Matrix2cd::Identity();
      const cd i(0.0, 1.0);
      const Eigen::Matrix2cd p_plus = 0.5 * (id - i * g);
      const Eigen::Matrix2cd p_minus = 0.5 * (id + i * g);
      k = (bc == CylinderBC::ChiralPlus) ? (dir * p_plus + neu * p_minus).eval()
                                         : (neu * p_plus + dir * p_minus).eval();
      break;
    }
    case CylinderBC::APS:
      k(0, 0) = dir;
      k(1, 1) = robin_kernel_diag(t, u, mode.mu, mode.mu);
      break;
  }
  return k;
}

namespace detail {

// int_0^R of the scalar Dirichlet (sign -1) or Neumann (+1) diagonal, no mass.
inline double dn_segment_integral(double t, double R, double sign) {
  return R / std::sqrt(4.0 * std::numbers::pi * t) + sign * 0.25 * std::erf(R / std::sqrt(t));
}

// int_0^R of the Robin diagonal including the mass factor, in closed form.
inline double robin_segment_integral(double t, double R, double h, double mu) {
  const double st = std::sqrt(t);
  const double mass = std::exp(-t * mu * mu);
  const double zR = R / st + h * st;
  const double far = (zR > 0.0) ? erfcx(zR) * std::exp(-R * R / t - mu * mu * t)
                                : std::exp(2.0 * h * R + (h * h - mu * mu) * t) * std::erfc(zR);
  const double near = (h * st > 0.0) ? erfcx(h * st) * std::exp(-mu * mu * t)
                                      : std::exp((h * h - mu * mu) * t) * std::erfc(h * st);
  const double correction = 0.5 * (far - near) + 0.5 * mass * std::erf(R / st);
  return mass * dn_segment_integral(t, R, 1.0) - correction;
}

}  // namespace detail

/// int_0^R tr mode_kernel_diag du summed over modes (one boundary at u = 0).
/// Dirichlet, Neumann and chiral use the whole spectrum through closed forms;
/// APS sums the first `cutoff` modes exactly and the rest with R = infinity
/// in the erfc correction.
inline double trace_on_segment(CylinderBC bc, const TangentialSpectrum& spec, double t,
                               double R, std::size_t cutoff) {
  if (!(t > 0.0) || !(R > 0.0)) throw DomainError("trace_on_segment: t and R must be positive");
  const double h_all = heat_trace_B2(spec, t, std::max<std::size_t>(cutoff, 1));
  switch (bc) {
    case CylinderBC::Dirichlet: return h_all * detail::dn_segment_integral(t, R, -1.0);
    case CylinderBC::Neumann: return h_all * detail::dn_segment_integral(t, R, 1.0);
    case CylinderBC::ChiralPlus:
    case CylinderBC::ChiralMinus:
      return 0.5 * h_all *
             (detail::dn_segment_integral(t, R, -1.0) + detail::dn_segment_integral(t, R, 1.0));
    case CylinderBC::APS: break;
  }
  spec.require_invertible("trace_on_segment(APS)");
  std::vector<double> terms;
  const auto modes = spec.modes(cutoff);
  for (const auto& m : modes) {
    const double mass = std::exp(-t * m.mu * m.mu);
    terms.push_back(m.multiplicity * (mass * detail::dn_segment_integral(t, R, -1.0) +
                                      detail::robin_segment_integral(t, R, m.mu, m.mu)));
  }
  if (spec.is_arithmetic()) {
    // Tail modes: bulk of both components, Dirichlet end, Robin end at R = inf.
    const std::size_t from = modes.size();
    const double g = gaussian_mode_sum(spec, t, from);
    const double e = erfc_mode_sum(spec, t, from);
    terms.push_back(g * (2.0 * R / std::sqrt(4.0 * std::numbers::pi * t) - 0.5) + 0.5 * e);
  }
  return pairwise_sum(terms);
}

/// Same integral by adaptive quadrature of the kernel diagonal (validation path).
inline QuadratureResult trace_on_segment_quadrature(CylinderBC bc, const ModePair& mode,
                                                    double t, double R) {
  return integrate(
      [&](double u) { return mode_kernel_diag(bc, mode, t, u).trace().real(); }, 0.0, R, 1e-14);
}

/// sum_{n in Z} exp(-t (2 pi n / L)^2): scalar heat trace on a circle of length L.
/// The spatial (image) or spectral series is picked by L^2 / t.
inline double theta_circle(double t, double L) {
  if (!(t > 0.0) || !(L > 0.0)) throw DomainError("theta_circle: t and L must be positive");
  const double ratio = L * L / (4.0 * t);
  double acc = 0.0;
  if (ratio >= std::numbers::pi * std::numbers::pi) {
    const double pref = L / std::sqrt(4.0 * std::numbers::pi * t);
    for (int k = 1;; ++k) {
      const double term = std::exp(-ratio * k * k);
      acc += term;
      if (term < 1e-18 * (1.0 + acc)) break;
    }
    return pref * (1.0 + 2.0 * acc);
  }
  const double w = t * std::pow(2.0 * std::numbers::pi / L, 2);
  for (int n = 1;; ++n) {
    const double term = std::exp(-w * n * n);
    acc += term;
    if (term < 1e-18 * (1.0 + acc)) break;
  }
  return 1.0 + 2.0 * acc;
}

/// theta_circle minus its bulk term L/sqrt(4 pi t).
inline double theta_circle_nonbulk(double t, double L) {
  const double ratio = L * L / (4.0 * t);
  if (ratio >= std::numbers::pi * std::numbers::pi) {
    double acc = 0.0;
    for (int k = 1;; ++k) {
      const double term = std::exp(-ratio * k * k);
      acc += term;
      if (term < 1e-18 * (1e-300 + acc)) break;
    }
    return 2.0 * L / std::sqrt(4.0 * std::numbers::pi * t) * acc;
  }
  return theta_circle(t, L) - L / std::sqrt(4.0 * std::numbers::pi * t);
}

/// sum_{n >= 1} exp(-t (n pi / L)^2): Dirichlet segment of length L.
inline double theta_dirichlet(double t, double L) { return 0.5 * (theta_circle(t, 2.0 * L) - 1.0); }
/// sum_{n >= 0} exp(-t (n pi / L)^2): Neumann segment of length L.
inline double theta_neumann(double t, double L) { return 0.5 * (theta_circle(t, 2.0 * L) + 1.0); }

/// Exact Tr exp(-t D^2) on one mode pair of [0, R] with the same condition
/// at both ends (inward frames). For APS each component is Dirichlet at one
/// end and Robin(h = mu) at the other; its wave numbers solve
/// k cos kR + mu sin kR = 0, one in each ((j - 1/2) pi / R, j pi / R).
inline double segment_trace_two_ended(CylinderBC bc, const ModePair& mode, double t, double R) {
  if (!(t > 0.0) || !(R > 0.0)) throw DomainError("segment_trace_two_ended: t and R must be positive");
  const double mass = std::exp(-t * mode.mu * mode.mu);
  switch (bc) {
    case CylinderBC::Dirichlet: return 2.0 * mass * theta_dirichlet(t, R);
    case CylinderBC::Neumann: return 2.0 * mass * theta_neumann(t, R);
    case CylinderBC::ChiralPlus:
    case CylinderBC::ChiralMinus: return mass * (theta_dirichlet(t, R) + theta_neumann(t, R));
    case CylinderBC::APS: break;
  }
  const double mu = mode.mu;
  auto sec = [mu, R](double k) { return k * std::cos(k * R) + mu * std::sin(k * R); };
  std::vector<double> terms;
  for (int j = 1;; ++j) {
    double a = (j - 0.5) * std::numbers::pi / R;
    double b = j * std::numbers::pi / R;
    std::uintmax_t iters = 200;
    auto stop = [](double x, double y) { return std::abs(y - x) <= 1e-15 * (1.0 + std::abs(x)); };
    const auto r = boost::math::tools::toms748_solve(sec, a, b, stop, iters);
    const double k = 0.5 * (r.first + r.second);
    const double term = std::exp(-t * k * k);
    terms.push_back(term);
    if (t * k * k > 45.0) break;
  }
  return 2.0 * mass * pairwise_sum(terms);
}

/// Quintic C^2 step: 0 below a, 1 above b.
struct SmoothStep {
  double a = 0.0;
  double b = 1.0;
  double operator()(double x) const {
    if (x <= a) return 0.0;
    if (x >= b) return 1.0;
    const double s = (x - a) / (b - a);
    return s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
  }
};

/// The rotation profile gamma(u): 1 below 1/4, 0 above 3/4.
inline double rotation_profile(double u) { return 1.0 - SmoothStep{0.25, 0.75}(u); }
inline double rotation_profile_derivative(double u) {
  if (u <= 0.25 || u >= 0.75) return 0.0;
  const double s = (u - 0.25) / 0.5;
  return -(30.0 * s * s * (1.0 - s) * (1.0 - s)) / 0.5;
}

/// Cutoffs of the parametrix on a collar [0, R], distance from the boundary u.
struct GluingScheme {
  double R = 1.0;

  explicit GluingScheme(double R_) : R(R_) {
    if (!(R > 0.0)) throw DomainError("GluingScheme: R must be positive");
  }
  double rho(double a, double b, double u) const { return SmoothStep{a, b}(u); }
  double phi1(double u) const { return 1.0 - rho(5.0 * R / 7.0, 6.0 * R / 7.0, u); }
  double phi2(double u) const { return rho(R / 7.0, 2.0 * R / 7.0, u); }
  double psi2(double u) const { return rho(3.0 * R / 7.0, 4.0 * R / 7.0, u); }
  double psi1(double u) const { return 1.0 - psi2(u); }

  /// Decay constant: the cutoffs are separated by at least R/7.
  double c3() const { return 1.0 / 196.0; }
  double c2() const { return 0.0; }
};

struct GluedTrace {
  double value = 0.0;
  double error_bound = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
  double c3 = 0.0;
  /// exp(-c3 R^2 / t), reported separately from c1.
  double exponential_factor = 0.0;
  /// The bound is at least the value scale and says nothing.
  bool vacuous = false;
};

/// Parametrix trace on the segment [0, 2R] x Y: near each end the half-cylinder
/// kernel weighted by psi1, in the middle the interior kernel weighted by psi2.
/// interior_trace(t) is the scalar trace of the homogeneous interior model of
/// length interior_length, so its diagonal is interior_trace / interior_length.
inline GluedTrace glued_trace(const GluingScheme& scheme,
                              const std::function<double(double)>& interior_trace,
                              double interior_length, CylinderBC bc,
                              const TangentialSpectrum& spec, double t,
                              std::size_t cutoff = 64) {
  if (!(t > 0.0)) throw DomainError("glued_trace: t must be positive");
  const double R = scheme.R;
  const double density = interior_trace(t) / interior_length;
  const auto psi2_int = integrate([&](double u) { return scheme.psi2(u); }, 0.0, R, 1e-15);
  const double mass = heat_trace_B2(spec, t, std::max<std::size_t>(cutoff, 1));

  double near = 0.0;
  if (bc == CylinderBC::APS) {
    std::vector<double> terms;
    for (const auto& m : spec.modes(cutoff)) {
      const ModePair mode(m.mu);
      const auto q = integrate(
          [&](double u) {
            return scheme.psi1(u) * mode_kernel_diag(bc, mode, t, u).trace().real();
          },
          0.0, R, 1e-15);
      terms.push_back(m.multiplicity * q.value);
    }
    near = pairwise_sum(terms);
  } else {
    const ModePair unit(1.0);
    const double unit_mass = std::exp(-t);
    const auto q = integrate(
        [&](double u) {
          return scheme.psi1(u) * mode_kernel_diag(bc, unit, t, u).trace().real() / unit_mass;
        },
        0.0, R, 1e-15);
    near = 0.5 * mass * q.value;
  }
  GluedTrace g;
  g.value = 2.0 * near + 2.0 * psi2_int.value * mass * density;
  g.c3 = scheme.c3();
  g.c2 = scheme.c2();
  g.c1 = 4.0 * mass * (2.0 * R / std::sqrt(4.0 * std::numbers::pi * t) + 1.0);
  g.exponential_factor = std::exp(-g.c3 * R * R / t);
  g.error_bound = g.c1 * std::exp(g.c2 * t) * g.exponential_factor;
  g.vacuous = g.error_bound >= std::abs(g.value);
  return g;
}

}  // namespace detlab
