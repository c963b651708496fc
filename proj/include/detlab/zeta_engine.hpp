#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "detlab/errors.hpp"
#include "detlab/expansion.hpp"
#include "detlab/quadrature.hpp"
#include "detlab/special_functions.hpp"
#include "detlab/summation.hpp"

namespace detlab {

/// Nondecreasing eigenvalues of a Laplace-type operator, listed with
/// multiplicity. count == max size_t means an infinite stream.
struct EigenvalueStream {
  std::function<double(std::size_t)> value;
  std::size_t count = std::numeric_limits<std::size_t>::max();

  static EigenvalueStream finite(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return {[v = std::move(values)](std::size_t i) { return v[i]; }, n};
  }

  /// sum_i exp(-t lambda_i), truncated once terms drop below 1e-20 of the sum.
  double heat_trace(double t) const {
    std::vector<double> terms;
    double running = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
      const double term = std::exp(-t * value(i));
      terms.push_back(term);
      running += term;
      if (count == std::numeric_limits<std::size_t>::max() && term < 1e-20 * running &&
          t * value(i) > 46.0)
        break;
    }
    return pairwise_sum(terms);
  }
};

/// Sampled heat trace plus the metadata the Mellin machinery needs.
struct HeatTraceSamples {
  /// The part of Tr exp(-t L) handled numerically.
  std::function<double(double)> trace;
  /// Effective dimension n: the trace grows like t^{-n/2}.
  int dimension_n = 1;
  /// Lower bound b > 0 for the spectrum behind `trace` (large-time discard).
  double gap = 0.0;
  /// Analytic expansion of `trace`, when the source knows it.
  std::optional<AsymptoticExpansion> declared_expansion;
  /// zeta(0) and zeta'(0) of a part whose Mellin transform is done in closed form.
  double closed_zeta0 = 0.0;
  double closed_zeta_prime0 = 0.0;
  /// Log-spaced sample grid and values of `trace` on it.
  std::vector<double> t_grid;
  std::vector<double> values;

  static std::vector<double> default_grid(double t_lo = 1e-5, double t_hi = 50.0,
                                          int per_decade = 20) {
    std::vector<double> g;
    const double l0 = std::log10(t_lo);
    const double l1 = std::log10(t_hi);
    const int n = static_cast<int>(std::ceil((l1 - l0) * per_decade));
    for (int i = 0; i <= n; ++i) g.push_back(std::pow(10.0, l0 + (l1 - l0) * i / n));
    return g;
  }

  void sample() {
    if (t_grid.empty()) t_grid = default_grid();
    for (std::size_t i = 1; i < t_grid.size(); ++i)
      if (!(t_grid[i] > t_grid[i - 1]))
        throw ConfigError("heat trace samples: t grid must be strictly increasing");
    values.clear();
    for (double t : t_grid) values.push_back(trace(t));
  }

  static HeatTraceSamples from_function(std::function<double(double)> fn, int dimension_n,
                                        double gap,
                                        std::optional<AsymptoticExpansion> expansion = {}) {
    HeatTraceSamples s;
    s.trace = std::move(fn);
    s.dimension_n = dimension_n;
    s.gap = gap;
    s.declared_expansion = std::move(expansion);
    s.sample();
    return s;
  }

  static HeatTraceSamples from_eigenvalues(const EigenvalueStream& stream, int dimension_n) {
    if (stream.count == 0) throw DomainError("empty eigenvalue stream");
    HeatTraceSamples s;
    s.trace = [stream](double t) { return stream.heat_trace(t); };
    s.dimension_n = dimension_n;
    s.gap = stream.value(0);
    if (stream.count != std::numeric_limits<std::size_t>::max()) {
      AsymptoticExpansion e;
      for (std::size_t i = 0; i < stream.count; ++i) e += series::exp_linear(-stream.value(i));
      e.dimension = 0;
      s.declared_expansion = e;
    }
    s.sample();
    return s;
  }
};

struct ZetaResult {
  double zeta_at_0 = 0.0;
  double zeta_prime_at_0 = 0.0;
  double det_zeta = 1.0;
  double error_estimate = 0.0;
  double split_point = 1.0;
};

struct EtaResult {
  double eta_at_0 = 0.0;
  double error_estimate = 0.0;
  /// Root-fit value from the lower window (eta_from_mode_roots only).
  double shifted_window = 0.0;
};

/// Least-squares fit of t^{n/2} trace(t) against powers t^{j/2}, j < order,
/// on the smallest decade of the sample grid.
inline AsymptoticExpansion fit_small_time(const HeatTraceSamples& samples, int order,
                                          double residual_tolerance = 1e-8) {
  if (order < 1) throw DomainError("fit_small_time: order must be >= 1");
  if (samples.values.size() != samples.t_grid.size() || samples.t_grid.empty())
    throw ConfigError("fit_small_time: samples not evaluated");
  const double t_lo = samples.t_grid.front();
  if (t_lo > 1e-3) throw ConfigError("fit_small_time: samples must reach t <= 1e-3");
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < samples.t_grid.size(); ++i)
    if (samples.t_grid[i] <= 10.0 * t_lo * (1.0 + 1e-12)) idx.push_back(i);
  if (idx.size() < static_cast<std::size_t>(3 * order))
    throw ConfigError("fit_small_time: need at least 3N points in the smallest decade");

  auto run_fit = [&](int n, int twice_step, AsymptoticExpansion& out) {
    const double t_scale = samples.t_grid[idx.back()];
    Eigen::MatrixXd A(idx.size(), order);
    Eigen::VectorXd y(idx.size());
    for (std::size_t r = 0; r < idx.size(); ++r) {
      const double t = samples.t_grid[idx[r]];
      const double x = std::sqrt(t / t_scale);
      y(r) = std::pow(t, 0.5 * n) * samples.values[idx[r]];
      for (int j = 0; j < order; ++j) A(r, j) = std::pow(x, j * twice_step);
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    const double cond = sv(0) / sv(sv.size() - 1);
    if (!(cond < 1e12)) throw FitError("fit_small_time: ill-conditioned fit", cond);
    const Eigen::VectorXd c = svd.solve(y);
    const double scale = std::max(y.cwiseAbs().maxCoeff(), 1e-300);
    const double residual = (A * c - y).cwiseAbs().maxCoeff() / scale;
    out = AsymptoticExpansion{};
    for (int j = 0; j < order; ++j)
      out.add(j * twice_step - n, c(j) * std::pow(t_scale, -0.5 * j * twice_step));
    out.dimension = n;
    out.fit_residual = residual;
    return scale;
  };

  AsymptoticExpansion e;
  const double scale = run_fit(samples.dimension_n, 1, e);
  bool singular_part = false;
  for (const auto& [k, c] : e.terms())
    if (k < 0 && std::abs(c) * std::pow(samples.t_grid[idx.back()], 0.5 * (k + samples.dimension_n)) >
                     1e-8 * scale)
      singular_part = true;
  if (samples.dimension_n > 0 && !singular_part) {
    AsymptoticExpansion bounded;
    run_fit(0, 2, bounded);
    bounded.pure_exponential = true;
    e = bounded;
  }
  if (e.fit_residual > residual_tolerance)
    throw NumericError("fit_small_time: residual above tolerance", e.fit_residual);
  return e;
}

struct ZetaOptions {
  /// Below this time the expansion replaces the trace entirely.
  double small_time = 1e-7;
  /// Terms with 2*beta up to this value are subtracted on [small_time, t0].
  int subtract_max_twice_beta = 1;
  double quadrature_tolerance = 1e-12;
};

/// Split Mellin transform: zeta(0), zeta'(0) from a heat trace and its
/// small-time expansion.
inline ZetaResult zeta_from_trace(const HeatTraceSamples& samples,
                                  const AsymptoticExpansion& expansion, double t0 = 1.0,
                                  const ZetaOptions& opt = {}) {
  if (!(samples.gap > 0.0))
    throw InvertibilityError("zeta_from_trace: smallest eigenvalue must be positive");
  if (!samples.t_grid.empty() &&
      (t0 < samples.t_grid.front() || t0 > samples.t_grid.back()))
    throw ConfigError("zeta_from_trace: split point outside the sample range");
  if (!(t0 > opt.small_time)) throw ConfigError("zeta_from_trace: split point too small");

  const auto& f = samples.trace;
  const double t1 = opt.small_time;
  const int kmax = opt.subtract_max_twice_beta;
  const double c0 = expansion.coefficient(0);

  auto subtracted = [&](double t) { return expansion.evaluate(t, kmax); };
  const QuadratureResult small = integrate_log(
      [&](double t) { return f(t) - subtracted(t); }, t1, t0, opt.quadrature_tolerance);

  double below_t1 = 0.0;
  double truncation = 0.0;
  double analytic = c0 * std::log(t0) + std::numbers::egamma * c0;
  for (const auto& [k, c] : expansion.terms()) {
    if (k == 0) continue;
    const double beta = 0.5 * k;
    if (k <= kmax) {
      analytic += c * std::pow(t0, beta) / beta;
    } else {
      const double piece = c * std::pow(t1, beta) / beta;
      below_t1 += piece;
      truncation = std::abs(piece);
    }
  }
  if (expansion.terms().empty() || expansion.terms().rbegin()->first <= kmax)
    truncation = std::abs(f(t1) - subtracted(t1)) * 2.0;

  // Large-time discard: exp(-b T) |trace(1)| < 1e-16.
  const double b = samples.gap;
  const double scale1 = std::max(std::abs(f(1.0)), 1e-300);
  double T = std::max(2.0 * t0, 1.0 + std::log(scale1 / 1e-16) / b);
  const QuadratureResult large = integrate_log(f, t0, T, opt.quadrature_tolerance);
  const double tail = std::abs(f(T)) / (b * T);

  const double noise = std::numeric_limits<double>::epsilon() *
                       std::abs(f(t1)) * std::log(t0 / t1) * 4.0;

  ZetaResult r;
  r.split_point = t0;
  r.zeta_at_0 = c0 + samples.closed_zeta0;
  r.zeta_prime_at_0 = small.value + below_t1 + analytic + large.value +
                      samples.closed_zeta_prime0;
  r.det_zeta = std::exp(-r.zeta_prime_at_0);
  r.error_estimate = small.error + large.error + tail + truncation + noise +
                     expansion.fit_residual * std::abs(c0);
  return r;
}

/// Convenience overload: use the declared expansion, or fit one.
inline ZetaResult zeta_from_trace(const HeatTraceSamples& samples, double t0 = 1.0,
                                  int fit_order = 6) {
  const AsymptoticExpansion e = samples.declared_expansion
                                    ? *samples.declared_expansion
                                    : fit_small_time(samples, fit_order);
  return zeta_from_trace(samples, e, t0);
}

/// Regularized signed count of a finite spectrum: sum of signs.
inline EtaResult eta_from_spectrum(std::span<const double> eigenvalues) {
  std::vector<double> signs;
  for (double l : eigenvalues) {
    if (l == 0.0) throw DomainError("eta_from_spectrum: zero eigenvalue");
    signs.push_back(l > 0.0 ? 1.0 : -1.0);
  }
  return {pairwise_sum(signs), 0.0};
}

inline EtaResult eta_from_spectrum(const std::vector<double>& eigenvalues) {
  return eta_from_spectrum(std::span<const double>(eigenvalues.data(), eigenvalues.size()));
}

/// eta(0) = pi^{-1/2} int_0^inf t^{-1/2} sum lambda exp(-t lambda^2) dt for a
/// finite spectrum, by the split Mellin route (cross-check of the sign sum).
inline EtaResult eta_heat_integral(std::span<const double> eigenvalues, double t0 = 1.0) {
  std::vector<double> ev(eigenvalues.begin(), eigenvalues.end());
  double gap = std::numeric_limits<double>::infinity();
  for (double l : ev) {
    if (l == 0.0) throw DomainError("eta_heat_integral: zero eigenvalue");
    gap = std::min(gap, l * l);
  }
  auto E = [&ev](double t) {
    std::vector<double> terms;
    for (double l : ev) terms.push_back(l * std::exp(-t * l * l));
    return pairwise_sum(terms);
  };
  // Near zero substitute t = x^2 to remove the t^{-1/2} singularity.
  const auto near = integrate([&](double x) { return 2.0 * E(x * x); }, 0.0, std::sqrt(t0));
  double scale = std::max(std::abs(E(1.0)), 1e-300);
  const double T = std::max(2.0 * t0, 1.0 + std::log(scale / 1e-17) / gap);
  const auto far = integrate_log([&](double t) { return std::sqrt(t) * E(t); }, t0, T);
  const double spi = std::sqrt(std::numbers::pi);
  return {(near.value + far.value) / spi, (near.error + far.error) / spi};
}

/// eta(0) of a first-order mode problem from its roots. Positive roots x_n and
/// the moduli of negative roots follow (pi/R)(n + c) + O(1/n); then
/// eta(0) = c_minus - c_plus. The offsets are extrapolated by least squares in
/// 1/x over the largest roots.
inline EtaResult eta_from_mode_roots(const std::vector<double>& positive,
                                     const std::vector<double>& negative_moduli, double R) {
  // Offset c in R x_n / pi = n + c + a_1/(x_n R) + ..., fitted on the last
  // roots and again on a window shifted down by half its width.
  auto offsets = [R](const std::vector<double>& x) {
    const std::size_t n = x.size();
    if (n < 16) throw NumericError("eta_from_mode_roots: too few roots", static_cast<double>(n));
    const std::size_t use = std::min<std::size_t>(40, n / 2);
    auto fit = [&](std::size_t first) {
      Eigen::MatrixXd A(use, 4);
      Eigen::VectorXd y(use);
      for (std::size_t i = 0; i < use; ++i) {
        const std::size_t j = first + i;
        const double inv = 1.0 / (x[j] * R);
        y(i) = R * x[j] / std::numbers::pi - static_cast<double>(j);
        for (int p = 0; p < 4; ++p) A(i, p) = std::pow(inv, p);
      }
      return A.colPivHouseholderQr().solve(y)(0);
    };
    return std::pair{fit(n - use), fit(n - use - use / 2)};
  };
  const auto [cp, cp_alt] = offsets(positive);
  const auto [cn, cn_alt] = offsets(negative_moduli);
  EtaResult r;
  r.eta_at_0 = cn - cp;
  r.shifted_window = cn_alt - cp_alt;
  r.error_estimate = std::abs(r.eta_at_0 - r.shifted_window);
  return r;
}

struct FredholmResult {
  std::complex<double> value{1.0, 0.0};
  double log_modulus = 0.0;
  /// Total phase accumulated factor by factor (not reduced mod 2 pi).
  double phase = 0.0;
  bool singular = false;
};

/// prod (1 + d_k) with log-space accumulation.
inline FredholmResult fredholm_det(std::span<const std::complex<double>> deviations) {
  FredholmResult r;
  std::vector<std::complex<double>> logs;
  logs.reserve(deviations.size());
  for (const auto& d : deviations) {
    if (std::abs(1.0 + d) < 1e-14) {
      r.value = 0.0;
      r.log_modulus = -std::numeric_limits<double>::infinity();
      r.singular = true;
      return r;
    }
    logs.push_back(log1p(d));
  }
  const std::complex<double> total = pairwise_sum(logs);
  r.log_modulus = total.real();
  r.phase = total.imag();
  r.value = std::exp(total);
  return r;
}

inline FredholmResult fredholm_det(const std::vector<std::complex<double>>& deviations) {
  return fredholm_det(
      std::span<const std::complex<double>>(deviations.data(), deviations.size()));
}

/// det_zeta D = exp(i pi/2 (zeta_{D^2}(0) - eta(0))) exp(-zeta'_{D^2}(0)/2).
inline std::complex<double> det_zeta_dirac(double zeta0, double zeta_prime0, double eta0) {
  const double phase = 0.5 * std::numbers::pi * (zeta0 - eta0);
  return std::polar(std::exp(-0.5 * zeta_prime0), phase);
}

/// Diagnostic dump of (t, trace, subtracted expansion) triples.
inline void write_trace_dump(const std::string& path, const HeatTraceSamples& samples,
                             const AsymptoticExpansion& expansion, int max_twice_beta = 1) {
  std::FILE* fp = std::fopen(path.c_str(), "w");
  if (!fp) throw ConfigError("cannot open " + path);
  std::fprintf(fp, "t,trace,subtracted\n");
  for (std::size_t i = 0; i < samples.t_grid.size(); ++i) {
    const double t = samples.t_grid[i];
    std::fprintf(fp, "%.16e,%.16e,%.16e\n", t, samples.values[i],
                 samples.values[i] - expansion.evaluate(t, max_twice_beta));
  }
  std::fclose(fp);
}

}  // namespace detlab
