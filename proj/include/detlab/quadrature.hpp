#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <functional>

namespace detlab {

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  /// Number of panels that hit the depth limit without meeting tolerance.
  int unconverged_panels = 0;
};

namespace detail {

inline void gk_panel(const std::function<double(double)>& f, double a, double b, double abs_tol,
                     int depth, QuadratureResult& acc) {
  double err = 0.0;
  const double v =
      boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, 0, 0.0, &err);
  if (err <= abs_tol || depth == 0) {
    acc.value += v;
    acc.error += err;
    if (err > abs_tol) ++acc.unconverged_panels;
    return;
  }
  const double m = 0.5 * (a + b);
  gk_panel(f, a, m, abs_tol, depth - 1, acc);
  gk_panel(f, m, b, abs_tol, depth - 1, acc);
}

}  // namespace detail

/// Adaptive 15-point Gauss-Kronrod on [a, b] with an absolute tolerance per
/// panel. Panels are bisected up to max_depth times.
inline QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                                  double abs_tol = 1e-12, int max_depth = 12,
                                  int initial_panels = 8) {
  QuadratureResult r;
  const double h = (b - a) / initial_panels;
  for (int i = 0; i < initial_panels; ++i) {
    const double lo = a + i * h;
    const double hi = (i + 1 == initial_panels) ? b : a + (i + 1) * h;
    detail::gk_panel(f, lo, hi, abs_tol, max_depth, r);
  }
  return r;
}

/// int_{t_lo}^{t_hi} f(t) dt / t, evaluated in the variable x = ln t.
inline QuadratureResult integrate_log(const std::function<double(double)>& f, double t_lo,
                                      double t_hi, double abs_tol = 1e-12, int max_depth = 12) {
  const double span = std::log(t_hi) - std::log(t_lo);
  const int panels = std::max(4, static_cast<int>(std::ceil(span)));
  return integrate([&](double x) { return f(std::exp(x)); }, std::log(t_lo), std::log(t_hi),
                   abs_tol, max_depth, panels);
}

}  // namespace detlab
