#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

namespace detlab {

/// Small-time expansion sum_beta c_beta t^beta with beta restricted to
/// half-integers. Keys are 2*beta.
class AsymptoticExpansion {
 public:
  /// Highest kept 2*beta; products are truncated beyond it.
  static constexpr int kMaxTwiceExponent = 10;

  AsymptoticExpansion() = default;

  static AsymptoticExpansion monomial(int twice_beta, double c) {
    AsymptoticExpansion e;
    e.add(twice_beta, c);
    return e;
  }

  void add(int twice_beta, double c) {
    if (twice_beta > kMaxTwiceExponent) return;
    terms_[twice_beta] += c;
  }

  double coefficient(int twice_beta) const {
    auto it = terms_.find(twice_beta);
    return it == terms_.end() ? 0.0 : it->second;
  }

  /// Coefficient a_k in t^{-n/2} sum_k a_k t^{k/2}.
  double a(int k) const { return coefficient(k - dimension); }

  const std::map<int, double>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }

  double evaluate(double t, int max_twice_beta = kMaxTwiceExponent) const {
    double acc = 0.0;
    for (const auto& [k, c] : terms_) {
      if (k > max_twice_beta) break;
      acc += c * std::pow(t, 0.5 * k);
    }
    return acc;
  }

  AsymptoticExpansion& operator+=(const AsymptoticExpansion& o) {
    for (const auto& [k, c] : o.terms_) add(k, c);
    return *this;
  }
  AsymptoticExpansion& operator*=(double s) {
    for (auto& [k, c] : terms_) c *= s;
    return *this;
  }
  friend AsymptoticExpansion operator+(AsymptoticExpansion a, const AsymptoticExpansion& b) {
    return a += b;
  }
  friend AsymptoticExpansion operator-(AsymptoticExpansion a, AsymptoticExpansion b) {
    b *= -1.0;
    return a += b;
  }
  friend AsymptoticExpansion operator*(AsymptoticExpansion a, double s) { return a *= s; }
  friend AsymptoticExpansion operator*(double s, AsymptoticExpansion a) { return a *= s; }

  friend AsymptoticExpansion operator*(const AsymptoticExpansion& a,
                                       const AsymptoticExpansion& b) {
    AsymptoticExpansion out;
    for (const auto& [ka, ca] : a.terms_)
      for (const auto& [kb, cb] : b.terms_) out.add(ka + kb, ca * cb);
    out.dimension = std::max(a.dimension, b.dimension);
    return out;
  }

  /// Multiply by t^{twice_shift/2}.
  AsymptoticExpansion shifted(int twice_shift) const {
    AsymptoticExpansion out;
    for (const auto& [k, c] : terms_) out.add(k + twice_shift, c);
    out.dimension = dimension;
    return out;
  }

  /// Declared effective dimension n (leading power t^{-n/2}).
  int dimension = 1;
  /// Least-squares residual when the expansion was fitted; 0 if analytic.
  double fit_residual = 0.0;
  /// Set by the fitter when the source shows no small-time growth.
  bool pure_exponential = false;

 private:
  std::map<int, double> terms_;
};

namespace series {

/// Taylor series of exp(alpha t).
inline AsymptoticExpansion exp_linear(double alpha) {
  AsymptoticExpansion e;
  double c = 1.0;
  for (int j = 0; 2 * j <= AsymptoticExpansion::kMaxTwiceExponent; ++j) {
    e.add(2 * j, c);
    c *= alpha / static_cast<double>(j + 1);
  }
  return e;
}

/// Series of erfc(h sqrt t) in powers of t^{1/2}.
inline AsymptoticExpansion erfc_sqrt(double h) {
  AsymptoticExpansion e;
  e.add(0, 1.0);
  const double pref = 2.0 / std::sqrt(std::numbers::pi);
  double fact = 1.0;  // j!
  for (int j = 0; 2 * j + 1 <= AsymptoticExpansion::kMaxTwiceExponent; ++j) {
    if (j > 0) fact *= j;
    const double sgn = (j % 2 == 0) ? 1.0 : -1.0;
    e.add(2 * j + 1, -pref * sgn * std::pow(h, 2 * j + 1) / (fact * (2 * j + 1)));
  }
  return e;
}

/// Series of exp((h^2 - mu^2) t) erfc(h sqrt t), the Robin end correction.
inline AsymptoticExpansion robin_end(double h, double mu) {
  return exp_linear(h * h - mu * mu) * erfc_sqrt(h);
}

}  // namespace series

}  // namespace detlab
