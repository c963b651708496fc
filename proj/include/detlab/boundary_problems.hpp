#pragma once

#include <Eigen/Dense>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include "detlab/cylinder_heat.hpp"
#include "detlab/errors.hpp"
#include "detlab/expansion.hpp"
#include "detlab/spectral_model.hpp"
#include "detlab/summation.hpp"
#include "detlab/zeta_engine.hpp"

namespace detlab {

// ---------------------------------------------------------------------------
// Boundary projections

enum class ProjectionKind {
  Dirichlet,
  Neumann,
  ChiralPlus,
  ChiralMinus,
  APSpos,
  APSneg,
  SigmaShift,
  Rotated
};

/// Orthogonal projection P on one mode pair, in the inward basis (phi, G phi).
/// Grassmannian kinds are the real rank-one projections onto
/// v = (cos(theta/2), -sin(theta/2)); theta = 0 is the APS projection Pi_>.
inline Eigen::Matrix2d grassmann_projection(double theta) {
  const Eigen::Vector2d v(std::cos(0.5 * theta), -std::sin(0.5 * theta));
  return v * v.transpose();
}

class BoundaryProjection {
 public:
  static BoundaryProjection dirichlet() { return BoundaryProjection(ProjectionKind::Dirichlet); }
  static BoundaryProjection neumann() { return BoundaryProjection(ProjectionKind::Neumann); }
  static BoundaryProjection chiral_plus() { return BoundaryProjection(ProjectionKind::ChiralPlus); }
  static BoundaryProjection chiral_minus() {
    return BoundaryProjection(ProjectionKind::ChiralMinus);
  }
  static BoundaryProjection aps_pos() { return BoundaryProjection(ProjectionKind::APSpos); }
  static BoundaryProjection aps_neg() { return BoundaryProjection(ProjectionKind::APSneg); }

  /// Pi_sigma = Pi_> + sigma. B is invertible here, so sigma is modelled as a
  /// rotation of the lowest `angles.size()` mode pairs.
  static BoundaryProjection sigma(std::vector<double> angles) {
    BoundaryProjection p(ProjectionKind::SigmaShift);
    p.phases_ = std::move(angles);
    return p;
  }

  /// Base projection rotated by theta_k on mode k (modes beyond the list keep
  /// the base phase).
  static BoundaryProjection rotated(ProjectionKind base, std::vector<double> phases) {
    if (base != ProjectionKind::APSpos && base != ProjectionKind::APSneg)
      throw ConfigError("rotated: base must be aps_pos or aps_neg");
    BoundaryProjection p(ProjectionKind::Rotated);
    p.base_ = base;
    p.phases_ = std::move(phases);
    return p;
  }

  ProjectionKind kind() const { return kind_; }
  ProjectionKind base() const { return base_; }
  const std::vector<double>& phases() const { return phases_; }

  bool is_grassmannian() const {
    return kind_ == ProjectionKind::APSpos || kind_ == ProjectionKind::APSneg ||
           kind_ == ProjectionKind::SigmaShift || kind_ == ProjectionKind::Rotated;
  }

  /// Rotation applied on mode k relative to the base.
  double phase(std::size_t k) const { return k < phases_.size() ? phases_[k] : 0.0; }

  double base_angle() const {
    switch (kind_) {
      case ProjectionKind::APSneg: return std::numbers::pi;
      case ProjectionKind::Rotated:
        return base_ == ProjectionKind::APSneg ? std::numbers::pi : 0.0;
      default: return 0.0;
    }
  }

  /// Inward Grassmannian angle theta on mode k.
  double angle(std::size_t k) const {
    if (!is_grassmannian()) throw DomainError("angle: not a Grassmannian projection");
    return base_angle() + phase(k);
  }

  /// Id - P: shifts every angle by pi.
  BoundaryProjection complement() const {
    if (!is_grassmannian()) throw DomainError("complement: not a Grassmannian projection");
    const ProjectionKind flipped =
        base_angle() == 0.0 ? ProjectionKind::APSneg : ProjectionKind::APSpos;
    return rotated(flipped, phases_);
  }

  /// The same condition seen from the other side of a cut: angle -> pi - angle,
  /// expressed again as a rotation of a base projection.
  BoundaryProjection seen_from_other_side() const {
    if (!is_grassmannian()) throw DomainError("not a Grassmannian projection");
    std::vector<double> neg(phases_.size());
    for (std::size_t i = 0; i < neg.size(); ++i) neg[i] = -phases_[i];
    const ProjectionKind flipped =
        base_angle() == 0.0 ? ProjectionKind::APSneg : ProjectionKind::APSpos;
    return rotated(flipped, neg);
  }

  Eigen::Matrix2cd per_mode_matrix(std::size_t k) const {
    using cd = std::complex<double>;
    const Eigen::Matrix2cd id = Eigen::Matrix2cd::Identity();
    const Eigen::Matrix2cd g = ModePair::g_matrix().cast<cd>();
    const cd i(0.0, 1.0);
    switch (kind_) {
      case ProjectionKind::Dirichlet: return id;
      case ProjectionKind::Neumann: return Eigen::Matrix2cd::Zero();
      case ProjectionKind::ChiralPlus: return 0.5 * (id - i * g);
      case ProjectionKind::ChiralMinus: return 0.5 * (id + i * g);
      default: return grassmann_projection(angle(k)).cast<cd>();
    }
  }

  std::string name() const {
    switch (kind_) {
      case ProjectionKind::Dirichlet: return "dirichlet";
      case ProjectionKind::Neumann: return "neumann";
      case ProjectionKind::ChiralPlus: return "chiral_plus";
      case ProjectionKind::ChiralMinus: return "chiral_minus";
      case ProjectionKind::APSpos: return "aps_pos";
      case ProjectionKind::APSneg: return "aps_neg";
      case ProjectionKind::SigmaShift: return "sigma";
      case ProjectionKind::Rotated:
        return std::string("rotated(") + (base_ == ProjectionKind::APSneg ? "aps_neg" : "aps_pos") +
               ")";
    }
    return "?";
  }

 private:
  explicit BoundaryProjection(ProjectionKind k) : kind_(k) {}
  ProjectionKind kind_;
  ProjectionKind base_ = ProjectionKind::APSpos;
  std::vector<double> phases_;
};

// ---------------------------------------------------------------------------
// First-order mode problems on a segment

/// Closed-form exp(h M(lambda)) with M = [[-mu, lambda], [-lambda, mu]],
/// M^2 = (mu^2 - lambda^2) Id.
inline Eigen::Matrix2d mode_propagator(double mu, double lambda, double h) {
  Eigen::Matrix2d M;
  M << -mu, lambda, -lambda, mu;
  const double q = mu * mu - lambda * lambda;
  const double x = q * h * h;
  double c, s;  // exp(hM) = c Id + s M
  if (std::abs(x) < 1e-8) {
    c = 1.0 + 0.5 * x + x * x / 24.0;
    s = h * (1.0 + x / 6.0 + x * x / 120.0);
  } else if (q > 0.0) {
    const double r = std::sqrt(q);
    c = std::cosh(r * h);
    s = std::sinh(r * h) / r;
  } else {
    const double k = std::sqrt(-q);
    c = std::cos(k * h);
    s = std::sin(k * h) / k;
  }
  return c * Eigen::Matrix2d::Identity() + s * M;
}

struct CertifiedRoot {
  double value = 0.0;
  /// Bracket with opposite secular signs at its ends.
  double lo = 0.0;
  double hi = 0.0;
};

/// G(d/du + B) on one mode pair over [0, R], with inward Grassmannian angles at
/// both ends. The eigenfunction solves f' = M(lambda) f with f(0) on the line
/// (sin(tL/2), cos(tL/2)) and f(R) on the line (cos(tR/2), sin(tR/2)).
class FirstOrderSegment {
 public:
  FirstOrderSegment(double mu, double R, double theta_left, double theta_right)
      : mu_(mu), R_(R), theta_left_(theta_left), theta_right_(theta_right) {
    if (!(mu > 0.0)) throw DomainError("FirstOrderSegment: mu must be positive");
    if (!(R > 0.0)) throw DomainError("FirstOrderSegment: R must be positive");
    steps_ = static_cast<int>(std::ceil(mu * R)) + 1;
  }

  double mu() const { return mu_; }
  double R() const { return R_; }
  double theta_left() const { return theta_left_; }
  double theta_right() const { return theta_right_; }

  double start_angle() const { return 0.5 * std::numbers::pi - 0.5 * theta_left_; }
  double target_angle() const { return 0.5 * theta_right_; }

  /// Unwrapped Pruefer angle of f(R) minus the target angle. Strictly
  /// decreasing in lambda; eigenvalues sit where it crosses multiples of pi.
  double prufer(double lambda, Eigen::Vector2d* end_vector = nullptr) const {
    const double h = R_ / steps_;
    const Eigen::Matrix2d step = mode_propagator(mu_, lambda, h);
    Eigen::Vector2d f(std::cos(start_angle()), std::sin(start_angle()));
    double phi = start_angle();
    for (int i = 0; i < steps_; ++i) {
      Eigen::Vector2d g = step * f;
      g /= g.norm();
      double delta = std::atan2(f(0) * g(1) - f(1) * g(0), f.dot(g));
      const double expected = -lambda * h;
      delta += 2.0 * std::numbers::pi * std::round((expected - delta) / (2.0 * std::numbers::pi));
      phi += delta;
      f = g;
    }
    if (end_vector) *end_vector = f;
    return phi - target_angle();
  }

  /// Secular function w^T f(R) (normalized): zero exactly at eigenvalues.
  double secular(double lambda) const {
    Eigen::Vector2d f;
    prufer(lambda, &f);
    const double b = target_angle();
    return -std::sin(b) * f(0) + std::cos(b) * f(1);
  }

  /// All eigenvalues in [lo, hi], each certified by a sign change.
  std::vector<CertifiedRoot> roots_in(double lo, double hi) const {
    const double pi = std::numbers::pi;
    const double p_hi = prufer(hi);
    const double p_lo = prufer(lo);
    const auto j_first = static_cast<long long>(std::floor(p_hi / pi)) + 1;
    const auto j_last = static_cast<long long>(std::ceil(p_lo / pi)) - 1;
    std::vector<CertifiedRoot> out;
    for (long long j = j_last; j >= j_first; --j) out.push_back(root(j));
    return out;
  }

  /// Root with Pruefer index j: prufer(lambda) = j pi.
  CertifiedRoot root(long long j) const {
    const double pi = std::numbers::pi;
    const double guess = (start_angle() - target_angle() - static_cast<double>(j) * pi) / R_;
    double a = guess - mu_ - 1e-9 * (1.0 + std::abs(guess));
    double b = guess + mu_ + 1e-9 * (1.0 + std::abs(guess));
    auto g = [this, j, pi](double l) { return prufer(l) - static_cast<double>(j) * pi; };
    double ga = g(a), gb = g(b);
    if (!(ga >= 0.0 && gb <= 0.0))
      throw SolverError("secular root: bracket failed", a, b);
    const double tol = 1e-12;
    auto stop = [tol](double x, double y) { return std::abs(y - x) <= tol * (1.0 + std::abs(x)); };
    std::uintmax_t iters = 200;
    auto r = boost::math::tools::toms748_solve(g, a, b, ga, gb, stop, iters);
    CertifiedRoot c{0.5 * (r.first + r.second), r.first, r.second};
    const double s_lo = secular(c.lo), s_hi = secular(c.hi);
    if (s_lo * s_hi > 0.0 && std::abs(g(c.value)) > 1e-9)
      throw SolverError("secular root: certification failed", c.lo, c.hi);
    return c;
  }

  /// Every root with |lambda| <= cap, sorted by value; throws on a zero root.
  std::vector<CertifiedRoot> roots_up_to(double cap) const {
    auto r = roots_in(-cap, cap);
    std::sort(r.begin(), r.end(),
              [](const CertifiedRoot& x, const CertifiedRoot& y) { return x.value < y.value; });
    for (const auto& c : r)
      if (std::abs(c.value) < 1e-12 || (c.lo <= 0.0 && c.hi >= 0.0))
        throw InvertibilityError("mode problem has a zero eigenvalue");
    return r;
  }

  /// The `count` eigenvalues of smallest modulus, ordered by modulus.
  std::vector<CertifiedRoot> lowest(std::size_t count) const {
    double cap = mu_ + (static_cast<double>(count) / 2.0 + 2.0) * std::numbers::pi / R_;
    std::vector<CertifiedRoot> r;
    for (;;) {
      r = roots_up_to(cap);
      if (r.size() >= count) break;
      cap *= 1.5;
    }
    std::sort(r.begin(), r.end(), [](const CertifiedRoot& x, const CertifiedRoot& y) {
      return std::abs(x.value) < std::abs(y.value) ||
             (std::abs(x.value) == std::abs(y.value) && x.value < y.value);
    });
    r.resize(count);
    return r;
  }

  /// Positive roots and moduli of negative roots, the first n of each.
  void signed_roots(std::size_t n, std::vector<double>& positive,
                    std::vector<double>& negative) const {
    double cap = mu_ + (static_cast<double>(n) + 3.0) * std::numbers::pi / R_;
    const auto r = roots_up_to(cap);
    positive.clear();
    negative.clear();
    for (const auto& c : r) {
      if (c.value > 0.0)
        positive.push_back(c.value);
      else
        negative.push_back(-c.value);
    }
    std::sort(negative.begin(), negative.end());
    if (positive.size() < n || negative.size() < n)
      throw SolverError("signed_roots: not enough roots", -cap, cap);
    positive.resize(n);
    negative.resize(n);
  }

 private:
  double mu_, R_, theta_left_, theta_right_;
  int steps_ = 1;
};

/// Eigenvalues of the first-order problem on a circle of circumference 2R:
/// +-mu once, +-sqrt(mu^2 + (n pi/R)^2) twice for n >= 1.
inline std::vector<double> circle_first_order_spectrum(double mu, double R, std::size_t n_max) {
  std::vector<double> out{mu, -mu};
  for (std::size_t n = 1; n <= n_max; ++n) {
    const double l = std::hypot(mu, static_cast<double>(n) * std::numbers::pi / R);
    out.insert(out.end(), {l, l, -l, -l});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Per-mode traces of D^2 on a segment with Grassmannian ends

/// Half-cylinder boundary contribution of an end with inward angle theta:
/// Dirichlet on one component and Robin(h = mu cos theta) on the other.
inline double grassmann_end_term(double t, double mu, double theta) {
  const double h = mu * std::cos(theta);
  const double st = std::sqrt(t);
  const double robin = (h * st > 0.0) ? erfcx(h * st) * std::exp(-mu * mu * t)
                                       : std::exp((h * h - mu * mu) * t) * std::erfc(h * st);
  return -0.5 * std::exp(-t * mu * mu) + 0.5 * robin;
}

inline AsymptoticExpansion grassmann_end_expansion(double mu, double theta) {
  return -0.5 * series::exp_linear(-mu * mu) + 0.5 * series::robin_end(mu * std::cos(theta), mu);
}

/// Tr exp(-t D^2) on one mode pair of a segment, minus the bulk term
/// 2R exp(-t mu^2)/sqrt(4 pi t). Spatial form (end terms) when R^2/t >= 40,
/// spectral form from certified secular roots otherwise.
class SegmentModeTrace {
 public:
  static constexpr double kSpatialRatio = 40.0;
  static constexpr double kSpectralReach = 60.0;
  static constexpr double kTailMuR = 40.0;

  SegmentModeTrace(double mu, double R, double theta_left, double theta_right)
      : mu_(mu), R_(R), theta_left_(theta_left), theta_right_(theta_right) {
    spatial_only_ = mu * R > kTailMuR;
    if (!spatial_only_) {
      const FirstOrderSegment seg(mu, R, theta_left, theta_right);
      const double cap = std::hypot(mu, kSpectralReach / R);
      for (const auto& c : seg.roots_up_to(cap)) squares_.push_back(c.value * c.value);
      std::sort(squares_.begin(), squares_.end());
      gap_ = squares_.front();
    } else {
      gap_ = mu * mu;
      for (double th : {theta_left, theta_right}) {
        const double h = mu * std::cos(th);
        if (h < 0.0) gap_ = std::min(gap_, mu * mu - h * h);
      }
      if (!(gap_ > 0.0)) throw InvertibilityError("mode problem has a zero eigenvalue");
    }
  }

  bool spatial_only() const { return spatial_only_; }
  double gap() const { return gap_; }
  const std::vector<double>& squared_eigenvalues() const { return squares_; }

  double bulk(double t) const {
    return 2.0 * R_ * std::exp(-t * mu_ * mu_) / std::sqrt(4.0 * std::numbers::pi * t);
  }

  double spatial(double t) const {
    return grassmann_end_term(t, mu_, theta_left_) + grassmann_end_term(t, mu_, theta_right_);
  }

  double spectral(double t) const {
    std::vector<double> terms;
    for (double l2 : squares_) terms.push_back(std::exp(-t * l2));
    return pairwise_sum(terms) - bulk(t);
  }

  double nonbulk(double t) const {
    if (spatial_only_ || R_ * R_ / t >= kSpatialRatio) return spatial(t);
    return spectral(t);
  }

  double total(double t) const { return nonbulk(t) + bulk(t); }

  AsymptoticExpansion expansion() const {
    return grassmann_end_expansion(mu_, theta_left_) + grassmann_end_expansion(mu_, theta_right_);
  }

 private:
  double mu_, R_, theta_left_, theta_right_;
  bool spatial_only_ = false;
  double gap_ = 0.0;
  std::vector<double> squares_;
};

// ---------------------------------------------------------------------------
// Mode problems

enum class Topology { Segment, Circle };
enum class OperatorOrder { First, Second };

struct ModeProblem {
  double mu = 1.0;
  double R = 1.0;
  Topology topology = Topology::Segment;
  OperatorOrder order = OperatorOrder::First;
  BoundaryProjection left = BoundaryProjection::aps_pos();
  BoundaryProjection right = BoundaryProjection::aps_pos();
  /// Index of this mode in the tangential spectrum (selects per-mode phases).
  std::size_t mode_index = 0;
  /// Second order, chiral ends: which component (0 = phi, 1 = G phi).
  int channel = 0;
  /// Second order: bypass the closed forms and use the scanning solver.
  bool force_generic_solver = false;
};

namespace detail {

enum class ScalarBC { Dirichlet, Neumann };

inline ScalarBC scalar_channel(const BoundaryProjection& p, int channel) {
  switch (p.kind()) {
    case ProjectionKind::Dirichlet: return ScalarBC::Dirichlet;
    case ProjectionKind::Neumann: return ScalarBC::Neumann;
    case ProjectionKind::ChiralPlus: return channel == 0 ? ScalarBC::Dirichlet : ScalarBC::Neumann;
    case ProjectionKind::ChiralMinus: return channel == 0 ? ScalarBC::Neumann : ScalarBC::Dirichlet;
    default: throw ConfigError("second-order problems take dirichlet, neumann or chiral ends");
  }
}

// Scalar -f'' on [0, R] with Dirichlet/Neumann ends: wave numbers k >= 0 by
// scanning the secular function with step pi/(16R) and refining each bracket.
inline std::vector<double> scalar_wave_numbers(ScalarBC left, ScalarBC right, double R,
                                               std::size_t count) {
  std::vector<double> ks;
  if (left == ScalarBC::Neumann && right == ScalarBC::Neumann) ks.push_back(0.0);
  auto sec = [&](double k) {
    if (left == right) return std::sin(k * R);
    return std::cos(k * R);
  };
  const double step = std::numbers::pi / (16.0 * R);
  double a = 0.5 * step;
  double fa = sec(a);
  while (ks.size() < count) {
    const double b = a + step;
    const double fb = sec(b);
    if (fa == 0.0) {
      ks.push_back(a);
    } else if (fa * fb < 0.0) {
      std::uintmax_t iters = 200;
      auto stop = [](double x, double y) { return std::abs(y - x) <= 1e-15 * (1.0 + std::abs(x)); };
      auto r = boost::math::tools::toms748_solve(sec, a, b, fa, fb, stop, iters);
      ks.push_back(0.5 * (r.first + r.second));
    }
    a = b;
    fa = fb;
  }
  ks.resize(count);
  return ks;
}

}  // namespace detail

/// First `count` eigenvalues of a mode problem. First order: ordered by
/// modulus. Second order: one scalar channel of D^2, ascending.
inline std::vector<double> mode_spectrum(const ModeProblem& p, std::size_t count) {
  if (count < 1) throw DomainError("mode_spectrum: count must be >= 1");
  if (!(p.R > 0.0)) throw DomainError("mode_spectrum: R must be positive");
  const double pi = std::numbers::pi;
  std::vector<double> out;
  if (p.order == OperatorOrder::First) {
    if (p.topology == Topology::Circle) {
      auto all = circle_first_order_spectrum(p.mu, p.R, count / 2 + 2);
      std::stable_sort(all.begin(), all.end(), [](double x, double y) {
        return std::abs(x) < std::abs(y) || (std::abs(x) == std::abs(y) && x < y);
      });
      all.resize(count);
      return all;
    }
    if (!p.left.is_grassmannian() || !p.right.is_grassmannian())
      throw ConfigError("first-order segment problems need Grassmannian ends");
    const FirstOrderSegment seg(p.mu, p.R, p.left.angle(p.mode_index),
                                p.right.angle(p.mode_index));
    for (const auto& c : seg.lowest(count)) out.push_back(c.value);
    return out;
  }
  const double mu2 = p.mu * p.mu;
  if (p.topology == Topology::Circle) {
    out.push_back(mu2);
    for (std::size_t n = 1; out.size() < count; ++n) {
      const double l = mu2 + std::pow(static_cast<double>(n) * pi / p.R, 2);
      out.push_back(l);
      if (out.size() < count) out.push_back(l);
    }
    return out;
  }
  const auto left = detail::scalar_channel(p.left, p.channel);
  const auto right = detail::scalar_channel(p.right, p.channel);
  if (p.force_generic_solver) {
    for (double k : detail::scalar_wave_numbers(left, right, p.R, count)) out.push_back(mu2 + k * k);
    return out;
  }
  const bool mixed = left != right;
  const std::size_t first = (left == detail::ScalarBC::Neumann && !mixed) ? 0 : 1;
  for (std::size_t j = first; out.size() < count; ++j) {
    const double k = mixed ? (static_cast<double>(j) - 0.5) * pi / p.R
                           : static_cast<double>(j) * pi / p.R;
    out.push_back(mu2 + k * k);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Assembled traces over all modes

/// Tr exp(-t D^2) of a mode-assembled problem split as
///   bulk_length * Tr exp(-t B^2) / sqrt(4 pi t) + nonbulk(t).
/// The bulk part has zeta'(0) = -bulk_length * zeta_{B^2}(-1/2) in closed form.
struct AssembledTrace {
  double bulk_length = 0.0;
  std::function<double(double)> nonbulk;
  AsymptoticExpansion nonbulk_expansion;
  double gap = 0.0;
  /// Signed eigenvalues of D per mode (first-order problems), for diagnostics.
  std::vector<double> sample_eigenvalues;

  /// Samples for the zeta engine with the bulk handled analytically.
  HeatTraceSamples samples(const TangentialSpectrum& spec) const {
    HeatTraceSamples s;
    s.trace = nonbulk;
    s.dimension_n = 1;
    s.gap = gap;
    s.declared_expansion = nonbulk_expansion;
    if (bulk_length != 0.0) s.closed_zeta_prime0 = -bulk_length * zeta_B2(spec, -0.5);
    s.sample();
    return s;
  }

  double total(const TangentialSpectrum& spec, double t, std::size_t cutoff = 64) const {
    return bulk_length * heat_trace_B2(spec, t, cutoff) /
               std::sqrt(4.0 * std::numbers::pi * t) +
           nonbulk(t);
  }
};

inline AssembledTrace operator-(const AssembledTrace& a, const AssembledTrace& b) {
  AssembledTrace d;
  d.bulk_length = a.bulk_length - b.bulk_length;
  d.nonbulk = [fa = a.nonbulk, fb = b.nonbulk](double t) { return fa(t) - fb(t); };
  d.nonbulk_expansion = a.nonbulk_expansion - b.nonbulk_expansion;
  d.nonbulk_expansion.dimension = 1;
  d.gap = std::min(a.gap, b.gap);
  return d;
}

inline AssembledTrace scaled(const AssembledTrace& a, double s) {
  AssembledTrace d = a;
  d.bulk_length *= s;
  d.nonbulk = [f = a.nonbulk, s](double t) { return s * f(t); };
  d.nonbulk_expansion *= s;
  return d;
}

/// Circle of circumference 2R times Y (first or second order give the same D^2).
inline AssembledTrace assemble_circle(const TangentialSpectrum& spec, double R,
                                      std::size_t cutoff = 64) {
  spec.require_invertible("assemble_circle");
  AssembledTrace a;
  a.bulk_length = 2.0 * R;
  a.nonbulk = [spec, R, cutoff](double t) {
    return theta_circle_nonbulk(t, 2.0 * R) * heat_trace_B2(spec, t, cutoff);
  };
  a.nonbulk_expansion.dimension = 1;
  a.gap = spec.lowest() * spec.lowest();
  return a;
}

/// Segment [0, R] x Y, second order, with Dirichlet/Neumann/chiral ends.
inline AssembledTrace assemble_second_order(const TangentialSpectrum& spec,
                                            const BoundaryProjection& left,
                                            const BoundaryProjection& right, double R,
                                            std::size_t cutoff = 64) {
  spec.require_invertible("assemble_second_order");
  // Per mode pair, channel c has scalar ends (left_c, right_c).
  double end_constant = 0.0;  // sum over both channels of the t^0 end terms
  bool any_mixed = false;
  for (int c = 0; c < 2; ++c) {
    const auto l = detail::scalar_channel(left, c);
    const auto r = detail::scalar_channel(right, c);
    if (l != r) any_mixed = true;
    end_constant += (l == detail::ScalarBC::Dirichlet ? -0.25 : 0.25);
    end_constant += (r == detail::ScalarBC::Dirichlet ? -0.25 : 0.25);
  }
  if (any_mixed) throw ConfigError("mixed Dirichlet/Neumann channels are not supported");
  AssembledTrace a;
  a.bulk_length = R;
  std::vector<int> channel_dirichlet;
  for (int c = 0; c < 2; ++c)
    channel_dirichlet.push_back(detail::scalar_channel(left, c) == detail::ScalarBC::Dirichlet);
  a.nonbulk = [spec, R, cutoff, channel_dirichlet](double t) {
    const double bulk = R / std::sqrt(4.0 * std::numbers::pi * t);
    double per_pair = 0.0;
    for (int d : channel_dirichlet)
      per_pair += (d ? theta_dirichlet(t, R) : theta_neumann(t, R)) - bulk;
    return 0.5 * per_pair * heat_trace_B2(spec, t, cutoff);
  };
  a.nonbulk_expansion = 0.5 * end_constant * heat_trace_B2_expansion(spec);
  a.nonbulk_expansion.dimension = 1;
  const double mu0 = spec.lowest();
  a.gap = mu0 * mu0;
  return a;
}

/// Segment [0, R] x Y, first order, Grassmannian ends. Modes below the cutoff
/// are solved per mode; the rest must carry the APS angle 0 at both ends and
/// are summed in closed form.
inline AssembledTrace assemble_segment(const TangentialSpectrum& spec,
                                       const BoundaryProjection& left,
                                       const BoundaryProjection& right, double R,
                                       std::size_t cutoff = 64) {
  spec.require_invertible("assemble_segment");
  if (!left.is_grassmannian() || !right.is_grassmannian())
    throw ConfigError("assemble_segment: ends must be Grassmannian");
  const auto modes = spec.modes(cutoff);
  const std::size_t K = modes.size();
  auto reduced = [](double a) {
    return std::remainder(a, 2.0 * std::numbers::pi);
  };
  if (spec.mode_count() > K) {
    if (std::abs(reduced(left.base_angle())) > 1e-15 || std::abs(reduced(right.base_angle())) > 1e-15)
      throw ConfigError("assemble_segment: modes beyond the cutoff must carry angle 0");
    for (std::size_t k = K; k < left.phases().size(); ++k)
      if (std::abs(left.phases()[k]) > 1e-14)
        throw ConfigError("assemble_segment: phases beyond the mode cutoff");
    for (std::size_t k = K; k < right.phases().size(); ++k)
      if (std::abs(right.phases()[k]) > 1e-14)
        throw ConfigError("assemble_segment: phases beyond the mode cutoff");
  }
  auto per_mode = std::make_shared<std::vector<SegmentModeTrace>>();
  std::vector<double> mult;
  AssembledTrace a;
  a.bulk_length = R;
  a.gap = std::numeric_limits<double>::infinity();
  AsymptoticExpansion e;
  for (std::size_t k = 0; k < K; ++k) {
    per_mode->emplace_back(modes[k].mu, R, left.angle(k), right.angle(k));
    mult.push_back(modes[k].multiplicity);
    e += per_mode->back().expansion() * static_cast<double>(modes[k].multiplicity);
    a.gap = std::min(a.gap, per_mode->back().gap());
  }
  a.gap = std::min(a.gap, spec.lowest() * spec.lowest());
  const bool has_tail = spec.mode_count() > K;
  if (has_tail) {
    // sum_{k >= K} m (-exp(-t mu^2) + erfc(mu sqrt t)), expansion by difference.
    AsymptoticExpansion head_g, head_e;
    for (const auto& m : modes) {
      head_g += series::exp_linear(-m.mu * m.mu) * static_cast<double>(m.multiplicity);
      head_e += series::erfc_sqrt(m.mu) * static_cast<double>(m.multiplicity);
    }
    e += (erfc_mode_sum_expansion(spec) - head_e) - (gaussian_mode_sum_expansion(spec) - head_g);
  }
  e.dimension = 1;
  a.nonbulk_expansion = e;
  a.nonbulk = [per_mode, mult, spec, K, has_tail](double t) {
    std::vector<double> terms;
    terms.reserve(per_mode->size() + 1);
    for (std::size_t k = 0; k < per_mode->size(); ++k)
      terms.push_back(mult[k] * (*per_mode)[k].nonbulk(t));
    if (has_tail) terms.push_back(erfc_mode_sum(spec, t, K) - gaussian_mode_sum(spec, t, K));
    return pairwise_sum(terms);
  };
  return a;
}

/// Bridge to the zeta engine: merged per-mode data for a template problem.
/// The returned samples carry the non-bulk trace with its analytic expansion
/// and the bulk contribution in closed form; `eigenvalues` lists the first
/// per_mode_count eigenvalues of every mode below the cutoff, repeated by
/// multiplicity (D^2 eigenvalues for second order, D eigenvalues for first).
struct AssembledInputs {
  HeatTraceSamples samples;
  AssembledTrace trace;
  std::vector<double> eigenvalues;
  /// Bound on the error from replacing modes with mu R > 40 by their
  /// half-cylinder forms.
  double substitution_bound = 0.0;
};

inline AssembledInputs assemble_zeta_inputs(const TangentialSpectrum& spec,
                                            const ModeProblem& tmpl, std::size_t mode_cutoff,
                                            std::size_t per_mode_count) {
  spec.require_invertible("assemble_zeta_inputs");
  AssembledInputs out;
  if (tmpl.topology == Topology::Circle)
    out.trace = assemble_circle(spec, tmpl.R, mode_cutoff);
  else if (tmpl.order == OperatorOrder::Second)
    out.trace = assemble_second_order(spec, tmpl.left, tmpl.right, tmpl.R, mode_cutoff);
  else
    out.trace = assemble_segment(spec, tmpl.left, tmpl.right, tmpl.R, mode_cutoff);
  out.samples = out.trace.samples(spec);
  out.samples.closed_zeta0 = 0.0;
  const auto modes = spec.modes(mode_cutoff);
  for (std::size_t k = 0; k < modes.size(); ++k) {
    ModeProblem p = tmpl;
    p.mu = modes[k].mu;
    p.mode_index = k;
    if (tmpl.order == OperatorOrder::First && tmpl.topology == Topology::Segment &&
        p.mu * p.R > SegmentModeTrace::kTailMuR) {
      out.substitution_bound += modes[k].multiplicity * std::exp(-2.0 * p.mu * p.R);
      continue;
    }
    const auto ev = mode_spectrum(p, per_mode_count);
    for (int j = 0; j < modes[k].multiplicity; ++j)
      out.eigenvalues.insert(out.eigenvalues.end(), ev.begin(), ev.end());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Calderon projection and the canonical determinant

enum class HalfLineSide { Positive, Negative };

/// Chiral coordinates (c_+, c_-) of a vector in the basis (phi, G phi), with
/// e_+ = (1, -i)/sqrt 2 and e_- = (1, i)/sqrt 2.
inline std::pair<std::complex<double>, std::complex<double>> chiral_coordinates(
    const Eigen::Vector2d& x) {
  using cd = std::complex<double>;
  const double s = 1.0 / std::sqrt(2.0);
  const cd c_plus = s * (x(0) + cd(0.0, 1.0) * x(1));
  const cd c_minus = s * (x(0) - cd(0.0, 1.0) * x(1));
  return {c_plus, c_minus};
}

/// K scalar of the Cauchy data of (d/du + B) f = 0 on the half-line. The
/// L^2 solution is exp(-mu u) phi on u >= 0 and exp(mu u) G phi on u <= 0.
inline std::complex<double> calderon_graph(const ModePair& mode, HalfLineSide side) {
  // Propagate both basis vectors over one unit and keep the decaying one.
  const Eigen::Matrix2d step = mode_propagator(mode.mu, 0.0, 1.0);
  const double sign = side == HalfLineSide::Positive ? 1.0 : -1.0;
  Eigen::Vector2d best;
  double best_growth = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 2; ++i) {
    Eigen::Vector2d e = Eigen::Vector2d::Zero();
    e(i) = 1.0;
    const Eigen::Vector2d moved = sign > 0 ? (step * e).eval() : step.inverse() * e;
    if (moved.norm() < best_growth) {
      best_growth = moved.norm();
      best = e;
    }
  }
  const auto [cp, cm] = chiral_coordinates(best);
  return cm / cp;
}

/// The unitary T of a Grassmannian angle: the projection is the graph of T.
inline std::complex<double> grassmann_T(double theta) { return std::polar(1.0, theta); }

/// P in chiral coordinates: (1/2) [[1, T^{-1}], [T, 1]].
inline Eigen::Matrix2cd chiral_projection(std::complex<double> T) {
  Eigen::Matrix2cd p;
  p << 1.0, 1.0 / T, T, 1.0;
  return 0.5 * p;
}

/// Basis change from (phi, G phi) to chiral coordinates.
inline Eigen::Matrix2cd chiral_basis_change() {
  using cd = std::complex<double>;
  const double s = 1.0 / std::sqrt(2.0);
  Eigen::Matrix2cd c;
  c << s, s * cd(0.0, 1.0), s, -s * cd(0.0, 1.0);
  return c;
}

/// U(P) = diag(1, T K^{-1}) in chiral coordinates.
inline Eigen::Matrix2cd unitary_U(std::complex<double> T, std::complex<double> K) {
  Eigen::Matrix2cd u = Eigen::Matrix2cd::Zero();
  u(0, 0) = 1.0;
  u(1, 1) = T / K;
  return u;
}

/// Mode-diagonal point of the Grassmannian: phases T_k relative to K_k.
struct GrassmannPoint {
  struct Entry {
    std::complex<double> T{1.0, 0.0};
    std::complex<double> K{1.0, 0.0};
    int multiplicity = 1;
  };
  std::vector<Entry> entries;

  /// T_k = K_k exp(i theta_k) on the first modes of spec (u >= 0 side).
  static GrassmannPoint from_phases(const TangentialSpectrum& spec,
                                    const std::vector<double>& thetas) {
    GrassmannPoint p;
    const auto modes = spec.modes(thetas.size());
    if (modes.size() < thetas.size()) throw ConfigError("more phases than modes");
    for (std::size_t k = 0; k < thetas.size(); ++k) {
      const auto K = calderon_graph(ModePair(modes[k].mu), HalfLineSide::Positive);
      p.entries.push_back({K * std::polar(1.0, thetas[k]), K, modes[k].multiplicity});
    }
    p.validate();
    return p;
  }

  void validate() const {
    for (const auto& e : entries) {
      if (std::abs(std::abs(e.T) - 1.0) > 1e-12 || std::abs(std::abs(e.K) - 1.0) > 1e-12)
        throw DomainError("GrassmannPoint: T and K must be unitary scalars");
    }
  }
};

/// det_Fr((Id + K T^{-1})/2) over the modes of the point.
inline FredholmResult canonical_determinant(const GrassmannPoint& point) {
  std::vector<std::complex<double>> dev;
  for (const auto& e : point.entries)
    for (int j = 0; j < e.multiplicity; ++j) dev.push_back(0.5 * (1.0 + e.K / e.T) - 1.0);
  return fredholm_det(dev);
}

/// Boundary block at lambda = 0 for the half model [0, R] with the far end
/// fixed at angle theta_far: rows are the constraint of P at u = 0 and the far
/// constraint transported to u = 0, normalized.
inline Eigen::Matrix2d boundary_block(double mu, double R, double theta_near, double theta_far) {
  const Eigen::RowVector2d p_row(std::cos(0.5 * theta_near), -std::sin(0.5 * theta_near));
  const double b = 0.5 * theta_far;
  const Eigen::RowVector2d w(-std::sin(b), std::cos(b));
  Eigen::RowVector2d q = w * mode_propagator(mu, 0.0, R);
  q /= q.norm();
  Eigen::Matrix2d s;
  s.row(0) = p_row;
  s.row(1) = q;
  return s;
}

}  // namespace detlab
