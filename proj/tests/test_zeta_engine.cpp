#include <catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <fstream>
#include <numbers>

#include "detlab/cylinder_heat.hpp"
#include "detlab/zeta_engine.hpp"
#include "generators.hpp"
#include "oracles.hpp"

using namespace detlab;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

EigenvalueStream dirichlet_stream(double m, double L) {
  return {[m, L](std::size_t i) {
    const double k = (static_cast<double>(i) + 1.0) * std::numbers::pi / L;
    return k * k + m * m;
  }};
}

// Analytic expansion of e^{-t m^2} (L / sqrt(4 pi t) - 1/2).
AsymptoticExpansion dirichlet_expansion(double m, double L) {
  auto e = (AsymptoticExpansion::monomial(-1, L / std::sqrt(4.0 * std::numbers::pi)) +
            AsymptoticExpansion::monomial(0, -0.5)) *
           series::exp_linear(-m * m);
  e.dimension = 1;
  return e;
}

}  // namespace

TEST_CASE("Dirichlet -d^2 + 1 on [0,1] via fitted expansion") {
  auto s = HeatTraceSamples::from_eigenvalues(dirichlet_stream(1.0, 1.0), 1);
  const auto r = zeta_from_trace(s, 1.0);
  CHECK_THAT(r.det_zeta, WithinRel(std::exp(-oracle::dirichlet_zeta_prime(1.0, 1.0)), 1e-8));
  CHECK_THAT(r.det_zeta, WithinRel(2.0 * std::sinh(1.0), 1e-8));
  CHECK_THAT(r.zeta_at_0, WithinAbs(-0.5, 1e-6));
}

TEST_CASE("fit: free segment leading coefficient and Dirichlet boundary constant") {
  const double L = 1.7;
  auto free = HeatTraceSamples::from_function(
      [L](double t) { return L / std::sqrt(4.0 * std::numbers::pi * t); }, 1, 1.0);
  const auto ef = fit_small_time(free, 4);
  CHECK_THAT(ef.a(0), WithinRel(L / std::sqrt(4.0 * std::numbers::pi), 1e-10));
  auto dir = HeatTraceSamples::from_function([L](double t) { return theta_dirichlet(t, L); }, 1,
                                             std::pow(std::numbers::pi / L, 2));
  const auto ed = fit_small_time(dir, 4);
  CHECK_THAT(ed.coefficient(0), WithinAbs(-0.5, 1e-4));
}

TEST_CASE("fit: a single exponential is flagged pure-exponential") {
  auto s = HeatTraceSamples::from_function([](double t) { return std::exp(-2.0 * t); }, 1, 2.0);
  const auto e = fit_small_time(s, 4);
  CHECK(e.pure_exponential);
  CHECK_THAT(e.coefficient(0), WithinAbs(1.0, 1e-10));
}

TEST_CASE("fit: too few small-time samples is a config error") {
  auto s = HeatTraceSamples::from_function([](double t) { return std::exp(-t); }, 1, 1.0);
  CHECK_THROWS_AS(fit_small_time(s, 20), ConfigError);
}

TEST_CASE("single eigenvalue 2") {
  auto s = HeatTraceSamples::from_eigenvalues(EigenvalueStream::finite({2.0}), 0);
  const auto r = zeta_from_trace(s);
  CHECK_THAT(r.zeta_at_0, WithinAbs(1.0, 1e-12));
  CHECK_THAT(r.zeta_prime_at_0, WithinAbs(-std::log(2.0), 1e-10));
  CHECK_THAT(r.det_zeta, WithinRel(2.0, 1e-10));
}

TEST_CASE("invertibility and split-point range are checked") {
  auto s = HeatTraceSamples::from_function([](double t) { return std::exp(-t); }, 0, 0.0);
  CHECK_THROWS_AS(zeta_from_trace(s, AsymptoticExpansion{}, 1.0), InvertibilityError);
  auto ok = HeatTraceSamples::from_function([](double t) { return std::exp(-t); }, 0, 1.0);
  CHECK_THROWS_AS(zeta_from_trace(ok, AsymptoticExpansion{}, 1e3), ConfigError);
}

TEST_CASE("zeta(0) = -1/2 for Dirichlet problems with mass") {
  detlab_test::Gen g(31);
  for (int i = 0; i < 10; ++i) {
    const double m = g.uniform(0.2, 3.0), L = g.uniform(0.5, 4.0);
    auto s = HeatTraceSamples::from_function(
        [m, L](double t) { return std::exp(-t * m * m) * theta_dirichlet(t, L); }, 1, m * m);
    const auto r = zeta_from_trace(s, 1.0);
    CHECK_THAT(r.zeta_at_0, WithinAbs(-0.5, 1e-6));
    CHECK_THAT(r.zeta_prime_at_0, WithinAbs(oracle::dirichlet_zeta_prime(m, L), 1e-6));
    const auto ra = zeta_from_trace(s, dirichlet_expansion(m, L), 1.0);
    CHECK_THAT(ra.zeta_prime_at_0, WithinAbs(oracle::dirichlet_zeta_prime(m, L), 1e-9));
  }
}

TEST_CASE("eta from finite spectra") {
  CHECK(eta_from_spectrum(std::vector<double>{1.0, -2.0}).eta_at_0 == 0.0);
  CHECK(eta_from_spectrum(std::vector<double>{1.0, 2.0, -3.0}).eta_at_0 == 1.0);
  CHECK(eta_from_spectrum(std::vector<double>{1.5, -1.5, 2.5, -2.5}).eta_at_0 == 0.0);
  CHECK_THROWS_AS(eta_from_spectrum(std::vector<double>{1.0, 0.0}), DomainError);
  const std::vector<double> ev{1.0, 2.0, -3.0};
  CHECK_THAT(eta_heat_integral(ev).eta_at_0, WithinAbs(1.0, 1e-9));
}

TEST_CASE("eta additivity on disjoint finite spectra") {
  detlab_test::Gen g(32);
  for (int i = 0; i < 100; ++i) {
    auto a = g.signed_values(g.integer(1, 8), 0.1, 10.0);
    auto b = g.signed_values(g.integer(1, 8), 0.1, 10.0);
    auto ab = a;
    ab.insert(ab.end(), b.begin(), b.end());
    CHECK(eta_from_spectrum(ab).eta_at_0 == eta_from_spectrum(a).eta_at_0 + eta_from_spectrum(b).eta_at_0);
  }
}

TEST_CASE("eta offsets from root asymptotics") {
  // x_n = (pi / R)(n + c) + a / x_n: eta = c_- - c_+.
  const double R = 2.0, cp = 0.3, cm = 0.55;
  std::vector<double> pos, neg;
  for (int n = 0; n < 200; ++n) {
    const double xp = std::numbers::pi / R * (n + cp), xn = std::numbers::pi / R * (n + cm);
    pos.push_back(xp + 0.2 / (xp + 1.0));
    neg.push_back(xn + 0.2 / (xn + 1.0));
  }
  const auto e = eta_from_mode_roots(pos, neg, R);
  CHECK_THAT(e.eta_at_0, WithinAbs(cm - cp, 1e-7));
}

TEST_CASE("fredholm determinant") {
  std::vector<std::complex<double>> d;
  double alpha_sum = 0.0;
  for (int k = 1; k <= 60; ++k) {
    const double a = std::pow(2.0, -k);
    alpha_sum += a;
    d.emplace_back(std::expm1(a), 0.0);
  }
  CHECK_THAT(fredholm_det(d).value.real(), WithinRel(std::exp(alpha_sum), 1e-14));
  CHECK(fredholm_det(std::vector<std::complex<double>>(5, 0.0)).value == std::complex<double>(1.0, 0.0));
  const auto s = fredholm_det(std::vector<std::complex<double>>{{0.5, 0.0}, {-1.0, 0.0}});
  CHECK(s.singular);
  CHECK(s.value == std::complex<double>(0.0, 0.0));
}

TEST_CASE("Duhamel consistency: d/dr ln det(Delta e^{r alpha}) = Tr alpha") {
  const double m = 1.0, L = 1.0;
  std::vector<double> alpha;
  double tr = 0.0;
  for (int k = 1; k <= 25; ++k) {
    alpha.push_back(std::exp(-k));
    tr += alpha.back();
  }
  auto log_det = [&](double r) {
    auto trace = [&, r](double t) {
      double acc = std::exp(-t * m * m) * theta_dirichlet(t, L);
      for (std::size_t i = 0; i < alpha.size(); ++i) {
        const double k = (i + 1.0) * std::numbers::pi / L;
        const double lam = k * k + m * m;
        acc += std::exp(-t * lam * std::exp(r * alpha[i])) - std::exp(-t * lam);
      }
      return acc;
    };
    auto e = dirichlet_expansion(m, L);
    for (std::size_t i = 0; i < alpha.size(); ++i) {
      const double k = (i + 1.0) * std::numbers::pi / L;
      const double lam = k * k + m * m;
      e += series::exp_linear(-lam * std::exp(r * alpha[i])) - series::exp_linear(-lam);
    }
    auto s = HeatTraceSamples::from_function(trace, 1, 0.5 * (std::pow(std::numbers::pi / L, 2) + m * m));
    return -zeta_from_trace(s, e, 1.0).zeta_prime_at_0;
  };
  const double h = 1e-3;
  const double deriv = (log_det(h) - log_det(-h)) / (2.0 * h);
  CHECK_THAT(deriv, WithinAbs(tr, 1e-6));
}

TEST_CASE("det_zeta of the Dirac operator uses the minus-sign branch") {
  const auto d = det_zeta_dirac(1.0, -2.0 * std::log(3.0), 1.0);
  CHECK_THAT(std::abs(d), WithinRel(3.0, 1e-14));
  CHECK_THAT(std::arg(d), WithinAbs(0.0, 1e-15));
  const auto e = det_zeta_dirac(0.0, 0.0, 1.0);
  CHECK_THAT(std::arg(e), WithinAbs(-0.5 * std::numbers::pi, 1e-15));
}

TEST_CASE("trace dump CSV has the audit columns") {
  auto s = HeatTraceSamples::from_eigenvalues(EigenvalueStream::finite({1.0, 3.0}), 0);
  const std::string path = "trace_dump_test.csv";
  write_trace_dump(path, s, *s.declared_expansion);
  std::ifstream f(path);
  std::string header;
  std::getline(f, header);
  CHECK(header == "t,trace,subtracted");
}
