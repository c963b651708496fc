#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "detlab/spectral_model.hpp"
#include "generators.hpp"
#include "oracles.hpp"

using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
using detlab::TangentialSpectrum;

TEST_CASE("arithmetic(1,1): det_zeta(B0^2) = (2 pi)^2") {
  const auto s = TangentialSpectrum::arithmetic(1.0, 1.0);
  CHECK_THAT(detlab::det_zeta_B2(s), WithinRel(std::pow(2.0 * std::numbers::pi, 2), 1e-12));
  CHECK_THAT(detlab::zeta_B2(s, 0.0), WithinAbs(-1.0, 1e-13));
}

TEST_CASE("arithmetic(1/2,1): zeta_{B^2}(0) = 0 and det = 4") {
  const auto s = TangentialSpectrum::arithmetic(0.5, 1.0);
  CHECK_THAT(detlab::zeta_B2(s, 0.0), WithinAbs(0.0, 1e-13));
  // prod over +-(k + 1/2) regularizes to 2, squared over both signs.
  CHECK_THAT(detlab::det_zeta_B2(s), WithinRel(4.0, 1e-12));
}

TEST_CASE("zeta_{B^2} has its pole at s = 1/2 with residue m/d") {
  const auto s = TangentialSpectrum::arithmetic(1.0, 2.0, 3);
  try {
    (void)detlab::zeta_B2(s, 0.5);
    FAIL("expected a pole");
  } catch (const detlab::PoleError& e) {
    CHECK_THAT(e.residue(), WithinRel(1.5, 1e-15));
  }
}

TEST_CASE("finite spectra: zeta and determinant are elementary") {
  const auto s = TangentialSpectrum::explicit_modes({{2.0, 1}, {3.0, 2}});
  CHECK_THAT(detlab::zeta_B2(s, 0.0), WithinAbs(6.0, 1e-14));
  CHECK_THAT(detlab::det_zeta_B2(s), WithinRel(std::pow(4.0, 2) * std::pow(9.0, 4), 1e-13));
  CHECK_THAT(detlab::zeta_B2(s, -0.5), WithinRel(2.0 * (2.0 + 2.0 * 3.0), 1e-14));
}

TEST_CASE("heat trace of B^2 matches brute force on random arithmetic families") {
  detlab_test::Gen g(21);
  for (int i = 0; i < 100; ++i) {
    const double a = g.uniform(0.1, 3.0), d = g.uniform(0.2, 2.0);
    const int m = g.integer(1, 3);
    const double t = g.log_uniform(1e-3, 5.0);
    const auto s = TangentialSpectrum::arithmetic(a, d, m);
    CHECK_THAT(detlab::heat_trace_B2(s, t, 64), WithinRel(oracle::heat_B2(a, d, m, t), 1e-11));
  }
}

TEST_CASE("Gaussian family expansion agrees with the sum at small t") {
  const auto s = TangentialSpectrum::arithmetic(0.7, 1.3, 2);
  const auto e = detlab::gaussian_mode_sum_expansion(s);
  for (double t : {1e-4, 1e-3, 1e-2}) {
    const double lead = e.evaluate(t);
    CHECK_THAT(lead, WithinRel(oracle::gaussian_family(0.7, 1.3, 2, t), 1e-9));
  }
}

TEST_CASE("erfc family matches brute force") {
  detlab_test::Gen g(22);
  for (int i = 0; i < 30; ++i) {
    const double a = g.uniform(0.2, 2.0), d = g.uniform(0.3, 2.0);
    const double t = g.log_uniform(1e-3, 2.0);
    const auto s = TangentialSpectrum::arithmetic(a, d, 1);
    double brute = 0.0;
    for (int k = 0; k < 2000000; ++k) {
      const double x = std::erfc((a + k * d) * std::sqrt(t));
      brute += x;
      if (x < 1e-22) break;
    }
    CHECK_THAT(detlab::erfc_mode_sum(s, t), WithinRel(brute, 1e-10));
  }
}

TEST_CASE("kernel dimension makes the spectrum non-invertible") {
  const auto s = TangentialSpectrum::arithmetic(1.0, 1.0).with_kernel_dimension(2);
  CHECK_THROWS_AS(detlab::det_zeta_B2(s), detlab::InvertibilityError);
  CHECK_THROWS_AS(TangentialSpectrum::arithmetic(-1.0, 1.0), detlab::DomainError);
  CHECK_THROWS_AS(TangentialSpectrum::explicit_values({2.0, 1.0}), detlab::DomainError);
}

TEST_CASE("mode pair: G anticommutes with B and squares to -1") {
  const detlab::ModePair p(1.7);
  const Eigen::Matrix2d B = p.b_matrix(), G = detlab::ModePair::g_matrix();
  CHECK((G * B + B * G).norm() < 1e-15);
  CHECK((G * G + Eigen::Matrix2d::Identity()).norm() < 1e-15);
  const auto full = TangentialSpectrum::explicit_modes({{1.0, 2}}).full_spectrum(4);
  CHECK(full.size() == 4);
  CHECK(full[0] + full[1] == 0.0);
  CHECK(TangentialSpectrum::arithmetic(1.0, 1.0).doubled().multiplicity() == 2);
}
