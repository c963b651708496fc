#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "detlab/decomposition_lab.hpp"
#include "detlab/experiments.hpp"
#include "oracles.hpp"

using namespace detlab;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {
constexpr double pi = std::numbers::pi;

ExperimentConfig quick(std::vector<double> grid = {1.0, 2.0}) {
  ExperimentConfig c;
  c.R_grid = std::move(grid);
  return c;
}
}  // namespace

TEST_CASE("Dirichlet split ratio is det_zeta(B0^2)") {
  const auto r = run_dirichlet_split(quick());
  CHECK(r.report.passed);
  CHECK_THAT(r.predicted_limit, WithinRel(4.0 * pi * pi, 1e-10));
  for (const auto& row : r.rows) CHECK_THAT(row.ratio, WithinRel(4.0 * pi * pi, 1e-6));
}

TEST_CASE("single cut mode mu = 1 gives Dirichlet ratio 1") {
  auto c = quick();
  c.spectrum = TangentialSpectrum::explicit_values({1.0});
  const auto r = run_dirichlet_split(c);
  CHECK(r.report.passed);
  for (const auto& row : r.rows) CHECK_THAT(row.ratio, WithinAbs(1.0, 1e-6));
}

TEST_CASE("Dirichlet and Neumann ratios are reciprocal") {
  auto c = quick();
  c.spectrum = TangentialSpectrum::arithmetic(0.5, 0.75, 2);
  const auto d = run_dirichlet_split(c);
  const auto n = run_neumann_split(c);
  CHECK(d.report.passed);
  CHECK(n.report.passed);
  for (std::size_t i = 0; i < d.rows.size(); ++i)
    CHECK_THAT(d.rows[i].ratio * n.rows[i].ratio, WithinAbs(1.0, 1e-6));
}

TEST_CASE("chiral ratio is 1 at every cutoff") {
  for (std::size_t cutoff : {8u, 64u}) {
    auto c = quick();
    c.mode_cutoff = cutoff;
    const auto r = run_chiral_split(c);
    CHECK(r.report.passed);
    for (const auto& row : r.rows) CHECK_THAT(row.ratio, WithinAbs(1.0, 1e-8));
  }
}

TEST_CASE("APS split ratio matches the exact finite-R product") {
  for (double a : {1.0, 0.5}) {
    auto c = quick({1.0, 2.0, 4.0, 8.0});
    c.spectrum = TangentialSpectrum::arithmetic(a, 1.0);
    const auto r = run_aps_split(c);
    CHECK_THAT(r.predicted_limit, WithinRel(std::pow(2.0, -2.0 * 2.0 * (0.5 - a)), 1e-10));
    for (const auto& row : r.rows) {
      INFO("a=" << a << " R=" << row.R);
      CHECK_THAT(row.ratio, WithinRel(oracle::aps_split_exact(a, 1.0, 1, row.R), 1e-6));
    }
    CHECK(r.converged);
    CHECK(r.report.scalars.at("deviation_decreasing") == 1.0);
  }
}

TEST_CASE("eta experiments vanish mod Z") {
  const auto rep = run_eta_experiments(quick());
  CHECK(rep.passed);
  for (std::size_t i = 0; i < rep.rows.size(); ++i) {
    CHECK(rep.at(i, "eta_circle") == 0.0);
    CHECK(std::abs(rep.at(i, "residue")) < 1e-6);
  }
}

TEST_CASE("eta variation: one rotated mode shifts by theta/pi") {
  const auto rep = run_eta_variation(quick(), {pi / 2.0});
  CHECK(rep.passed);
  CHECK_THAT(rep.scalars.at("predicted_shift"), WithinAbs(0.5, 1e-15));
  for (std::size_t i = 0; i < rep.rows.size(); ++i) CHECK(std::abs(rep.at(i, "residue")) < 1e-4);
}

TEST_CASE("eta variation: geometric phases") {
  std::vector<double> theta;
  for (int k = 1; k <= 30; ++k) theta.push_back(std::exp(-k));
  const auto rep = run_eta_variation(quick({2.0}), theta);
  CHECK(rep.passed);
  CHECK_THAT(rep.scalars.at("predicted_shift"), WithinAbs(1.0 / (pi * (std::exp(1.0) - 1.0)), 1e-12));
}

TEST_CASE("eta gluing with mixed projections") {
  const auto rep = run_eta_gluing_mixed(quick(), BoundaryProjection::sigma({0.4, 0.1}),
                                        BoundaryProjection::sigma({-0.3}));
  CHECK(rep.passed);
}

TEST_CASE("zeta ratio equals |canonical determinant|^2") {
  const auto rep = run_sw_check(quick(), {pi / 3.0});
  CHECK(rep.passed);
  for (std::size_t i = 0; i < rep.rows.size(); ++i)
    CHECK_THAT(rep.at(i, "zeta_ratio"), WithinRel(0.75, 1e-4));
  CHECK_THAT(rep.scalars.at("canonical_im"), WithinAbs(-std::sqrt(3.0) / 4.0, 1e-12));
}

TEST_CASE("singular canonical determinant co-occurs with a zero secular root") {
  const auto rep = run_sw_check(quick(), {pi});
  CHECK(rep.passed);
  CHECK(rep.scalars.at("singular") == 1.0);
  for (std::size_t i = 0; i < rep.rows.size(); ++i) CHECK(rep.at(i, "secular_singular") == 1.0);
}

TEST_CASE("R-independence of the sigma determinant ratio") {
  const auto rep = run_r_independence(quick({1.0, 2.0, 4.0}), BoundaryProjection::sigma({pi / 2.0}),
                                      BoundaryProjection::sigma({}));
  CHECK(rep.passed);
  CHECK(rep.scalars.at("max_relative_change") < 1e-6);
  CHECK(rep.scalars.at("block_gap") < 1e-10);
}

TEST_CASE("glued parametrix error decays") {
  const auto rep = run_error_decay(ExperimentConfig{});
  CHECK(rep.passed);
  CHECK(rep.scalars.at("slope") < 0.0);
}

TEST_CASE("report access and config validation") {
  const auto rep = run_error_decay(ExperimentConfig{});
  CHECK_THROWS_AS(rep.at(0, "missing"), DomainError);
  ExperimentConfig c;
  c.R_grid = {2.0, 1.0};
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = ExperimentConfig{};
  c.mode_cutoff = 2;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = ExperimentConfig{};
  c.decay_R_grid = {1.0};
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("registry lists every experiment once and CSV output is stable") {
  const auto& reg = experiment_registry();
  CHECK(reg.size() == 10);
  CHECK_THROWS_AS(find_experiment("nonexistent"), ConfigError);
  const auto rep = find_experiment("error_decay").run(ExperimentConfig{});
  std::ostringstream a, b;
  write_csv(a, rep);
  write_csv(b, find_experiment("error_decay").run(ExperimentConfig{}));
  CHECK(a.str() == b.str());
  CHECK(a.str().rfind("R,R2_over_t,", 0) == 0);
  CHECK(format_value(0.1) == "1.0000000000000001e-01");
}
