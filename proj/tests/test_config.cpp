#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "detlab/config.hpp"

using namespace detlab;
using namespace detlab::config;
using Catch::Matchers::WithinAbs;

namespace {
constexpr double pi = std::numbers::pi;
}

TEST_CASE("numbers with pi") {
  CHECK(parse_number("1.5") == 1.5);
  CHECK(parse_number(" -2 ") == -2.0);
  CHECK(parse_number("pi") == pi);
  CHECK_THAT(parse_number("pi/2"), WithinAbs(pi / 2.0, 1e-15));
  CHECK_THAT(parse_number("2*pi/3"), WithinAbs(2.0 * pi / 3.0, 1e-15));
  CHECK_THAT(parse_number("-pi/4"), WithinAbs(-pi / 4.0, 1e-15));
  CHECK(parse_number("1e-3") == 1e-3);
  CHECK_THROWS_AS(parse_number(""), ConfigError);
  CHECK_THROWS_AS(parse_number("abc"), ConfigError);
  CHECK_THROWS_AS(parse_number("2pi"), ConfigError);
  CHECK_THROWS_AS(parse_number("pi*2"), ConfigError);
}

TEST_CASE("lists") {
  CHECK(parse_list("1, 2, 4") == std::vector<double>{1, 2, 4});
  CHECK(parse_list("[1,2]") == std::vector<double>{1, 2});
  CHECK(parse_list("[]").empty());
  CHECK(parse_list("").empty());
  const auto g = parse_list("geometric(0.5, 0.5, 3)");
  REQUIRE(g.size() == 3);
  CHECK(g[2] == 0.125);
  CHECK_THROWS_AS(parse_list("geometric(1, 2)"), ConfigError);
  CHECK_THROWS_AS(parse_list("geometric(1, 2, 2.5)"), ConfigError);
  CHECK_THROWS_AS(parse_list("[1, 2"), ConfigError);
}

TEST_CASE("spectra and projections") {
  const auto s = parse_spectrum("arithmetic(0.5, 2, 3)");
  CHECK(s.is_arithmetic());
  CHECK(s.mode(1).mu == 2.5);
  CHECK(s.mode(1).multiplicity == 3);
  const auto e = parse_spectrum("explicit(1, 2.5)");
  CHECK(e.mode_count() == 2);
  const auto eb = parse_spectrum("explicit([1, 2.5, 4])");
  CHECK(eb.mode_count() == 3);
  CHECK(eb.mode(2).mu == 4.0);
  CHECK_THROWS_AS(parse_spectrum("explicit()"), ConfigError);
  CHECK_THROWS_AS(parse_spectrum("explicit([])"), ConfigError);
  CHECK_THROWS_AS(parse_spectrum("geometric(1, 2)"), ConfigError);

  CHECK(parse_projection("dirichlet").kind() == ProjectionKind::Dirichlet);
  CHECK(parse_projection("chiral_minus").kind() == ProjectionKind::ChiralMinus);
  const auto sg = parse_projection("sigma(pi/2, 0.1)");
  CHECK_THAT(sg.angle(0), WithinAbs(pi / 2.0, 1e-15));
  CHECK_THAT(sg.angle(1), WithinAbs(0.1, 1e-15));
  const auto r = parse_projection("rotated(aps_neg, theta=[0.2, 0.3])");
  CHECK(r.base() == ProjectionKind::APSneg);
  CHECK_THAT(r.phase(1), WithinAbs(0.3, 1e-15));
  CHECK_THROWS_AS(parse_projection("rotated(dirichlet, theta=[0.2])"), ConfigError);
  CHECK_THROWS_AS(parse_projection("bogus"), ConfigError);
}

TEST_CASE("config text: comments, whitespace and overrides") {
  const auto raw = parse_text("# header\n  R_grid = 1, 2   # trailing\n\nmode_cutoff=16\n");
  CHECK(raw.size() == 2);
  CHECK(raw.at("R_grid") == "1, 2");
  const auto rc = build(raw);
  CHECK(rc.experiment.R_grid == std::vector<double>{1, 2});
  CHECK(rc.experiment.mode_cutoff == 16);
  CHECK(rc.experiment.theta.size() == 30);
  CHECK_THAT(rc.experiment.theta[0], WithinAbs(std::exp(-1.0), 1e-15));
  const auto [k, v] = parse_assignment("spectrum=arithmetic(1,1)");
  CHECK(k == "spectrum");
  CHECK(v == "arithmetic(1,1)");
}

TEST_CASE("kernel dimension is stored on the spectrum") {
  CHECK(build({{"kernel_dim", "0"}}).experiment.spectrum.kernel_dimension() == 0);
  const auto rc = build({{"kernel_dim", "2"}, {"spectrum", "explicit([1, 2])"}});
  CHECK(rc.experiment.spectrum.kernel_dimension() == 2);
  CHECK_THROWS_AS(rc.experiment.spectrum.require_invertible("test"), InvertibilityError);
}

TEST_CASE("config errors") {
  CHECK_THROWS_AS(parse_text("no equals sign\n"), ConfigError);
  CHECK_THROWS_AS(parse_text("= 3\n"), ConfigError);
  CHECK_THROWS_AS(build({{"unknown_key", "1"}}), ConfigError);
  CHECK_THROWS_AS(build({{"R_grid", "2, 1"}}), ConfigError);
  CHECK_THROWS_AS(build({{"mode_cutoff", "1.5"}}), ConfigError);
  CHECK_THROWS_AS(build({{"parallel", "maybe"}}), ConfigError);
  CHECK_THROWS_AS(build({{"p1", "dirichlet"}}), ConfigError);
  CHECK_THROWS_AS(parse_file("/nonexistent/base.cfg"), ConfigError);
}

TEST_CASE("sample config parses") {
  const auto rc = build(parse_file(DETLAB_SOURCE_DIR "/configs/base.cfg"));
  CHECK(rc.experiment.R_grid == std::vector<double>{1, 2, 4, 8});
  CHECK(rc.experiment.theta.size() == 30);
  CHECK_THAT(rc.experiment.sw_phases.at(0), WithinAbs(pi / 3.0, 1e-15));
}
