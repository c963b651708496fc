#pragma once

#include <cstdio>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "detlab/decomposition_lab.hpp"
#include "detlab/errors.hpp"

namespace detlab {

struct ExperimentEntry {
  std::string name;
  std::string description;
  std::function<ExperimentReport(const ExperimentConfig&)> run;
};

/// Every experiment the CLI can dispatch, in a fixed order.
inline const std::vector<ExperimentEntry>& experiment_registry() {
  static const std::vector<ExperimentEntry> entries{
      {"dirichlet_split", "Dirichlet split ratio against det_zeta(B0^2)",
       [](const ExperimentConfig& c) { return run_dirichlet_split(c).report; }},
      {"neumann_split", "Neumann split ratio against 1/det_zeta(B0^2)",
       [](const ExperimentConfig& c) { return run_neumann_split(c).report; }},
      {"chiral_split", "chiral split ratio against 1",
       [](const ExperimentConfig& c) { return run_chiral_split(c).report; }},
      {"aps_split", "APS split ratio converging to 2^{-zeta_{B^2}(0)}",
       [](const ExperimentConfig& c) { return run_aps_split(c).report; }},
      {"eta_experiments", "circle eta and the APS piece sum, mod Z",
       [](const ExperimentConfig& c) { return run_eta_experiments(c); }},
      {"eta_variation", "eta shift under a phase rotation against Tr(theta)/pi mod Z",
       [](const ExperimentConfig& c) { return run_eta_variation(c, c.theta); }},
      {"eta_gluing_mixed", "eta gluing with the middle cylinder term, mod Z",
       [](const ExperimentConfig& c) { return run_eta_gluing_mixed(c, c.p1, c.p2); }},
      {"sw_check", "zeta ratio against |canonical determinant|^2",
       [](const ExperimentConfig& c) { return run_sw_check(c, c.sw_phases); }},
      {"r_independence", "determinant ratio for two sigma data, constant in R",
       [](const ExperimentConfig& c) {
         return run_r_independence(c, BoundaryProjection::sigma(c.sigma1),
                                   BoundaryProjection::sigma(c.sigma2));
       }},
      {"error_decay", "glued parametrix residual against its bound",
       [](const ExperimentConfig& c) { return run_error_decay(c); }},
  };
  return entries;
}

inline const ExperimentEntry& find_experiment(const std::string& name) {
  for (const auto& e : experiment_registry())
    if (e.name == name) return e;
  throw ConfigError("unknown experiment: " + name);
}

/// 17 significant digits in scientific notation.
inline std::string format_value(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

/// CSV body: header row of column names, then one line per row.
inline void write_csv(std::ostream& out, const ExperimentReport& rep) {
  for (std::size_t i = 0; i < rep.columns.size(); ++i)
    out << (i ? "," : "") << rep.columns[i];
  out << '\n';
  for (const auto& row : rep.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_value(row[i]);
    out << '\n';
  }
}

}  // namespace detlab
