// detlab command-line front end: parse a config, dispatch experiments, write
// CSV reports, summary.json and manifest.json.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <string>
#include <vector>

#include "detlab/config.hpp"
#include "detlab/experiments.hpp"

#ifndef DETLAB_VERSION
#define DETLAB_VERSION "unknown"
#endif

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;
constexpr int kExitVerdict = 4;

void write_json(const fs::path& path, const json& j) {
  std::ofstream f(path);
  if (!f) throw detlab::ConfigError("cannot write " + path.string());
  f << j.dump(2) << '\n';
}

struct Outcome {
  std::string name;
  detlab::ExperimentReport report;
  double seconds = 0.0;
  std::string error;
  bool numeric_failure = false;
};

Outcome run_one(const detlab::ExperimentEntry& entry, const detlab::ExperimentConfig& cfg) {
  Outcome o;
  o.name = entry.name;
  const auto start = std::chrono::steady_clock::now();
  try {
    o.report = entry.run(cfg);
  } catch (const detlab::ConfigError& e) {
    o.error = std::string("config: ") + e.what();
  } catch (const std::exception& e) {
    o.error = e.what();
    o.numeric_failure = true;
  }
  o.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return o;
}

int cmd_run(const std::string& config_path, const std::vector<std::string>& only,
            const std::vector<std::string>& sets, std::string out_dir) {
  detlab::config::RunConfig rc;
  std::vector<std::string> selection;
  try {
    auto raw = detlab::config::parse_file(config_path);
    for (const auto& s : sets) {
      auto [k, v] = detlab::config::parse_assignment(s);
      raw[k] = v;
    }
    rc = detlab::config::build(raw);
    selection = only.empty() ? rc.selection : only;
    if (selection.empty())
      for (const auto& e : detlab::experiment_registry()) selection.push_back(e.name);
    for (const auto& name : selection) detlab::find_experiment(name);
  } catch (const detlab::Error& e) {
    std::cerr << "detlab: " << e.what() << '\n';
    return kExitConfig;
  }

  if (out_dir.empty()) {
    const char* env = std::getenv("DETLAB_OUT");
    out_dir = env ? env : "detlab_out";
  }
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) {
    std::cerr << "detlab: cannot create output directory " << out_dir << '\n';
    return kExitConfig;
  }
  const fs::path out(out_dir);

  json manifest{{"config", config_path},
                {"experiments", selection},
                {"output_dir", out_dir},
                {"tool_version", DETLAB_VERSION},
                {"status", "running"},
                {"wall_clock_seconds", json::object()}};
  write_json(out / "manifest.json", manifest);
  write_json(out / "summary.json", json{{"status", "running"}, {"experiments", json::array()}});

  // Worker pool: one task per experiment; experiments share no mutable state.
  std::vector<std::future<Outcome>> tasks;
  for (const auto& name : selection) {
    const auto& entry = detlab::find_experiment(name);
    tasks.push_back(std::async(std::launch::async, run_one, std::cref(entry),
                               std::cref(rc.experiment)));
  }
  std::vector<Outcome> outcomes;
  for (auto& t : tasks) outcomes.push_back(t.get());

  bool numeric_failure = false, config_failure = false, verdict_failure = false;
  json summary{{"status", "complete"}, {"experiments", json::array()}};
  for (const auto& o : outcomes) {
    json entry{{"name", o.name}, {"seconds", o.seconds}};
    if (!o.error.empty()) {
      entry["passed"] = false;
      entry["error"] = o.error;
      (o.numeric_failure ? numeric_failure : config_failure) = true;
      std::cout << o.name << ": ERROR " << o.error << '\n';
    } else {
      const auto& r = o.report;
      const auto csv = out / (o.name + ".csv");
      std::ofstream f(csv);
      detlab::write_csv(f, r);
      entry["passed"] = r.passed;
      entry["header"] = r.header;
      entry["failures"] = r.failures;
      entry["advisories"] = r.advisories;
      entry["scalars"] = r.scalars;
      entry["csv"] = csv.filename().string();
      if (!r.passed) verdict_failure = true;
      std::cout << o.name << ": " << (r.passed ? "PASS" : "FAIL") << '\n';
      for (const auto& why : r.failures) std::cout << "  " << why << '\n';
    }
    summary["experiments"].push_back(entry);
    manifest["wall_clock_seconds"][o.name] = o.seconds;
  }
  summary["all_passed"] = !(numeric_failure || config_failure || verdict_failure);
  write_json(out / "summary.json", summary);
  manifest["status"] = "complete";
  write_json(out / "manifest.json", manifest);

  if (config_failure) return kExitConfig;
  if (numeric_failure) return kExitSolver;
  if (verdict_failure) return kExitVerdict;
  return 0;
}

int cmd_list(const std::string& filter, bool as_json) {
  json arr = json::array();
  for (const auto& e : detlab::experiment_registry()) {
    if (!filter.empty() && e.name.find(filter) == std::string::npos) continue;
    if (as_json)
      arr.push_back({{"name", e.name}, {"description", e.description}});
    else
      std::cout << e.name << "  " << e.description << '\n';
  }
  if (as_json) std::cout << arr.dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"detlab: zeta-determinant and eta-invariant decomposition experiments"};
  app.set_version_flag("--version", DETLAB_VERSION);
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "run experiments from a config file");
  std::string config_path, out_dir;
  std::vector<std::string> only, sets;
  run->add_option("--config", config_path, "config file")->required();
  run->add_option("--only", only, "comma-separated experiment names")->delimiter(',');
  run->add_option("--set", sets, "override KEY=VALUE (repeatable)");
  run->add_option("--out", out_dir, "output directory (default $DETLAB_OUT or detlab_out)");

  auto* list = app.add_subcommand("list", "list experiments");
  bool as_json = false;
  std::string filter;
  list->add_flag("--json", as_json, "JSON output");
  list->add_option("filter", filter, "substring filter");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }
  if (*run) return cmd_run(config_path, only, sets, out_dir);
  return cmd_list(filter, as_json);
}
