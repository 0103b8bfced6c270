// sepwp: diagnose, check, sample and reproduce split equilibrium problems.
//
// Exit codes: 0 success, 1 runtime failure or failed reproduction,
// 2 configuration or usage error, 3 unbounded window or grid budget.

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <tuple>

#include "sepwp/analysis.hpp"
#include "sepwp/config.hpp"
#include "sepwp/report.hpp"
#include "sepwp/reproduce.hpp"

namespace fs = std::filesystem;
using namespace sepwp;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitBudget = 3;

struct Overrides {
  unsigned threads = 1;
  std::optional<std::uint64_t> seed;
  std::optional<double> window_radius;
  std::optional<double> h_out;
  std::optional<double> h_in;
};

void add_overrides(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--threads", o.threads, "worker threads (results do not depend on it)")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", o.seed, "seed for sampled checks");
  cmd->add_option("--window-radius", o.window_radius, "sampling window [-R, R] for unbounded sets");
  cmd->add_option("--h-out", o.h_out, "fixed outer grid spacing");
  cmd->add_option("--h-in", o.h_in, "fixed inner grid spacing");
}

config::ProblemConfig load(const std::string& source, const Overrides& o) {
  config::ProblemConfig cfg = config::load(source);
  if (o.seed) cfg.seed = *o.seed;
  if (o.window_radius) {
    if (!(*o.window_radius > 0.0)) throw ConfigError("--window-radius", "must be positive");
    for (config::SetConfig* s : {&cfg.C, &cfg.Q}) {
      if (s->shape == "box" || s->shape == "halfspaces") {
        s->window.reset();
        s->window_radius = *o.window_radius;
      }
    }
  }
  if (o.h_out || o.h_in) {
    const double out = o.h_out.value_or(*o.h_in);
    const double in = o.h_in.value_or(out);
    if (!(out > 0.0)) throw ConfigError("--h-out", "must be positive");
    if (!(in > 0.0)) throw ConfigError("--h-in", "must be positive");
    cfg.grids.h_out = out;
    cfg.grids.h_in = in;
  }
  return cfg;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

int cmd_diagnose(const std::string& source, const std::string& out_dir, const Overrides& o) {
  const config::ProblemConfig cfg = load(source, o);
  const sep::SplitProblem prob = config::build_problem(cfg);
  const analysis::DiagnosisReport r = analysis::diagnose(prob, config::diagnose_options(cfg, o.threads));

  std::cout << report::human_table(r);
  if (out_dir.empty()) return 0;

  const fs::path dir(out_dir);
  fs::create_directories(dir / "clouds");
  write_file(dir / "report.json", report::to_json(r, &cfg).dump(2) + "\n");
  std::ostringstream curves;
  report::write_curves_csv(curves, r);
  write_file(dir / "curves.csv", curves.str());
  for (std::size_t k = 0; k < r.clouds.size(); ++k) {
    std::ostringstream csv;
    report::write_cloud_csv(csv, r.clouds[k]);
    write_file(dir / "clouds" / ("eps_" + std::to_string(k) + ".csv"), csv.str());
  }
  std::ostringstream csv;
  report::write_cloud_csv(csv, r.solution);
  write_file(dir / "clouds" / "solution.csv", csv.str());
  std::cerr << "wrote " << (dir / "report.json").string() << "\n";
  return 0;
}

int cmd_check(const std::string& source, const std::string& property, const std::string& out, const Overrides& o) {
  const auto& names = analysis::property_names();
  if (property != "all" && std::find(names.begin(), names.end(), property) == names.end()) {
    std::cerr << "error: unknown property '" << property << "'\n";
    return kExitConfig;
  }
  const config::ProblemConfig cfg = load(source, o);
  const sep::SplitProblem prob = config::build_problem(cfg);
  analysis::SamplingOptions sampling;
  sampling.seed = cfg.seed;

  nlohmann::json reports = nlohmann::json::array();
  for (const auto& [subject, fn, set] : {std::tuple{"f", &prob.f(), &prob.C()}, std::tuple{"g", &prob.g(), &prob.Q()}}) {
    for (const std::string& name : names) {
      if (property != "all" && property != name) continue;
      analysis::CheckerReport r = analysis::run_checker(name, *fn, *set, sampling);
      r.subject = subject;
      reports.push_back(report::to_json(r));
    }
  }
  const nlohmann::json doc = {{"schema_version", report::kSchemaVersion}, {"reports", reports}};
  if (out.empty())
    std::cout << doc.dump(2) << "\n";
  else
    write_file(out, doc.dump(2) + "\n");
  return 0;
}

int cmd_set(const std::string& source, double eps, const std::string& out, bool json, const Overrides& o) {
  if (!(eps >= 0.0) || !std::isfinite(eps)) {
    std::cerr << "error: --eps must be a finite nonnegative number\n";
    return kExitConfig;
  }
  if (eps < sep::kMachineEpsilonFloor) {
    std::cerr << "warning: --eps " << eps << " is treated as " << sep::kMachineEpsilonFloor << "\n";
    eps = sep::kMachineEpsilonFloor;
  }
  const config::ProblemConfig cfg = load(source, o);
  const sep::SplitProblem prob = config::build_problem(cfg);
  // The relative policy never refines past the grid of the smallest scheduled epsilon.
  const double eps_min = *std::min_element(cfg.schedule.begin(), cfg.schedule.end());
  const sep::ApproxSolutionSet s =
      sep::approx_solution_set(prob, eps, config::grid_policy(cfg).at(std::max(eps, eps_min)), o.threads);

  std::ostringstream text;
  if (json)
    text << report::to_json(s).dump(2) << "\n";
  else
    report::write_cloud_csv(text, s);
  if (out.empty())
    std::cout << text.str();
  else
    write_file(out, text.str());
  return 0;
}

int cmd_reproduce(bool all, std::optional<int> example, unsigned threads) {
  if (!all && !example) {
    std::cerr << "error: give --all or --example k\n";
    return kExitConfig;
  }
  std::vector<int> which = all ? std::vector<int>{1, 2, 3} : std::vector<int>{*example};
  bool pass = true;
  for (int k : which) {
    const reproduce::Outcome o = reproduce::example(k, threads);
    reproduce::print(std::cout, o);
    pass = pass && o.pass();
  }
  return pass ? 0 : kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Well-posedness diagnostics for split equilibrium problems"};
  app.require_subcommand(1);

  Overrides overrides;
  std::string source, out, property;
  double eps = 0.0;
  bool json = false, all = false;
  std::optional<int> example;

  auto* diagnose = app.add_subcommand("diagnose", "classify a problem and write report.json, curves.csv, clouds/");
  diagnose->add_option("config", source, "JSON file or builtin:example{1,2,3}")->required();
  diagnose->add_option("--out", out, "output directory");
  add_overrides(diagnose, overrides);

  auto* check = app.add_subcommand("check", "run a hypothesis checker on f and g");
  check->add_option("config", source, "JSON file or builtin:example{1,2,3}")->required();
  check->add_option("--property", property, "monotone, hemicontinuous, convex-second, lsc-second, usc-first, "
                                            "diagonal-nonneg or all")
      ->required();
  check->add_option("--out", out, "write the JSON here instead of stdout");
  add_overrides(check, overrides);

  auto* set = app.add_subcommand("set", "print the certified grid cloud of S(eps)");
  set->add_option("config", source, "JSON file or builtin:example{1,2,3}")->required();
  set->add_option("--eps", eps, "epsilon (0 is raised to 1e-12)")->required();
  set->add_option("--out", out, "write here instead of stdout");
  set->add_flag("--json", json, "JSON instead of CSV");
  add_overrides(set, overrides);

  auto* repro = app.add_subcommand("reproduce", "check the built-in examples' claims");
  repro->add_flag("--all", all, "examples 1, 2 and 3");
  repro->add_option("--example", example, "one example")->check(CLI::Range(1, 3));
  repro->add_option("--threads", overrides.threads, "worker threads")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*diagnose) return cmd_diagnose(source, out, overrides);
    if (*check) return cmd_check(source, property, out, overrides);
    if (*set) return cmd_set(source, eps, out, json, overrides);
    if (*repro) return cmd_reproduce(all, example, overrides.threads);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const Unbounded& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBudget;
  } catch (const BudgetExceeded& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBudget;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitFailure;
}
