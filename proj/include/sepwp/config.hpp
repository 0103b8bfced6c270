#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sepwp/analysis.hpp"
#include "sepwp/geometry.hpp"
#include "sepwp/sep_core.hpp"

/// JSON problem documents. f is written over (x, p), g over (y, q); in
/// dimension > 1 components are x1, x2, ... and norm(x) takes whole vectors.
namespace sepwp::config {

/// Window applied when a set is unbounded and the document names none.
inline constexpr double kDefaultWindowRadius = 10.0;

struct SetConfig {
  std::string shape;  // "box", "ball" or "halfspaces"
  geometry::Vector lower, upper;
  geometry::Vector center;
  double radius = 0.0;
  std::vector<geometry::Vector> normals;
  geometry::Vector offsets;
  geometry::Vector witness;
  std::optional<double> window_radius;
  std::optional<geometry::Box> window;

  bool operator==(const SetConfig& o) const;
};

struct GridConfig {
  std::optional<double> h_out;
  std::optional<double> h_in;
  double relative = 0.25;  // used when h_out/h_in are absent

  bool operator==(const GridConfig&) const = default;
};

struct ThresholdConfig {
  double tau_diam = 0.05;
  double tau_h = 0.05;
  double rho = 0.9;
  std::size_t cover_budget = 16;

  bool operator==(const ThresholdConfig&) const = default;
};

struct ProblemConfig {
  std::string name;
  std::size_t n = 1;
  std::size_t m = 1;
  SetConfig C;
  SetConfig Q;
  std::string f;
  std::string g;
  std::vector<double> A;  // row-major m x n; empty means identity
  GridConfig grids;
  std::vector<double> schedule{0.1, 0.05, 0.01, 0.005, 0.001};
  ThresholdConfig thresholds;
  std::uint64_t seed = 0;

  bool operator==(const ProblemConfig&) const = default;
};

/// Validates and converts; throws ConfigError naming the offending key.
ProblemConfig from_json(const nlohmann::json& doc);
/// Canonical form: every key present, infinities as "inf"/"-inf".
nlohmann::json to_json(const ProblemConfig& cfg);

/// "builtin:example1".."builtin:example3" or a path to a JSON file.
ProblemConfig load(const std::string& source);
ProblemConfig builtin(int example);

geometry::ConvexSetSpec build_set(const SetConfig& set, std::size_t dim, const std::string& key);
analysis::GridPolicy grid_policy(const ProblemConfig& cfg);
/// The problem uses the grid of the smallest scheduled epsilon.
sep::SplitProblem build_problem(const ProblemConfig& cfg);
analysis::DiagnoseOptions diagnose_options(const ProblemConfig& cfg, unsigned threads);

}  // namespace sepwp::config
