#include <doctest.h>

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "sepwp/config.hpp"
#include "sepwp/report.hpp"

using namespace sepwp;
using nlohmann::json;

namespace {

const std::string kData = SEPWP_TEST_DATA;

json example_doc() {
  return json::parse(R"({
    "dims": {"n": 1, "m": 1},
    "C": {"shape": "box", "lower": [0], "upper": [1]},
    "Q": {"shape": "box", "lower": [0], "upper": [1]},
    "f": "p^2 - x^2",
    "g": "q - y"
  })");
}

std::string config_error_key(const json& doc) {
  try {
    (void)config::from_json(doc);
  } catch (const ConfigError& e) {
    return e.key();
  }
  return "";
}

}  // namespace

TEST_CASE("builtin examples round-trip through canonical JSON") {
  for (int k = 1; k <= 3; ++k) {
    const auto cfg = config::builtin(k);
    const json j = config::to_json(cfg);
    CHECK(config::from_json(j) == cfg);
    CHECK(config::to_json(config::from_json(j)) == j);
    CHECK(config::load("builtin:example" + std::to_string(k)) == cfg);
  }
  CHECK_THROWS_AS(config::builtin(4), ConfigError);
  CHECK_THROWS_AS(config::load("builtin:example9"), ConfigError);
}

TEST_CASE("builtin examples carry their defining data") {
  const auto e1 = config::builtin(1);
  CHECK(e1.f == "p^2 - x^2");
  CHECK(e1.C.lower[0] == -std::numeric_limits<double>::infinity());
  CHECK(e1.thresholds.tau_diam == 0.1);
  const auto e2 = config::builtin(2);
  CHECK(e2.C.lower == geometry::Vector{0.0});
  CHECK(e2.C.upper == geometry::Vector{1.0});
  const auto e3 = config::builtin(3);
  CHECK(e3.C.upper[0] == std::numeric_limits<double>::infinity());
  CHECK(e3.C.window.has_value());
  for (const auto& cfg : {e1, e2, e3}) {
    const auto prob = config::build_problem(cfg);
    CHECK(prob.n() == 1);
    CHECK(prob.m() == 1);
    const double one[] = {1.0};
    CHECK(prob.A().apply(one) == geometry::Vector{1.0});
  }
}

TEST_CASE("a file config loads and round-trips") {
  const auto cfg = config::load(kData + "/quadratic.json");
  CHECK(cfg.name == "shifted quadratic");
  CHECK(cfg.A == std::vector<double>{2.0});
  CHECK(cfg.C.window_radius == 1.0);
  CHECK(cfg.thresholds.tau_h == 0.1);
  CHECK(cfg.thresholds.cover_budget == 8);
  CHECK(cfg.seed == 3);
  CHECK(config::from_json(config::to_json(cfg)) == cfg);

  const auto prob = config::build_problem(cfg);
  CHECK(prob.grids().h_out == 1.0 / 512.0);
  const double x[] = {0.25};
  CHECK(prob.A().apply(x) == geometry::Vector{0.5});
  const auto opts = config::diagnose_options(cfg, 2);
  CHECK(opts.schedule == cfg.schedule);
  CHECK(opts.sampling.seed == 3);
  CHECK(opts.threads == 2);
  CHECK(opts.cover_budget == 8);
}

TEST_CASE("fixed grids in the document override the relative policy") {
  json doc = example_doc();
  doc["grids"] = {{"h_out", 0.01}, {"h_in", 0.005}};
  const auto cfg = config::from_json(doc);
  const auto policy = config::grid_policy(cfg);
  REQUIRE(policy.fixed);
  CHECK(policy.at(0.1).h_out == 0.01);
  CHECK(policy.at(0.001).h_in == 0.005);
  CHECK(config::build_problem(cfg).grids().h_in == 0.005);
}

TEST_CASE("malformed documents name the offending key") {
  CHECK(config_error_key(json::parse(std::ifstream(kData + "/bad_key.json"))) == "C.windw");
  json doc = example_doc();
  doc["extra"] = 1;
  CHECK(config_error_key(doc) == "extra");

  doc = example_doc();
  doc["C"]["lower"] = {0, 1};
  CHECK(config_error_key(doc) == "C.lower");

  doc = example_doc();
  doc["f"] = "p^2 - z";
  CHECK(config_error_key(doc) == "f");

  doc = example_doc();
  doc["C"]["shape"] = "torus";
  CHECK(config_error_key(doc) == "C.shape");

  doc = example_doc();
  doc["schedule"] = {0.1, 0.2};
  CHECK(config_error_key(doc) == "schedule[1]");

  doc = example_doc();
  doc.erase("g");
  CHECK(config_error_key(doc) == "g");

  CHECK_THROWS_AS(config::load(kData + "/does_not_exist.json"), ConfigError);
}

TEST_CASE("unbounded sets receive the default window") {
  json doc = example_doc();
  doc["C"] = {{"shape", "box"}, {"lower", {"-inf"}}, {"upper", {"inf"}}};
  const auto cfg = config::from_json(doc);
  const auto set = config::build_set(cfg.C, 1, "C");
  REQUIRE(set.window());
  CHECK(set.window()->lower[0] == -config::kDefaultWindowRadius);
  CHECK(set.window()->upper[0] == config::kDefaultWindowRadius);
}

TEST_CASE("diagnosis report JSON") {
  const auto cfg = config::builtin(2);
  const auto d = analysis::diagnose(config::build_problem(cfg), config::diagnose_options(cfg, 1));
  const json j = report::to_json(d, &cfg);
  CHECK(j["schema_version"] == report::kSchemaVersion);
  CHECK(j["classification"] == "GeneralizedWellPosed");
  CHECK(j["schedule"].size() == cfg.schedule.size());
  CHECK(j["curve"].size() == cfg.schedule.size());
  for (const char* key : {"epsilon", "h_out", "h_in", "cloud_size", "diameter", "hausdorff_to_S",
                          "alpha_window_relative", "slack"})
    CHECK_MESSAGE(j["curve"][0].contains(key), key);
  CHECK(j["thresholds"]["tau_H"] == cfg.thresholds.tau_h);
  CHECK(j["checkers"].size() == 12);
  CHECK(j["crosscheck"]["verdict"] == "N/A");
  CHECK(config::from_json(j["problem"]) == cfg);
  // Dumps without NaN and parses back.
  CHECK(json::parse(j.dump()) == j);

  bool refuted = false;
  for (const auto& c : j["checkers"])
    if (c["verdict"] == "refuted") {
      refuted = true;
      CHECK(c["counterexample"]["violation"].get<double>() > 0.0);
    }
  CHECK(refuted);
}

TEST_CASE("NaN metrics serialize as null") {
  analysis::DiagnosisReport d;
  d.schedule = {0.1};
  d.curve.push_back({0.1, {0.01, 0.01}, 0, std::nan(""), std::nan(""), std::nan(""), 0.0});
  d.solution_diameter = std::nan("");
  const json j = report::to_json(d);
  CHECK(j["curve"][0]["diameter"].is_null());
  CHECK(j["curve"][0]["hausdorff_to_S"].is_null());
  CHECK(j["solution"]["diameter"].is_null());
  CHECK_FALSE(j.contains("problem"));
}

TEST_CASE("cloud CSV") {
  const auto prob = config::build_problem(config::builtin(1)).with_grids({0.25, 0.25});
  const auto s = sep::approx_solution_set(prob, 0.1);
  std::ostringstream out;
  report::write_cloud_csv(out, s);
  std::istringstream in(out.str());
  std::string line;
  std::vector<std::string> meta;
  while (std::getline(in, line) && line.rfind("#", 0) == 0) meta.push_back(line);
  CHECK(line == "x,y,residual");
  CHECK(meta.front() == "# epsilon=0.10000000000000001");
  bool window = false;
  for (const auto& m : meta) window = window || m.rfind("# window_C=", 0) == 0;
  CHECK(window);
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    double x, y, r;
    char c1, c2;
    std::istringstream row(line);
    row >> x >> c1 >> y >> c2 >> r;
    CHECK(r <= 0.1);
  }
  CHECK(rows == s.cloud.size());

  const json j = report::to_json(s);
  CHECK(j["points"].size() == s.cloud.size());
  CHECK(j["h_out"] == 0.25);
}

TEST_CASE("curves CSV and human table") {
  const auto cfg = config::builtin(3);
  auto opts = config::diagnose_options(cfg, 1);
  opts.run_checkers = false;
  const auto d = analysis::diagnose(config::build_problem(cfg), opts);
  std::ostringstream out;
  report::write_curves_csv(out, d);
  std::istringstream in(out.str());
  std::string header;
  std::getline(in, header);
  CHECK(header.find("epsilon") == 0);
  CHECK(header.find("diameter") != std::string::npos);
  std::size_t rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  CHECK(rows == cfg.schedule.size());
  const auto table = report::human_table(d);
  CHECK(table.find("WellPosed") != std::string::npos);
}
