#include "sepwp/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace sepwp::config {

using nlohmann::json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void only_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError(where.empty() ? "<document>" : where, "expected an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : obj.items())
    if (!ok.count(key)) throw ConfigError(where.empty() ? key : where + "." + key, "unknown key");
}

std::string join(const std::string& where, const std::string& key) { return where.empty() ? key : where + "." + key; }

double real(const json& v, const std::string& key) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf" || s == "+inf") return kInf;
    if (s == "-inf") return -kInf;
  }
  throw ConfigError(key, "expected a number");
}

double finite_real(const json& v, const std::string& key) {
  const double x = real(v, key);
  if (!std::isfinite(x)) throw ConfigError(key, "expected a finite number");
  return x;
}

geometry::Vector vec(const json& v, const std::string& key, std::size_t dim, bool allow_inf = false) {
  if (!v.is_array()) throw ConfigError(key, "expected an array");
  if (v.size() != dim) throw ConfigError(key, "expected " + std::to_string(dim) + " entries");
  geometry::Vector out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::string k = key + "[" + std::to_string(i) + "]";
    out.push_back(allow_inf ? real(v[i], k) : finite_real(v[i], k));
  }
  return out;
}

json real_json(double x) {
  if (x == kInf) return "inf";
  if (x == -kInf) return "-inf";
  return x;
}

json vec_json(const geometry::Vector& v) {
  json a = json::array();
  for (double x : v) a.push_back(real_json(x));
  return a;
}

std::size_t count(const json& v, const std::string& key) {
  if (!v.is_number_integer() || v.get<long long>() < 1) throw ConfigError(key, "expected a positive integer");
  return v.get<std::size_t>();
}

SetConfig parse_set(const json& j, const std::string& key, std::size_t dim) {
  only_keys(j, key,
            {"shape", "lower", "upper", "center", "radius", "normals", "offsets", "witness", "window_radius", "window"});
  SetConfig s;
  if (!j.contains("shape") || !j["shape"].is_string()) throw ConfigError(join(key, "shape"), "missing shape");
  s.shape = j["shape"].get<std::string>();
  auto need = [&](const char* k) -> const json& {
    if (!j.contains(k)) throw ConfigError(join(key, k), "required for shape " + s.shape);
    return j[k];
  };
  if (s.shape == "box") {
    s.lower = vec(need("lower"), join(key, "lower"), dim, true);
    s.upper = vec(need("upper"), join(key, "upper"), dim, true);
  } else if (s.shape == "ball") {
    s.center = vec(need("center"), join(key, "center"), dim);
    s.radius = finite_real(need("radius"), join(key, "radius"));
  } else if (s.shape == "halfspaces") {
    const json& normals = need("normals");
    if (!normals.is_array() || normals.empty()) throw ConfigError(join(key, "normals"), "expected a nonempty array");
    for (std::size_t i = 0; i < normals.size(); ++i)
      s.normals.push_back(vec(normals[i], join(key, "normals") + "[" + std::to_string(i) + "]", dim));
    s.offsets = vec(need("offsets"), join(key, "offsets"), s.normals.size());
    s.witness = vec(need("witness"), join(key, "witness"), dim);
  } else {
    throw ConfigError(join(key, "shape"), "unknown shape '" + s.shape + "'");
  }
  if (j.contains("window_radius")) {
    s.window_radius = finite_real(j["window_radius"], join(key, "window_radius"));
    if (!(*s.window_radius > 0.0)) throw ConfigError(join(key, "window_radius"), "must be positive");
  }
  if (j.contains("window")) {
    const std::string wk = join(key, "window");
    only_keys(j["window"], wk, {"lower", "upper"});
    if (!j["window"].contains("lower") || !j["window"].contains("upper"))
      throw ConfigError(wk, "needs lower and upper");
    s.window = geometry::Box{vec(j["window"]["lower"], join(wk, "lower"), dim),
                             vec(j["window"]["upper"], join(wk, "upper"), dim)};
  }
  if (s.window && s.window_radius) throw ConfigError(join(key, "window"), "give either window or window_radius");
  return s;
}

json set_json(const SetConfig& s) {
  json j;
  j["shape"] = s.shape;
  if (s.shape == "box") {
    j["lower"] = vec_json(s.lower);
    j["upper"] = vec_json(s.upper);
  } else if (s.shape == "ball") {
    j["center"] = vec_json(s.center);
    j["radius"] = s.radius;
  } else {
    json normals = json::array();
    for (const auto& nrm : s.normals) normals.push_back(vec_json(nrm));
    j["normals"] = normals;
    j["offsets"] = vec_json(s.offsets);
    j["witness"] = vec_json(s.witness);
  }
  if (s.window_radius) j["window_radius"] = *s.window_radius;
  if (s.window) j["window"] = {{"lower", vec_json(s.window->lower)}, {"upper", vec_json(s.window->upper)}};
  return j;
}

void check_expression(const std::string& text, const std::string& key, const char* first, const char* second,
                      std::size_t dim) {
  try {
    (void)Bifunction::parse(text, first, second, dim);
  } catch (const Error& e) {
    throw ConfigError(key, e.what());
  }
}

SetConfig interval(double lo, double hi) {
  SetConfig s;
  s.shape = "box";
  s.lower = {lo};
  s.upper = {hi};
  return s;
}

}  // namespace

bool SetConfig::operator==(const SetConfig& o) const {
  auto same_box = [](const std::optional<geometry::Box>& a, const std::optional<geometry::Box>& b) {
    return a.has_value() == b.has_value() && (!a || (a->lower == b->lower && a->upper == b->upper));
  };
  bool halves = normals.size() == o.normals.size();
  for (std::size_t i = 0; halves && i < normals.size(); ++i) halves = normals[i] == o.normals[i];
  return shape == o.shape && lower == o.lower && upper == o.upper && center == o.center && radius == o.radius &&
         halves && offsets == o.offsets && witness == o.witness && window_radius == o.window_radius &&
         same_box(window, o.window);
}

ProblemConfig from_json(const json& doc) {
  only_keys(doc, "", {"name", "dims", "C", "Q", "f", "g", "A", "grids", "schedule", "thresholds", "seed"});
  ProblemConfig cfg;
  if (doc.contains("name")) {
    if (!doc["name"].is_string()) throw ConfigError("name", "expected a string");
    cfg.name = doc["name"].get<std::string>();
  }
  if (!doc.contains("dims")) throw ConfigError("dims", "missing");
  only_keys(doc["dims"], "dims", {"n", "m"});
  if (!doc["dims"].contains("n") || !doc["dims"].contains("m")) throw ConfigError("dims", "needs n and m");
  cfg.n = count(doc["dims"]["n"], "dims.n");
  cfg.m = count(doc["dims"]["m"], "dims.m");

  for (const char* k : {"C", "Q", "f", "g"})
    if (!doc.contains(k)) throw ConfigError(k, "missing");
  cfg.C = parse_set(doc["C"], "C", cfg.n);
  cfg.Q = parse_set(doc["Q"], "Q", cfg.m);
  for (const char* k : {"f", "g"})
    if (!doc[k].is_string()) throw ConfigError(k, "expected expression text");
  cfg.f = doc["f"].get<std::string>();
  cfg.g = doc["g"].get<std::string>();
  check_expression(cfg.f, "f", "x", "p", cfg.n);
  check_expression(cfg.g, "g", "y", "q", cfg.m);

  if (doc.contains("A")) {
    const json& a = doc["A"];
    if (!a.is_array() || a.size() != cfg.m) throw ConfigError("A", "expected " + std::to_string(cfg.m) + " rows");
    for (std::size_t r = 0; r < a.size(); ++r) {
      const auto row = vec(a[r], "A[" + std::to_string(r) + "]", cfg.n);
      cfg.A.insert(cfg.A.end(), row.begin(), row.end());
    }
  } else if (cfg.n != cfg.m) {
    throw ConfigError("A", "required when n != m");
  }

  if (doc.contains("grids")) {
    const json& g = doc["grids"];
    only_keys(g, "grids", {"h_out", "h_in", "relative"});
    if (g.contains("h_out") != g.contains("h_in")) throw ConfigError("grids", "give both h_out and h_in");
    if (g.contains("h_out")) {
      cfg.grids.h_out = finite_real(g["h_out"], "grids.h_out");
      cfg.grids.h_in = finite_real(g["h_in"], "grids.h_in");
      if (!(*cfg.grids.h_out > 0.0)) throw ConfigError("grids.h_out", "must be positive");
      if (!(*cfg.grids.h_in > 0.0)) throw ConfigError("grids.h_in", "must be positive");
    }
    if (g.contains("relative")) {
      cfg.grids.relative = finite_real(g["relative"], "grids.relative");
      if (!(cfg.grids.relative > 0.0)) throw ConfigError("grids.relative", "must be positive");
    }
  }

  if (doc.contains("schedule")) {
    const json& s = doc["schedule"];
    if (!s.is_array()) throw ConfigError("schedule", "expected an array");
    cfg.schedule.clear();
    for (std::size_t i = 0; i < s.size(); ++i) {
      const double e = finite_real(s[i], "schedule[" + std::to_string(i) + "]");
      if (!(e > 0.0)) throw ConfigError("schedule[" + std::to_string(i) + "]", "must be positive");
      if (i > 0 && !(e < cfg.schedule.back()))
        throw ConfigError("schedule[" + std::to_string(i) + "]", "schedule must be strictly decreasing");
      cfg.schedule.push_back(e);
    }
    if (cfg.schedule.size() < 4) throw ConfigError("schedule", "needs at least 4 entries");
  }

  if (doc.contains("thresholds")) {
    const json& t = doc["thresholds"];
    only_keys(t, "thresholds", {"tau_diam", "tau_H", "rho", "cover_budget"});
    if (t.contains("tau_diam")) cfg.thresholds.tau_diam = finite_real(t["tau_diam"], "thresholds.tau_diam");
    if (t.contains("tau_H")) cfg.thresholds.tau_h = finite_real(t["tau_H"], "thresholds.tau_H");
    if (t.contains("rho")) cfg.thresholds.rho = finite_real(t["rho"], "thresholds.rho");
    if (t.contains("cover_budget")) cfg.thresholds.cover_budget = count(t["cover_budget"], "thresholds.cover_budget");
    if (!(cfg.thresholds.rho > 0.0 && cfg.thresholds.rho < 1.0)) throw ConfigError("thresholds.rho", "must be in (0, 1)");
  }

  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_unsigned()) throw ConfigError("seed", "expected a nonnegative integer");
    cfg.seed = doc["seed"].get<std::uint64_t>();
  }

  // Fail early on geometry errors so they are reported against their key.
  (void)build_set(cfg.C, cfg.n, "C");
  (void)build_set(cfg.Q, cfg.m, "Q");
  return cfg;
}

json to_json(const ProblemConfig& cfg) {
  json j;
  j["name"] = cfg.name;
  j["dims"] = {{"n", cfg.n}, {"m", cfg.m}};
  j["C"] = set_json(cfg.C);
  j["Q"] = set_json(cfg.Q);
  j["f"] = cfg.f;
  j["g"] = cfg.g;
  if (!cfg.A.empty()) {
    json rows = json::array();
    for (std::size_t r = 0; r < cfg.m; ++r)
      rows.push_back(vec_json({cfg.A.begin() + static_cast<std::ptrdiff_t>(r * cfg.n),
                               cfg.A.begin() + static_cast<std::ptrdiff_t>((r + 1) * cfg.n)}));
    j["A"] = rows;
  }
  json grids = {{"relative", cfg.grids.relative}};
  if (cfg.grids.h_out) grids["h_out"] = *cfg.grids.h_out;
  if (cfg.grids.h_in) grids["h_in"] = *cfg.grids.h_in;
  j["grids"] = grids;
  j["schedule"] = cfg.schedule;
  j["thresholds"] = {{"tau_diam", cfg.thresholds.tau_diam},
                     {"tau_H", cfg.thresholds.tau_h},
                     {"rho", cfg.thresholds.rho},
                     {"cover_budget", cfg.thresholds.cover_budget}};
  j["seed"] = cfg.seed;
  return j;
}

ProblemConfig builtin(int example) {
  ProblemConfig cfg;
  cfg.n = cfg.m = 1;
  cfg.A = {1.0};
  switch (example) {
    case 1:
      cfg.name = "example1";
      cfg.C = interval(-kInf, kInf);
      cfg.C.window_radius = 2.0;
      cfg.Q = cfg.C;
      cfg.f = "p^2 - x^2";
      cfg.g = "-y^2 * exp(-q^2)";
      // 2 sqrt(2 eps_min) = 0.089 exceeds the 0.05 default.
      cfg.thresholds.tau_diam = 0.1;
      break;
    case 2:
      cfg.name = "example2";
      cfg.C = interval(0.0, 1.0);
      cfg.Q = cfg.C;
      cfg.f = "if(x < 0.5, x, x^2 / 2)";
      cfg.g = "if(y == 0.5, 0, 2)";
      break;
    case 3:
      cfg.name = "example3";
      cfg.C = interval(0.0, kInf);
      cfg.C.window = geometry::Box{{0.0}, {10.0}};
      cfg.Q = cfg.C;
      cfg.f = "p^2 - x^2";
      cfg.g = "q - y";
      break;
    default:
      throw ConfigError("builtin", "no built-in example " + std::to_string(example));
  }
  return cfg;
}

ProblemConfig load(const std::string& source) {
  const std::string prefix = "builtin:example";
  if (source.rfind("builtin:", 0) == 0) {
    if (source.size() == prefix.size() + 1 && source.rfind(prefix, 0) == 0) {
      const char k = source.back();
      if (k >= '1' && k <= '3') return builtin(k - '0');
    }
    throw ConfigError("builtin", "unknown built-in '" + source + "'");
  }
  std::ifstream in(source);
  if (!in) throw ConfigError("<document>", "cannot open '" + source + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("<document>", e.what());
  }
  return from_json(doc);
}

geometry::ConvexSetSpec build_set(const SetConfig& s, std::size_t dim, const std::string& key) {
  try {
    geometry::ConvexSetSpec set = [&] {
      if (s.shape == "box") return geometry::ConvexSetSpec::box(s.lower, s.upper);
      if (s.shape == "ball") return geometry::ConvexSetSpec::ball(s.center, s.radius);
      std::vector<geometry::Halfspace> hs;
      for (std::size_t i = 0; i < s.normals.size(); ++i) hs.push_back({s.normals[i], s.offsets[i]});
      return geometry::ConvexSetSpec::halfspaces(std::move(hs), s.witness);
    }();
    if (set.dimension() != dim) throw DimensionMismatch(dim, set.dimension());
    if (s.window) return set.with_window(*s.window);
    if (s.window_radius) return set.with_window(*s.window_radius);
    if (!set.bounded()) return set.with_window(kDefaultWindowRadius);
    return set;
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(key, e.what());
  }
}

analysis::GridPolicy grid_policy(const ProblemConfig& cfg) {
  analysis::GridPolicy p;
  if (cfg.grids.h_out) p.fixed = sep::GridResolution{*cfg.grids.h_out, *cfg.grids.h_in};
  p.ratio = cfg.grids.relative;
  return p;
}

sep::SplitProblem build_problem(const ProblemConfig& cfg) {
  auto a = cfg.A.empty() ? geometry::LinearOperatorSpec::identity(cfg.n)
                         : geometry::LinearOperatorSpec(cfg.m, cfg.n, cfg.A);
  try {
    return sep::SplitProblem(build_set(cfg.C, cfg.n, "C"), build_set(cfg.Q, cfg.m, "Q"),
                             Bifunction::parse(cfg.f, "x", "p", cfg.n), Bifunction::parse(cfg.g, "y", "q", cfg.m),
                             std::move(a), grid_policy(cfg).at(cfg.schedule.back()));
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError("<document>", e.what());
  }
}

analysis::DiagnoseOptions diagnose_options(const ProblemConfig& cfg, unsigned threads) {
  analysis::DiagnoseOptions o;
  o.schedule = cfg.schedule;
  o.grids = grid_policy(cfg);
  o.thresholds = {cfg.thresholds.tau_diam, cfg.thresholds.tau_h, cfg.thresholds.rho};
  o.cover_budget = cfg.thresholds.cover_budget;
  o.threads = threads;
  o.sampling.seed = cfg.seed;
  return o;
}

}  // namespace sepwp::config
