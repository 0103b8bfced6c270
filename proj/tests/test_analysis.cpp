#include <doctest.h>

#include <cmath>

#include "sepwp/analysis.hpp"
#include "sepwp/config.hpp"

using namespace sepwp;
using namespace sepwp::analysis;
using geometry::ConvexSetSpec;

namespace {

Bifunction fx(const char* text) { return Bifunction::parse(text, "x", "p", 1); }

ConvexSetSpec unit() { return ConvexSetSpec::box({0.0}, {1.0}); }

// Re-evaluates the defining inequality at the witness; returns the excess.
double replay(const CheckerReport& r, const Bifunction& fn) {
  const auto& ce = *r.counterexample;
  if (r.property == "monotone") return fn(ce.point("x"), ce.point("y")) + fn(ce.point("y"), ce.point("x"));
  if (r.property == "hemicontinuous") return fn(ce.point("x_t"), ce.point("y")) - fn(ce.point("x"), ce.point("y"));
  if (r.property == "convex-second") {
    const double l = ce.value("lambda");
    const auto& p = ce.point("p");
    const auto& q = ce.point("p'");
    geometry::Vector mix(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) mix[i] = l * p[i] + (1 - l) * q[i];
    const auto& x = ce.point("x");
    return fn(x, mix) - (l * fn(x, p) + (1 - l) * fn(x, q));
  }
  if (r.property == "lsc-second") return fn(ce.point("x"), ce.point("p")) - fn(ce.point("x"), ce.point("probe"));
  if (r.property == "usc-first") return fn(ce.point("probe"), ce.point("p")) - fn(ce.point("x"), ce.point("p"));
  if (r.property == "diagonal-nonneg") return -fn(ce.point("p"), ce.point("p"));
  throw std::runtime_error("unknown property");
}

DiagnosisReport run_diagnose(int k, unsigned threads = 1) {
  const auto cfg = config::builtin(k);
  return diagnose(config::build_problem(cfg), config::diagnose_options(cfg, threads));
}

}  // namespace

TEST_CASE("sample_points covers the grid and stays in the set") {
  const auto pts = sample_points(unit(), {});
  CHECK(pts.size() == 33 + 32);
  CHECK(pts.front() == geometry::Vector{0.0});
  for (const auto& p : pts) CHECK(geometry::contains(unit(), p));
  const auto again = sample_points(unit(), {});
  CHECK(pts == again);
  const auto other = sample_points(unit(), {32, 32, 5});
  CHECK(other != pts);
}

TEST_CASE("monotonicity") {
  const auto ex3 = config::build_problem(config::builtin(3));
  CHECK(check_monotone(ex3.f(), ex3.C(), 4096, 0).holds());
  const auto r = check_monotone(fx("x + p"), unit(), 4096, 0);
  REQUIRE_FALSE(r.holds());
  CHECK(r.counterexample->point("x") == geometry::Vector{1.0});
  CHECK(r.counterexample->point("y") == geometry::Vector{1.0});
  CHECK(r.counterexample->violation == 4.0);
  CHECK(r.property == "monotone");
  CHECK(r.sample_count > 0);
}

TEST_CASE("hemicontinuity") {
  CHECK(check_hemicontinuous(fx("p^2 - x^2"), unit(), {}).holds());
  // Jump at x = 0.5: approaching from below the value tends to 0.5 > f(0.5) = 0.125.
  const auto jump = check_hemicontinuous(fx("if(x < 0.5, x, x^2 / 2)"), unit(), {});
  REQUIRE_FALSE(jump.holds());
  CHECK(jump.counterexample->point("x") == geometry::Vector{0.5});
  CHECK(jump.counterexample->point("y")[0] < 0.5);
  CHECK(jump.counterexample->violation == doctest::Approx(0.375).epsilon(1e-5));
  CHECK(check_hemicontinuous(fx("if(x <= 0.5, x, x^2 / 2 + 0.375)"), unit(), {}).holds());
  const auto r = check_hemicontinuous(fx("if(x == 0, -1, 0)"), unit(), {});
  REQUIRE_FALSE(r.holds());
  CHECK(r.counterexample->point("x") == geometry::Vector{0.0});
  CHECK(r.counterexample->violation == 1.0);
}

TEST_CASE("convexity in the second argument") {
  CHECK(check_convex_second(fx("p^2 - x^2"), ConvexSetSpec::box({-1.0}, {1.0}), {}).holds());
  CHECK(check_convex_second(fx("x * p + 3"), ConvexSetSpec::box({-1.0}, {1.0}), {}).holds());
  const auto r = check_convex_second(fx("-p^2"), ConvexSetSpec::box({-1.0}, {1.0}), {});
  REQUIRE_FALSE(r.holds());
  const auto& ce = *r.counterexample;
  CHECK(ce.value("lambda") == 0.5);
  CHECK(std::fabs(ce.point("p")[0] - ce.point("p'")[0]) == 2.0);
  CHECK(ce.violation == 1.0);
}

TEST_CASE("semicontinuity probes") {
  CHECK(check_lsc_second(fx("p^2 - x^2"), unit(), {}).holds());
  CHECK(check_usc_first(fx("p^2 - x^2"), unit(), {}).holds());
  const auto step = check_lsc_second(fx("if(p < 0.5, 0, 1)"), unit(), {});
  REQUIRE_FALSE(step.holds());
  CHECK(step.counterexample->point("p") == geometry::Vector{0.5});
  CHECK(step.counterexample->point("probe")[0] < 0.5);
  // The lower-semicontinuous version of the step passes.
  CHECK(check_lsc_second(fx("if(p <= 0.5, 0, 1)"), unit(), {}).holds());

  const auto ex2 = config::build_problem(config::builtin(2));
  const auto usc = check_usc_first(ex2.g(), ex2.Q(), {});
  REQUIRE_FALSE(usc.holds());
  CHECK(usc.counterexample->point("x") == geometry::Vector{0.5});
  CHECK(usc.counterexample->violation == 2.0);
}

TEST_CASE("diagonal non-negativity") {
  CHECK(check_diagonal_nonneg(fx("p^2 - x^2"), unit(), {}).holds());
  const auto r = check_diagonal_nonneg(fx("p - x - 1"), unit(), {});
  REQUIRE_FALSE(r.holds());
  CHECK(r.counterexample->violation == 1.0);
  CHECK(r.counterexample->value("f(p,p)") == -1.0);

  const auto ex1 = config::build_problem(config::builtin(1));
  const auto g = check_diagonal_nonneg(ex1.g(), ex1.Q(), {});
  REQUIRE_FALSE(g.holds());
  CHECK(std::fabs(g.counterexample->point("p")[0]) == 1.0);
  CHECK(g.counterexample->value("f(p,p)") == doctest::Approx(-std::exp(-1.0)).epsilon(1e-15));
}

TEST_CASE("run_checker and property names") {
  CHECK(property_names().size() == 6);
  for (const auto& name : property_names()) CHECK(run_checker(name, fx("p - x"), unit(), {}).property == name);
  CHECK_THROWS_AS(run_checker("bogus", fx("p - x"), unit(), {}), Error);
}

TEST_CASE("example 3 satisfies every hypothesis but usc on samples") {
  const auto ex3 = config::build_problem(config::builtin(3));
  const auto all = run_all_checkers(ex3, {});
  CHECK(all.size() == 12);
  for (const auto& c : all) CHECK_MESSAGE(c.holds(), (c.property + " " + c.subject));
}

TEST_CASE("every counterexample replays to a violation") {
  const char* texts[] = {"x + p",      "-p^2",           "if(x == 0, -1, 0)", "if(p < 0.5, 0, 1)",
                         "p - x - 1",  "if(x == 0.5, 1, 0)", "x * p - p^2",    "sin(x)"};
  std::size_t refuted = 0;
  for (const char* text : texts) {
    Bifunction fn;
    try {
      fn = fx(text);
    } catch (const Error&) {
      continue;
    }
    for (const auto& name : property_names()) {
      const auto r = run_checker(name, fn, ConvexSetSpec::box({-1.0}, {1.0}), {});
      if (r.holds()) continue;
      ++refuted;
      REQUIRE(r.counterexample);
      CHECK(r.counterexample->violation > kCheckTolerance);
      CHECK_MESSAGE(replay(r, fn) > kCheckTolerance / 2, (name + " on " + text));
      CHECK(replay(r, fn) == doctest::Approx(r.counterexample->violation).epsilon(1e-12));
    }
  }
  for (int k = 1; k <= 3; ++k) {
    const auto prob = config::build_problem(config::builtin(k));
    for (const auto& r : run_all_checkers(prob, {})) {
      if (r.holds()) continue;
      ++refuted;
      CHECK(replay(r, r.subject == "f" ? prob.f() : prob.g()) > kCheckTolerance / 2);
    }
  }
  CHECK(refuted >= 8);
}

TEST_CASE("Minty conditions on the examples") {
  const double h = 1.0 / 256.0;
  SUBCASE("example 1 at the origin") {
    const auto prob = config::build_problem(config::builtin(1)).with_grids({h, h});
    const double z[] = {0.0};
    const auto m = minty_check(prob, z, z);
    CHECK(m.forward());
    CHECK(m.backward());
    const double off[] = {0.5};
    const auto s = minty_check(prob, off, off);
    CHECK_FALSE(s.forward());
    CHECK_FALSE(s.backward());
  }
  SUBCASE("example 3 at the origin") {
    const auto prob = config::build_problem(config::builtin(3)).with_grids({h, h});
    const double z[] = {0.0};
    const auto m = minty_check(prob, z, z);
    CHECK(m.forward());
    CHECK(m.backward());
    CHECK(m.f.forward_min == 0.0);
    const double off[] = {0.5};
    CHECK_FALSE(minty_check(prob, off, off).forward());
  }
  SUBCASE("example 2 on the diagonal: forward holds, backward cannot") {
    // g(y, q) = 2 away from q = 0.5 so max_q g(q, y*) = 2 for every y*.
    const auto prob = config::build_problem(config::builtin(2)).with_grids({h, h});
    for (double t : {0.0, 0.25, 0.5, 0.75, 1.0}) {
      const double v[] = {t};
      const auto m = minty_check(prob, v, v);
      CHECK(m.forward());
      CHECK_FALSE(m.g.backward);
      CHECK(m.g.backward_max == 2.0);
    }
  }
  SUBCASE("slack is local and small for smooth bifunctions") {
    const double z[] = {0.0};
    const auto m = minty_check(fx("p^2 - x^2"), ConvexSetSpec::box({-1.0}, {1.0}), z, h);
    CHECK(m.slack <= 2.0 * h * h + kCheckTolerance);
    CHECK_FALSE(m.warning);
  }
}

TEST_CASE("grid policy") {
  GridPolicy rel;
  CHECK(rel.at(0.1).h_out == 1.0 / 64.0);
  CHECK(rel.at(0.001).h_in == 1.0 / 4096.0);
  GridPolicy fixed{sep::GridResolution{0.01, 0.02}, 0.25};
  CHECK(fixed.at(0.001).h_out == 0.01);
  CHECK(fixed.at(0.001).h_in == 0.02);
}

TEST_CASE("diagnose classifies the examples") {
  const auto d1 = run_diagnose(1);
  CHECK(d1.classification == Classification::WellPosed);
  CHECK(d1.curve.size() == 5);
  for (std::size_t i = 1; i < d1.curve.size(); ++i) CHECK(d1.curve[i].diameter <= d1.curve[i - 1].diameter);
  CHECK(d1.crosscheck.verdict == Consistency::NotApplicable);

  const auto d2 = run_diagnose(2);
  CHECK(d2.classification == Classification::GeneralizedWellPosed);
  CHECK(d2.solution_diameter >= std::sqrt(2.0) - 0.1);
  CHECK(d2.crosscheck.verdict == Consistency::NotApplicable);
  bool usc_warning = false;
  for (const auto& w : d2.warnings) usc_warning = usc_warning || w.find("upper semicontinuity") != std::string::npos;
  CHECK(usc_warning);

  const auto d3 = run_diagnose(3);
  CHECK(d3.classification == Classification::WellPosed);
  CHECK(d3.crosscheck.verdict == Consistency::Consistent);
  CHECK(d3.crosscheck.hypotheses_hold);
  CHECK(d3.crosscheck.unique_solution_evidence);
  CHECK_FALSE(d3.evidence.empty());
}

TEST_CASE("diagnose is deterministic across worker counts") {
  const auto a = run_diagnose(2, 1);
  const auto b = run_diagnose(2, 4);
  CHECK(a.classification == b.classification);
  REQUIRE(a.curve.size() == b.curve.size());
  for (std::size_t i = 0; i < a.curve.size(); ++i) {
    CHECK(a.curve[i].diameter == b.curve[i].diameter);
    CHECK(a.curve[i].hausdorff == b.curve[i].hausdorff);
    CHECK(a.curve[i].alpha == b.curve[i].alpha);
    CHECK(a.curve[i].cloud_size == b.curve[i].cloud_size);
  }
  CHECK(a.solution.cloud == b.solution.cloud);
}

TEST_CASE("diagnose without certified points is inconclusive") {
  const sep::SplitProblem prob(unit(), unit(), fx("-1"), Bifunction::parse("0", "y", "q", 1),
                               geometry::LinearOperatorSpec::identity(1), {0.125, 0.125});
  DiagnoseOptions o;
  o.schedule = {0.5, 0.25, 0.125, 0.0625};
  o.grids.fixed = sep::GridResolution{0.125, 0.125};
  o.run_checkers = false;
  const auto d = diagnose(prob, o);
  CHECK(d.classification == Classification::Inconclusive);
  CHECK(d.solution.cloud.empty());
  CHECK(std::isnan(d.solution_diameter));
  CHECK(std::isnan(d.curve.front().diameter));
  CHECK(d.checkers.empty());
}

TEST_CASE("diagnose rejects short or non-decreasing schedules") {
  const auto prob = config::build_problem(config::builtin(3));
  DiagnoseOptions o;
  o.schedule = {0.1, 0.05, 0.01};
  CHECK_THROWS_AS(diagnose(prob, o), ConfigError);
  o.schedule = {0.1, 0.05, 0.05, 0.01};
  CHECK_THROWS_AS(diagnose(prob, o), ConfigError);
}

TEST_CASE("crosscheck reports tension when unique evidence and classification disagree") {
  auto d = run_diagnose(3);
  d.classification = Classification::Inconclusive;
  const auto prob = config::build_problem(config::builtin(3));
  const auto c = uniqueness_crosscheck(prob, d.checkers, d);
  CHECK(c.verdict == Consistency::Tension);
  CHECK(std::string(to_string(c.verdict)) == "TENSION");
  CHECK(std::string(to_string(Consistency::NotApplicable)) == "N/A");
}
