#include "sepwp/reproduce.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "sepwp/analysis.hpp"
#include "sepwp/config.hpp"

namespace sepwp::reproduce {

namespace {

using Clock = std::chrono::steady_clock;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

struct Run {
  config::ProblemConfig cfg;
  sep::SplitProblem prob;
  analysis::DiagnosisReport report;
};

Run run(int example, unsigned threads, bool checkers) {
  config::ProblemConfig cfg = config::builtin(example);
  sep::SplitProblem prob = config::build_problem(cfg);
  analysis::DiagnoseOptions opts = config::diagnose_options(cfg, threads);
  opts.run_checkers = checkers;
  analysis::DiagnosisReport report = analysis::diagnose(prob, opts);
  return {std::move(cfg), std::move(prob), std::move(report)};
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void add(Outcome& o, std::string name, bool pass, std::string detail) {
  o.claims.push_back({std::move(name), pass, std::move(detail)});
}

void classification_claim(Outcome& o, const analysis::DiagnosisReport& r, analysis::Classification expected) {
  add(o, std::string("diagnose returns ") + analysis::to_string(expected), r.classification == expected,
      std::string("got ") + analysis::to_string(r.classification));
}

void runtime_claim(Outcome& o, double limit) {
  add(o, "runtime below " + fmt(limit) + " s", o.seconds < limit, fmt(o.seconds) + " s");
}

}  // namespace

bool Outcome::pass() const {
  for (const Claim& c : claims)
    if (!c.pass) return false;
  return true;
}

Outcome example1(unsigned threads) {
  Outcome o{"example 1: unique solution (0,0), shrinking diameters", {}, 0.0};
  const auto start = Clock::now();
  const Run r = run(1, threads, false);
  o.seconds = seconds_since(start);

  bool mono = true;
  for (std::size_t k = 0; k < r.report.curve.size(); ++k) {
    const auto& c = r.report.curve[k];
    add(o, "grid at eps=" + fmt(c.epsilon) + " has h_out = h_in <= eps/4",
        c.grids.h_out == c.grids.h_in && c.grids.h_out <= c.epsilon / 4.0, "h=" + fmt(c.grids.h_out));
    const double bound = 2.0 * std::sqrt(2.0 * c.epsilon) + 2.0 * std::sqrt(2.0) * c.grids.h_out;
    add(o, "diam S(" + fmt(c.epsilon) + ") <= 2 sqrt(2 eps) + 2 sqrt(2) h", c.cloud_size > 0 && c.diameter <= bound,
        "diam=" + fmt(c.diameter) + " bound=" + fmt(bound) + " points=" + std::to_string(c.cloud_size));
    if (k > 0 && !(c.diameter <= r.report.curve[k - 1].diameter + 1e-12)) mono = false;
  }
  add(o, "diameter curve nonincreasing", mono, "");
  classification_claim(o, r.report, analysis::Classification::WellPosed);
  runtime_claim(o, 60.0);
  return o;
}

Outcome example2(unsigned threads) {
  Outcome o{"example 2: diagonal solution set, Hausdorff convergence", {}, 0.0};
  const auto start = Clock::now();
  const Run r = run(2, threads, false);
  o.seconds = seconds_since(start);

  for (const auto& c : r.report.curve) {
    const double bound = c.epsilon / std::sqrt(2.0) + 2.0 * std::sqrt(2.0) * c.grids.h_out + 1e-9;
    add(o, "H(S(" + fmt(c.epsilon) + "), S) <= eps/sqrt 2 + 2 sqrt(2) h + 1e-9", c.hausdorff <= bound,
        "H=" + fmt(c.hausdorff) + " bound=" + fmt(bound));
    add(o, "diam S(" + fmt(c.epsilon) + ") >= sqrt 2 - 0.1", c.diameter >= std::sqrt(2.0) - 0.1,
        "diam=" + fmt(c.diameter));
  }
  const double last = r.report.curve.back().hausdorff;
  add(o, "final H below tau_H", last <= r.report.thresholds.tau_h,
      "H=" + fmt(last) + " tau_H=" + fmt(r.report.thresholds.tau_h));
  classification_claim(o, r.report, analysis::Classification::GeneralizedWellPosed);
  runtime_claim(o, 30.0);
  return o;
}

Outcome example3(unsigned threads) {
  Outcome o{"example 3: uniqueness hypotheses and well-posedness", {}, 0.0};
  const auto start = Clock::now();
  const Run r = run(3, threads, true);

  for (const auto& c : r.report.checkers) {
    if (c.property == "usc-first") continue;
    add(o, c.property + " holds for " + c.subject, c.holds(), c.sampling);
  }

  const analysis::GridPolicy grids = config::grid_policy(r.cfg);
  const sep::ApproxSolutionSet s = sep::solution_set(r.prob, 1e-3, grids.at(1e-3), threads);
  double farthest = 0.0;
  for (std::size_t i = 0; i < s.cloud.size(); ++i)
    farthest = std::max(farthest, std::hypot(s.cloud[i][0], s.cloud[i][1]));
  add(o, "S(1e-3) lies within 0.05 of (0,0)", !s.cloud.empty() && farthest <= 0.05,
      "points=" + std::to_string(s.cloud.size()) + " max distance=" + fmt(farthest));

  add(o, "uniqueness cross-check CONSISTENT", r.report.crosscheck.verdict == analysis::Consistency::Consistent,
      analysis::to_string(r.report.crosscheck.verdict));
  classification_claim(o, r.report, analysis::Classification::WellPosed);
  o.seconds = seconds_since(start);
  return o;
}

Outcome example(int k, unsigned threads) {
  switch (k) {
    case 1: return example1(threads);
    case 2: return example2(threads);
    case 3: return example3(threads);
    default: throw ConfigError("example", "expected 1, 2 or 3");
  }
}

Outcome minty(unsigned) {
  Outcome o{"Minty forward/backward agreement", {}, 0.0};
  const auto start = Clock::now();
  struct Case {
    int example;
    std::vector<double> solutions;  // candidates (t, t)
    bool perturb;
  };
  const Case cases[] = {{1, {0.0}, true}, {2, {0.0, 0.25, 0.5, 0.75, 1.0}, false}, {3, {0.0}, true}};
  for (const Case& c : cases) {
    const sep::SplitProblem prob = config::build_problem(config::builtin(c.example));
    const std::string tag = "example " + std::to_string(c.example);
    for (double t : c.solutions) {
      const double v[] = {t};
      const auto m = analysis::minty_check(prob, v, v);
      add(o, tag + " at (" + fmt(t) + "," + fmt(t) + "): forward and backward both true",
          m.forward() && m.backward(),
          "forward f/g=" + std::to_string(m.f.forward) + "/" + std::to_string(m.g.forward) +
              " backward f/g=" + std::to_string(m.f.backward) + "/" + std::to_string(m.g.backward) +
              " (max h(y,x*) f=" + fmt(m.f.backward_max) + " g=" + fmt(m.g.backward_max) + ")");
    }
    if (c.perturb) {
      const double v[] = {c.solutions.front() + 0.5};
      const auto m = analysis::minty_check(prob, v, v);
      add(o, tag + " shifted by 0.5: forward and backward both false", !m.forward() && !m.backward(),
          "forward min f=" + fmt(m.f.forward_min) + " g=" + fmt(m.g.forward_min) + "; backward max f=" +
              fmt(m.f.backward_max) + " g=" + fmt(m.g.backward_max));
    }
  }
  o.seconds = seconds_since(start);
  return o;
}

Outcome negative_controls() {
  Outcome o{"negative controls", {}, 0.0};
  const auto start = Clock::now();
  const analysis::SamplingOptions sampling;

  {
    const auto f = Bifunction::parse("x + p", "x", "p", 1);
    const auto r = analysis::check_monotone(f, geometry::ConvexSetSpec::box({0.0}, {1.0}), 4096, 0);
    bool at_corner = false;
    std::string detail = "holds on samples";
    if (r.counterexample) {
      const auto& ce = *r.counterexample;
      at_corner = ce.point("x") == geometry::Vector{1.0} && ce.point("y") == geometry::Vector{1.0} &&
                  std::fabs(ce.violation - 4.0) < 1e-12;
      detail = "x=" + fmt(ce.point("x")[0]) + " y=" + fmt(ce.point("y")[0]) + " sum=" + fmt(ce.violation);
    }
    add(o, "monotone refutes f = x + p at (1,1) with sum 4", !r.holds() && at_corner, detail);
  }
  {
    const auto prob = config::build_problem(config::builtin(1));
    const auto r = analysis::check_diagonal_nonneg(prob.g(), prob.Q(), sampling);
    bool ok = false;
    std::string detail = "holds on samples";
    if (r.counterexample) {
      const auto& ce = *r.counterexample;
      const double q = ce.point("p")[0];
      ok = std::fabs(std::fabs(q) - 1.0) < 1e-12 && std::fabs(ce.value("f(p,p)") + std::exp(-1.0)) < 1e-12;
      detail = "q=" + fmt(q) + " g(q,q)=" + fmt(ce.value("f(p,p)"));
    }
    add(o, "diagonal-nonneg refutes example 1's g at |q| = 1 with g(q,q) = -1/e", !r.holds() && ok, detail);
  }
  {
    const auto prob = config::build_problem(config::builtin(2));
    const auto r = analysis::check_usc_first(prob.g(), prob.Q(), sampling);
    bool ok = false;
    std::string detail = "holds on samples";
    if (r.counterexample) {
      const auto& ce = *r.counterexample;
      ok = ce.point("x") == geometry::Vector{0.5};
      detail = "y=" + fmt(ce.point("x")[0]) + " g(y,q)=" + fmt(ce.value("f(x,p)")) +
               " probe value=" + fmt(ce.value("f(probe,p)"));
    }
    add(o, "usc-first refutes example 2's g at y = 1/2", !r.holds() && ok, detail);
  }
  o.seconds = seconds_since(start);
  return o;
}

void print(std::ostream& out, const Outcome& o) {
  out << "== " << o.title << " (" << fmt(o.seconds) << " s)\n";
  for (const Claim& c : o.claims) {
    out << (c.pass ? "  PASS " : "  FAIL ") << c.name;
    if (!c.detail.empty()) out << "  [" << c.detail << "]";
    out << "\n";
  }
  out << (o.pass() ? "PASS" : "FAIL") << " " << o.title << "\n";
}

}  // namespace sepwp::reproduce
