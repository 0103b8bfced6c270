#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <memory>

#include "sepwp/analysis.hpp"

namespace sepwp::analysis {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kCurveTolerance = 1e-12;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

bool nonincreasing(const std::vector<double>& v) {
  for (std::size_t k = 1; k < v.size(); ++k)
    if (!(v[k] <= v[k - 1] + kCurveTolerance)) return false;
  return true;
}

double mean_ratio(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  double sum = 0.0;
  for (std::size_t k = 1; k < v.size(); ++k) sum += v[k - 1] > 0.0 ? v[k] / v[k - 1] : 0.0;
  return sum / static_cast<double>(v.size() - 1);
}

void classify(DiagnosisReport& r) {
  const Thresholds& t = r.thresholds;
  bool any_empty = false;
  std::vector<double> diam, haus;
  for (const CurvePoint& c : r.curve) {
    if (c.cloud_size == 0) {
      any_empty = true;
      r.evidence.push_back("S(" + fmt(c.epsilon) + ") has no certified grid point");
    }
    diam.push_back(c.diameter);
    haus.push_back(c.hausdorff);
  }
  const bool s_nonempty = !r.solution.cloud.empty();
  if (!s_nonempty) r.evidence.push_back("S approximation S(" + fmt(r.solution.epsilon) + ") is empty");
  if (any_empty || !s_nonempty) {
    r.classification = Classification::Inconclusive;
    return;
  }

  // Slack of the finest cloud and of S; coarser clouds do not enter the final comparisons.
  const double slack = std::max(r.curve.back().slack, r.solution.certification.slack);
  const bool diam_mono = nonincreasing(diam);
  const double diam_bound = t.tau_diam + 2.0 * slack;
  const bool diam_small = diam.back() <= diam_bound;
  const double ratio = mean_ratio(diam);
  const bool diam_contracts = ratio <= t.rho;
  r.evidence.push_back(std::string("diameter curve ") + (diam_mono ? "is" : "is not") + " nonincreasing");
  r.evidence.push_back("final diameter " + fmt(diam.back()) + (diam_small ? " <= " : " > ") + fmt(diam_bound) +
                       " (tau_diam + 2 slack)");
  r.evidence.push_back("mean successive diameter ratio " + fmt(ratio) + (diam_contracts ? " <= " : " > ") +
                       "rho " + fmt(t.rho));
  if (diam_mono && diam_small && diam_contracts) {
    r.classification = Classification::WellPosed;
    return;
  }

  const bool h_mono = nonincreasing(haus);
  const double h_bound = t.tau_h + 2.0 * slack;
  const bool h_small = haus.back() <= h_bound;
  r.evidence.push_back(std::string("Hausdorff curve ") + (h_mono ? "is" : "is not") + " nonincreasing");
  r.evidence.push_back("final Hausdorff distance " + fmt(haus.back()) + (h_small ? " <= " : " > ") + fmt(h_bound) +
                       " (tau_H + 2 slack)");
  r.classification = h_mono && h_small ? Classification::GeneralizedWellPosed : Classification::Inconclusive;
}

void check_schedule(const std::vector<double>& schedule) {
  if (schedule.size() < 4) throw ConfigError("schedule", "needs at least 4 epsilon values");
  for (std::size_t k = 0; k < schedule.size(); ++k) {
    if (!(schedule[k] > 0.0) || !std::isfinite(schedule[k])) throw ConfigError("schedule", "entries must be positive");
    if (k > 0 && !(schedule[k] < schedule[k - 1])) throw ConfigError("schedule", "must be strictly decreasing");
  }
}

}  // namespace

sep::GridResolution GridPolicy::at(double epsilon) const {
  if (fixed) return *fixed;
  if (!(ratio > 0.0)) throw ConfigError("grids.relative", "ratio must be positive");
  const double h = geometry::dyadic_floor(ratio * epsilon);
  return {h, h};
}

const char* to_string(Classification c) {
  switch (c) {
    case Classification::WellPosed: return "WellPosed";
    case Classification::GeneralizedWellPosed: return "GeneralizedWellPosed";
    case Classification::Inconclusive: return "Inconclusive";
  }
  return "Inconclusive";
}

const char* to_string(Consistency c) {
  switch (c) {
    case Consistency::Consistent: return "CONSISTENT";
    case Consistency::Tension: return "TENSION";
    case Consistency::NotApplicable: return "N/A";
  }
  return "N/A";
}

DiagnosisReport diagnose(const sep::SplitProblem& prob, const DiagnoseOptions& options) {
  check_schedule(options.schedule);
  const unsigned threads = std::max(1u, options.threads);

  DiagnosisReport r;
  r.schedule = options.schedule;
  r.thresholds = options.thresholds;
  r.cover_budget = options.cover_budget;

  // One residual table per distinct grid; with a fixed grid it is shared.
  std::unique_ptr<sep::ResidualTable> table;
  auto table_for = [&](double cutoff) -> const sep::ResidualTable& {
    const sep::GridResolution g = options.grids.at(cutoff);
    if (!table || options.grids.fixed == std::nullopt) {
      table = std::make_unique<sep::ResidualTable>(prob, g, options.grids.fixed ? options.schedule.front() : cutoff,
                                                   threads);
    }
    return *table;
  };

  for (std::size_t k = 0; k < options.schedule.size(); ++k) {
    const double eps = options.schedule[k];
    const sep::ResidualTable& t = table_for(eps);
    r.clouds.push_back(t.select(eps));
    if (k + 1 == options.schedule.size()) {
      r.solution = t.select(eps / 10.0);
      r.solution.certification.outer_approximation = true;
    }
  }
  table.reset();

  r.solution_diameter = r.solution.cloud.empty() ? kNaN : geometry::diameter(r.solution.cloud, threads);
  r.slack = r.solution.certification.slack;
  for (const sep::ApproxSolutionSet& s : r.clouds) {
    CurvePoint c;
    c.epsilon = s.epsilon;
    c.grids = {s.certification.h_out, s.certification.h_in};
    c.cloud_size = s.cloud.size();
    c.slack = s.certification.slack;
    if (s.cloud.empty()) {
      c.diameter = c.hausdorff = c.alpha = kNaN;
    } else {
      c.diameter = geometry::diameter(s.cloud, threads);
      c.hausdorff = r.solution.cloud.empty() ? kNaN : geometry::hausdorff(s.cloud, r.solution.cloud, threads);
      c.alpha = geometry::kuratowski_estimate(s.cloud, options.cover_budget);
    }
    r.slack = std::max(r.slack, c.slack);
    r.curve.push_back(c);
  }

  for (const CurvePoint& c : r.curve)
    if (c.slack >= c.epsilon)
      r.warnings.push_back("certification slack " + fmt(c.slack) + " is not below epsilon " + fmt(c.epsilon) +
                           "; refine the grids");

  classify(r);

  if (options.run_checkers) {
    r.checkers = run_all_checkers(prob, options.sampling);
    for (const CheckerReport& c : r.checkers)
      if (c.property == "usc-first" && !c.holds())
        r.warnings.push_back("upper semicontinuity of " + c.subject +
                             " in the first variable is refuted; the diameter and noncompactness "
                             "characterizations lose their sufficiency direction");
    r.crosscheck = uniqueness_crosscheck(prob, r.checkers, r);
  }
  return r;
}

CrosscheckResult uniqueness_crosscheck(const sep::SplitProblem& prob, const std::vector<CheckerReport>& checkers,
                                       const DiagnosisReport& diagnosis) {
  CrosscheckResult out;
  out.hypotheses_hold = true;
  for (const char* subject : {"f", "g"}) {
    for (const char* name : {"monotone", "hemicontinuous", "convex-second", "lsc-second", "diagonal-nonneg"}) {
      const auto it = std::find_if(checkers.begin(), checkers.end(), [&](const CheckerReport& c) {
        return c.subject == subject && c.property == name;
      });
      if (it == checkers.end()) {
        out.hypotheses_hold = false;
        out.notes.push_back(std::string(name) + " was not checked for " + subject);
      } else if (!it->holds()) {
        out.hypotheses_hold = false;
        out.notes.push_back(std::string(name) + " is refuted for " + subject);
      }
    }
  }

  const auto& s = diagnosis.solution;
  if (!s.cloud.empty()) {
    const double cell = std::sqrt(static_cast<double>(prob.n() + prob.m())) * s.certification.h_out;
    const double bound = 2.0 * diagnosis.solution.certification.slack + cell;
    out.unique_solution_evidence = diagnosis.solution_diameter <= bound;
    out.notes.push_back("diameter of S " + fmt(diagnosis.solution_diameter) +
                        (out.unique_solution_evidence ? " <= " : " > ") + fmt(bound) +
                        " (2 slack + one grid cell)");
  } else {
    out.notes.push_back("S approximation is empty");
  }

  if (!out.hypotheses_hold || s.cloud.empty()) {
    out.verdict = Consistency::NotApplicable;
    return out;
  }
  const bool well_posed = diagnosis.classification == Classification::WellPosed;
  out.verdict = well_posed == out.unique_solution_evidence ? Consistency::Consistent : Consistency::Tension;
  return out;
}

}  // namespace sepwp::analysis
