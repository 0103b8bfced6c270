#include "sepwp/report.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

namespace sepwp::report {

using nlohmann::json;
using geometry::format_real;

namespace {

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json vector_json(const geometry::Vector& v) {
  json a = json::array();
  for (double x : v) a.push_back(number(x));
  return a;
}

json window_json(const std::optional<geometry::Box>& w) {
  if (!w) return nullptr;
  return {{"lower", vector_json(w->lower)}, {"upper", vector_json(w->upper)}};
}

std::string csv_real(double v) { return std::isfinite(v) ? format_real(v) : std::string(); }

}  // namespace

json to_json(const analysis::Counterexample& ce) {
  json points = json::object();
  for (const auto& [name, p] : ce.points) points[name] = vector_json(p);
  json values = json::object();
  for (const auto& [name, v] : ce.values) values[name] = number(v);
  return {{"points", points}, {"values", values}, {"violation", number(ce.violation)}};
}

json to_json(const analysis::CheckerReport& r) {
  json j = {{"property", r.property},
            {"subject", r.subject},
            {"verdict", r.holds() ? "holds-on-samples" : "refuted"},
            {"sample_count", r.sample_count},
            {"sampling", r.sampling}};
  j["counterexample"] = r.counterexample ? to_json(*r.counterexample) : json(nullptr);
  return j;
}

json to_json(const analysis::CrosscheckResult& r) {
  return {{"verdict", analysis::to_string(r.verdict)},
          {"hypotheses_hold", r.hypotheses_hold},
          {"unique_solution_evidence", r.unique_solution_evidence},
          {"notes", r.notes}};
}

json to_json(const analysis::MintyResult& r) {
  return {{"forward", r.forward},
          {"backward", r.backward},
          {"forward_min", number(r.forward_min)},
          {"backward_max", number(r.backward_max)},
          {"slack", number(r.slack)},
          {"warning", r.warning ? json(*r.warning) : json(nullptr)}};
}

json to_json(const sep::ApproxSolutionSet& s) {
  json rows = json::array();
  for (std::size_t i = 0; i < s.cloud.size(); ++i) {
    const auto p = s.cloud[i];
    rows.push_back({{"x", geometry::Vector(p.begin(), p.begin() + static_cast<std::ptrdiff_t>(s.n))},
                    {"y", geometry::Vector(p.begin() + static_cast<std::ptrdiff_t>(s.n), p.end())},
                    {"residual", s.residuals[i]}});
  }
  const auto& c = s.certification;
  return {{"epsilon", s.epsilon},
          {"n", s.n},
          {"m", s.m},
          {"h_out", c.h_out},
          {"h_in", c.h_in},
          {"window_C", window_json(c.window_C)},
          {"window_Q", window_json(c.window_Q)},
          {"slack", c.slack},
          {"outer_approximation", c.outer_approximation},
          {"points", rows}};
}

json to_json(const analysis::DiagnosisReport& r, const config::ProblemConfig* problem) {
  json curve = json::array();
  for (const auto& c : r.curve) {
    curve.push_back({{"epsilon", c.epsilon},
                     {"h_out", c.grids.h_out},
                     {"h_in", c.grids.h_in},
                     {"cloud_size", c.cloud_size},
                     {"diameter", number(c.diameter)},
                     {"hausdorff_to_S", number(c.hausdorff)},
                     {"alpha_window_relative", number(c.alpha)},
                     {"slack", c.slack}});
  }
  json checkers = json::array();
  for (const auto& c : r.checkers) checkers.push_back(to_json(c));

  const auto& s = r.solution;
  json j = {{"schema_version", kSchemaVersion},
            {"classification", analysis::to_string(r.classification)},
            {"schedule", r.schedule},
            {"thresholds",
             {{"tau_diam", r.thresholds.tau_diam}, {"tau_H", r.thresholds.tau_h}, {"rho", r.thresholds.rho}}},
            {"cover_budget", r.cover_budget},
            {"slack", r.slack},
            {"curve", curve},
            {"solution",
             {{"epsilon", s.epsilon},
              {"h_out", s.certification.h_out},
              {"h_in", s.certification.h_in},
              {"cloud_size", s.cloud.size()},
              {"diameter", number(r.solution_diameter)},
              {"slack", s.certification.slack},
              {"outer_approximation", true}}},
            {"windows", {{"C", window_json(s.certification.window_C)}, {"Q", window_json(s.certification.window_Q)}}},
            {"evidence", r.evidence},
            {"warnings", r.warnings},
            {"checkers", checkers},
            {"crosscheck", to_json(r.crosscheck)}};
  if (problem) j["problem"] = config::to_json(*problem);
  return j;
}

void write_cloud_csv(std::ostream& out, const sep::ApproxSolutionSet& s) {
  const auto& c = s.certification;
  out << "# epsilon=" << format_real(s.epsilon) << "\n";
  out << "# h_out=" << format_real(c.h_out) << " h_in=" << format_real(c.h_in) << "\n";
  auto window = [&](const char* name, const std::optional<geometry::Box>& w) {
    if (!w) return;
    out << "# window_" << name << "=";
    for (std::size_t d = 0; d < w->lower.size(); ++d)
      out << (d ? ";" : "") << "[" << format_real(w->lower[d]) << "," << format_real(w->upper[d]) << "]";
    out << "\n";
  };
  window("C", c.window_C);
  window("Q", c.window_Q);
  out << "# slack=" << format_real(c.slack) << (c.outer_approximation ? " outer_approximation=true" : "") << "\n";

  auto name = [](char v, std::size_t dim, std::size_t i) {
    return dim == 1 ? std::string(1, v) : std::string(1, v) + std::to_string(i + 1);
  };
  for (std::size_t i = 0; i < s.n; ++i) out << name('x', s.n, i) << ",";
  for (std::size_t i = 0; i < s.m; ++i) out << name('y', s.m, i) << ",";
  out << "residual\n";
  for (std::size_t i = 0; i < s.cloud.size(); ++i) {
    for (double v : s.cloud[i]) out << format_real(v) << ",";
    out << format_real(s.residuals[i]) << "\n";
  }
}

void write_curves_csv(std::ostream& out, const analysis::DiagnosisReport& r) {
  out << "epsilon,h_out,h_in,cloud_size,diameter,hausdorff_to_S,alpha_window_relative,slack\n";
  for (const auto& c : r.curve) {
    out << format_real(c.epsilon) << "," << format_real(c.grids.h_out) << "," << format_real(c.grids.h_in) << ","
        << c.cloud_size << "," << csv_real(c.diameter) << "," << csv_real(c.hausdorff) << "," << csv_real(c.alpha)
        << "," << format_real(c.slack) << "\n";
  }
}

std::string human_table(const analysis::DiagnosisReport& r) {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof line, "%-10s %-11s %-9s %-12s %-12s %-12s %-10s\n", "epsilon", "h_out", "points",
                "diameter", "hausdorff", "alpha", "slack");
  out << line;
  for (const auto& c : r.curve) {
    std::snprintf(line, sizeof line, "%-10.4g %-11.4g %-9zu %-12.6g %-12.6g %-12.6g %-10.3g\n", c.epsilon,
                  c.grids.h_out, c.cloud_size, c.diameter, c.hausdorff, c.alpha, c.slack);
    out << line;
  }
  std::snprintf(line, sizeof line, "S ~ S(%.4g): %zu points, diameter %.6g\n", r.solution.epsilon,
                r.solution.cloud.size(), r.solution_diameter);
  out << line;
  out << "classification: " << analysis::to_string(r.classification) << "\n";
  for (const auto& e : r.evidence) out << "  evidence: " << e << "\n";
  for (const auto& w : r.warnings) out << "  warning: " << w << "\n";
  for (const auto& c : r.checkers)
    out << "  check " << c.subject << " " << c.property << ": " << (c.holds() ? "holds-on-samples" : "refuted")
        << "\n";
  if (!r.checkers.empty()) out << "uniqueness cross-check: " << analysis::to_string(r.crosscheck.verdict) << "\n";
  return out.str();
}

}  // namespace sepwp::report
