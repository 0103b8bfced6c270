#pragma once

#include <iosfwd>
#include <string>

#include <nlohmann/json.hpp>

#include "sepwp/analysis.hpp"
#include "sepwp/config.hpp"
#include "sepwp/sep_core.hpp"

namespace sepwp::report {

/// Bumped on any incompatible change of the report layout.
inline constexpr int kSchemaVersion = 1;

nlohmann::json to_json(const analysis::Counterexample& ce);
nlohmann::json to_json(const analysis::CheckerReport& report);
nlohmann::json to_json(const analysis::CrosscheckResult& result);
nlohmann::json to_json(const analysis::MintyResult& result);

/// Full report; NaN metrics (empty clouds) serialize as null.
nlohmann::json to_json(const analysis::DiagnosisReport& report, const config::ProblemConfig* problem = nullptr);

/// Header (epsilon, grids, windows, slack) and the point rows.
nlohmann::json to_json(const sep::ApproxSolutionSet& set);

/// '#'-prefixed metadata lines, then x1..xn,y1..ym,residual rows.
void write_cloud_csv(std::ostream& out, const sep::ApproxSolutionSet& set);

/// One row per epsilon: grids, cloud size, diameter, Hausdorff, alpha, slack.
void write_curves_csv(std::ostream& out, const analysis::DiagnosisReport& report);

/// Fixed-width summary for terminals.
std::string human_table(const analysis::DiagnosisReport& report);

}  // namespace sepwp::report
