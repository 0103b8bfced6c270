#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sepwp/geometry.hpp"
#include "sepwp/sep_core.hpp"

namespace sepwp::analysis {

/// Absolute tolerance for refuting an algebraic inequality on a sample.
inline constexpr double kCheckTolerance = 1e-9;

enum class Verdict { HoldsOnSamples, Refuted };

/// Replayable witness of a refuted property.
struct Counterexample {
  std::vector<std::pair<std::string, geometry::Vector>> points;
  std::vector<std::pair<std::string, double>> values;
  double violation = 0.0;  // amount by which the defining inequality fails

  const geometry::Vector& point(const std::string& name) const;
  double value(const std::string& name) const;
};

struct CheckerReport {
  std::string property;
  std::string subject;  // "f" or "g" when produced for a problem
  Verdict verdict = Verdict::HoldsOnSamples;
  std::optional<Counterexample> counterexample;
  std::size_t sample_count = 0;
  std::string sampling;

  bool holds() const { return verdict == Verdict::HoldsOnSamples; }
};

/// How checkers draw points from a set: a dyadic grid of about
/// grid_points per axis plus seeded random points projected onto the set.
struct SamplingOptions {
  std::size_t grid_points = 32;
  std::size_t random_points = 32;
  std::uint64_t seed = 0;
};

/// Sampled points of a (windowed) set, grid part first in lexicographic order.
std::vector<geometry::Vector> sample_points(const geometry::ConvexSetSpec& set, const SamplingOptions& options);

/// f(x, y) + f(y, x) <= 0.
CheckerReport check_monotone(const Bifunction& fn, const geometry::ConvexSetSpec& set, std::size_t n_pairs,
                             std::uint64_t seed);

/// limsup_{t -> 0+} f(x + t(y - x), y) <= f(x, y), probed along t_schedule.
/// A pair is refuted when the excess stays above tolerance on the tail of the
/// schedule without decaying toward zero.
CheckerReport check_hemicontinuous(const Bifunction& fn, const geometry::ConvexSetSpec& set,
                                   const SamplingOptions& options,
                                   const std::vector<double>& t_schedule = {1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6});

/// f(x, l p + (1 - l) p') <= l f(x, p) + (1 - l) f(x, p').
CheckerReport check_convex_second(const Bifunction& fn, const geometry::ConvexSetSpec& set,
                                  const SamplingOptions& options,
                                  const std::vector<double>& lambdas = {0.25, 0.5, 0.75});

/// Sequential probes along 8 shrinking radii with 16 directions each.
CheckerReport check_lsc_second(const Bifunction& fn, const geometry::ConvexSetSpec& set,
                               const SamplingOptions& options);
CheckerReport check_usc_first(const Bifunction& fn, const geometry::ConvexSetSpec& set,
                              const SamplingOptions& options);

/// f(p, p) >= 0.
CheckerReport check_diagonal_nonneg(const Bifunction& fn, const geometry::ConvexSetSpec& set,
                                    const SamplingOptions& options);

/// Property names accepted by run_checker.
const std::vector<std::string>& property_names();

/// Runs one named property; throws Error for an unknown name.
CheckerReport run_checker(const std::string& property, const Bifunction& fn, const geometry::ConvexSetSpec& set,
                          const SamplingOptions& options);

/// Every property for f on C and g on Q.
std::vector<CheckerReport> run_all_checkers(const sep::SplitProblem& prob, const SamplingOptions& options);

struct MintyResult {
  bool forward = false;       // min_y h(x*, y) >= -slack
  bool backward = false;      // max_y h(y, x*) <= slack
  double forward_min = 0.0;
  double backward_max = 0.0;
  double slack = 0.0;
  std::optional<std::string> warning;
};

/// Forward and backward Minty conditions of a bifunction at a candidate,
/// on the grid of spacing h_in. When hypotheses are given and all of
/// monotone, hemicontinuous, convex-second and diagonal-nonneg hold for
/// subject, a disagreement is reported as a warning.
MintyResult minty_check(const Bifunction& fn, const geometry::ConvexSetSpec& set, std::span<const double> candidate,
                        double h_in, const std::vector<CheckerReport>* hypotheses = nullptr,
                        const std::string& subject = "");

struct ProblemMinty {
  MintyResult f;
  MintyResult g;
  bool forward() const { return f.forward && g.forward; }
  bool backward() const { return f.backward && g.backward; }
};

/// Minty conditions for f at x* and g at y* together.
ProblemMinty minty_check(const sep::SplitProblem& prob, std::span<const double> x, std::span<const double> y,
                         const std::vector<CheckerReport>* hypotheses = nullptr);

struct Thresholds {
  double tau_diam = 0.05;
  double tau_h = 0.05;
  double rho = 0.9;
};

/// Grid used for each epsilon: either one fixed pair of spacings, or
/// spacing dyadic_floor(ratio * eps) per epsilon.
struct GridPolicy {
  std::optional<sep::GridResolution> fixed;
  double ratio = 0.25;

  sep::GridResolution at(double epsilon) const;
};

struct DiagnoseOptions {
  std::vector<double> schedule;
  GridPolicy grids;
  Thresholds thresholds;
  std::size_t cover_budget = 16;
  unsigned threads = 1;
  SamplingOptions sampling;
  bool run_checkers = true;
};

enum class Classification { WellPosed, GeneralizedWellPosed, Inconclusive };
const char* to_string(Classification c);

struct CurvePoint {
  double epsilon;
  sep::GridResolution grids;
  std::size_t cloud_size;
  double diameter;   // NaN when the cloud is empty
  double hausdorff;  // NaN when either cloud is empty
  double alpha;      // window-relative covering estimate
  double slack;
};

enum class Consistency { Consistent, Tension, NotApplicable };
const char* to_string(Consistency c);

struct CrosscheckResult {
  Consistency verdict = Consistency::NotApplicable;
  bool hypotheses_hold = false;
  bool unique_solution_evidence = false;
  std::vector<std::string> notes;
};

struct DiagnosisReport {
  std::vector<double> schedule;
  Thresholds thresholds;
  std::size_t cover_budget = 0;
  std::vector<CurvePoint> curve;
  std::vector<sep::ApproxSolutionSet> clouds;
  sep::ApproxSolutionSet solution;  // S approximated by S(eps_min / 10)
  double solution_diameter = 0.0;   // NaN when empty
  double slack = 0.0;               // largest certification slack seen
  Classification classification = Classification::Inconclusive;
  std::vector<std::string> evidence;
  std::vector<std::string> warnings;
  std::vector<CheckerReport> checkers;
  CrosscheckResult crosscheck;
};

/// Computes S(eps) for the schedule and S, their diameter / Hausdorff /
/// covering curves, runs the checkers and classifies. Never emits
/// "ill-posed": failing evidence yields Inconclusive.
DiagnosisReport diagnose(const sep::SplitProblem& prob, const DiagnoseOptions& options);

/// If every uniqueness hypothesis holds on samples for f and g and S looks
/// like a single point, the diagnosis is expected to be WellPosed. Advisory
/// only; never changes the diagnosis.
CrosscheckResult uniqueness_crosscheck(const sep::SplitProblem& prob, const std::vector<CheckerReport>& checkers,
                                       const DiagnosisReport& diagnosis);

}  // namespace sepwp::analysis
