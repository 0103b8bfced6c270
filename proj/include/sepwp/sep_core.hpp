#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sepwp/expr.hpp"
#include "sepwp/geometry.hpp"

namespace sepwp {

/// A real-valued function of two points of the same set, written as an
/// expression over two declared vector variables, e.g. f(x, p) = p^2 - x^2.
class Bifunction {
 public:
  Bifunction() = default;
  Bifunction(expr::Expression expression);

  /// Parses text over the variables (first, second), both of dimension dim.
  static Bifunction parse(std::string_view text, std::string first, std::string second, std::size_t dim);

  double operator()(std::span<const double> first, std::span<const double> second) const {
    const std::span<const double> slots[2] = {first, second};
    return expression_.evaluate(slots);
  }

  std::size_t dimension() const { return dim_; }
  const std::string& first_name() const { return expression_.variables()[0].name; }
  const std::string& second_name() const { return expression_.variables()[1].name; }
  const expr::Expression& expression() const { return expression_; }
  std::string text() const { return expression_.print(); }

 private:
  expr::Expression expression_;
  std::size_t dim_ = 0;
};

namespace sep {

struct GridResolution {
  double h_out = 0.0;  // spacing of the candidate (x, y) grid
  double h_in = 0.0;   // spacing of the grid that samples the inner infima
};

/// Thresholds at or below this are treated as this value.
inline constexpr double kMachineEpsilonFloor = 1e-12;

/// Find x in C with f(x, p) >= 0 for all p in C such that y = Ax in Q
/// satisfies g(y, q) >= 0 for all q in Q.
class SplitProblem {
 public:
  SplitProblem(geometry::ConvexSetSpec c, geometry::ConvexSetSpec q, Bifunction f, Bifunction g,
               geometry::LinearOperatorSpec a, GridResolution grids);

  const geometry::ConvexSetSpec& C() const { return c_; }
  const geometry::ConvexSetSpec& Q() const { return q_; }
  const Bifunction& f() const { return f_; }
  const Bifunction& g() const { return g_; }
  const geometry::LinearOperatorSpec& A() const { return a_; }
  const GridResolution& grids() const { return grids_; }
  std::size_t n() const { return c_.dimension(); }
  std::size_t m() const { return q_.dimension(); }

  SplitProblem with_grids(GridResolution grids) const;

 private:
  geometry::ConvexSetSpec c_;
  geometry::ConvexSetSpec q_;
  Bifunction f_;
  Bifunction g_;
  geometry::LinearOperatorSpec a_;
  GridResolution grids_;
};

struct InnerInfimum {
  double value;
  geometry::Vector argmin;
  /// Largest change of the function between the argmin and its lattice
  /// neighbours: a local Lipschitz estimate times h_in.
  double slack;
};

/// Minimum of fn(fixed, p) over the grid of spacing h_in on set.
InnerInfimum inner_infimum(const Bifunction& fn, std::span<const double> fixed, const geometry::ConvexSetSpec& set,
                           double h_in);

/// max(|y - Ax|, -inf_p f(x, p), -inf_q g(y, q), 0) on the inner grid.
/// Throws Infeasible when x is not in C or y not in Q.
double eps_residual(const SplitProblem& prob, std::span<const double> x, std::span<const double> y);

struct Certification {
  double h_out = 0.0;
  double h_in = 0.0;
  std::optional<geometry::Box> window_C;
  std::optional<geometry::Box> window_Q;
  double slack = 0.0;              // max local slack over certified points
  bool outer_approximation = false;  // set when the cloud stands in for S
};

/// Grid points (x, y), stored as concatenated vectors of dimension n + m,
/// whose residual is at most epsilon.
struct ApproxSolutionSet {
  double epsilon = 0.0;
  std::size_t n = 0;
  std::size_t m = 0;
  geometry::PointCloud cloud{1};
  std::vector<double> residuals;
  Certification certification;
};

/// Residuals of every candidate grid pair up to a cutoff, computed once and
/// queried for any epsilon <= cutoff. Cloud order is x-lexicographic, then
/// y-lexicographic, independent of the worker count.
class ResidualTable {
 public:
  ResidualTable(const SplitProblem& prob, GridResolution grids, double cutoff, unsigned threads = 1);

  ApproxSolutionSet select(double epsilon) const;

  double cutoff() const { return cutoff_; }
  const GridResolution& grids() const { return grids_; }

 private:
  struct Pair {
    std::uint32_t x;
    std::uint32_t y;
    double coupling;  // |y - Ax|
  };

  const SplitProblem* prob_;
  GridResolution grids_;
  double cutoff_;
  geometry::PointCloud xs_{1};
  geometry::PointCloud ys_{1};
  std::vector<Pair> pairs_;
  std::vector<double> rf_, rg_, slack_f_, slack_g_;  // +inf residual: above cutoff
};

ApproxSolutionSet approx_solution_set(const SplitProblem& prob, double epsilon, GridResolution grids,
                                      unsigned threads = 1);
ApproxSolutionSet approx_solution_set(const SplitProblem& prob, double epsilon, unsigned threads = 1);

/// S approximated by S(tol); flagged as an outer approximation.
ApproxSolutionSet solution_set(const SplitProblem& prob, double tol, GridResolution grids, unsigned threads = 1);

struct Selector {
  enum class Kind { NearestToPrevious, Random, FarthestFromSolution };
  Kind kind = Kind::NearestToPrevious;
  std::uint64_t seed = 0;
  std::optional<geometry::Vector> start;  // (x, y) reference for the first nearest pick

  static Selector nearest(std::optional<geometry::Vector> start = std::nullopt) {
    return {Kind::NearestToPrevious, 0, std::move(start)};
  }
  static Selector random(std::uint64_t seed) { return {Kind::Random, seed, std::nullopt}; }
  static Selector farthest() { return {Kind::FarthestFromSolution, 0, std::nullopt}; }
};

struct SequenceEntry {
  geometry::Vector x;
  geometry::Vector y;
  double epsilon;
  double residual;
};

struct ApproxSequence {
  std::vector<SequenceEntry> entries;
};

/// Picks one certified point of S(eps_k) per schedule entry. Throws
/// EmptyApproxSet when some S(eps_k) has no grid point.
ApproxSequence make_approx_sequence(const SplitProblem& prob, const std::vector<double>& eps_schedule,
                                    const Selector& selector, unsigned threads = 1);

struct SequenceViolation {
  std::size_t index;
  std::string condition;  // epsilon, x-membership, y-membership, coupling, f-constraint, g-constraint
  double residual;
};

struct SequenceVerdict {
  bool valid = true;
  std::optional<SequenceViolation> violation;
};

SequenceVerdict validate_approx_sequence(const SplitProblem& prob, const ApproxSequence& seq);

}  // namespace sep
}  // namespace sepwp
