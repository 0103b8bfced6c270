#include "sepwp/sep_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "sepwp/parallel.hpp"

namespace sepwp {

using geometry::GridSample;
using geometry::PointCloud;
using geometry::Vector;

Bifunction::Bifunction(expr::Expression expression) : expression_(std::move(expression)) {
  const auto& vars = expression_.variables();
  if (vars.size() != 2 || vars[0].dim != vars[1].dim)
    throw Error("a bifunction needs exactly two variables of equal dimension");
  dim_ = vars[0].dim;
}

Bifunction Bifunction::parse(std::string_view text, std::string first, std::string second, std::size_t dim) {
  return Bifunction(expr::parse(text, {{std::move(first), dim}, {std::move(second), dim}}));
}

namespace sep {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMembershipTol = 1e-9;

double floor_eps(double epsilon) { return std::max(epsilon, kMachineEpsilonFloor); }

struct Scan {
  double min = kInf;
  std::size_t arg = 0;
  bool rejected = false;
};

// Minimum of fn(fixed, .) over the grid. With a finite cutoff the scan
// stops at the first value below -cutoff; the hint index is probed first so
// that runs of rejected points cost one evaluation each.
Scan scan_inner(const Bifunction& fn, std::span<const double> fixed, const PointCloud& grid, double cutoff,
                std::size_t hint) {
  Scan s;
  if (grid.empty()) throw EmptyCloud();
  if (hint < grid.size() && fn(fixed, grid[hint]) < -cutoff) {
    s.rejected = true;
    s.arg = hint;
    return s;
  }
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double v = fn(fixed, grid[j]);
    if (v < s.min) {
      s.min = v;
      s.arg = j;
      if (v < -cutoff) {
        s.rejected = true;
        return s;
      }
    }
  }
  return s;
}

// Largest |fn(argmin) - fn(neighbour)| over the axis neighbours of the argmin.
double local_slack(const Bifunction& fn, std::span<const double> fixed, const GridSample& inner, std::size_t arg,
                   double value) {
  const auto p = inner.cloud[arg];
  const auto& lat = inner.lattice;
  std::vector<std::int64_t> coords(p.size());
  for (std::size_t d = 0; d < p.size(); ++d)
    coords[d] = static_cast<std::int64_t>(std::llround((p[d] - lat.origin[d]) / lat.h));
  double slack = 0.0;
  for (std::size_t d = 0; d < p.size(); ++d) {
    for (int step : {-1, 1}) {
      coords[d] += step;
      if (const auto nb = lat.find(coords)) slack = std::max(slack, std::fabs(fn(fixed, inner.cloud[*nb]) - value));
      coords[d] -= step;
    }
  }
  return slack;
}

void check_grids(const GridResolution& grids) {
  if (!(grids.h_out > 0.0) || !(grids.h_in > 0.0) || !std::isfinite(grids.h_out) || !std::isfinite(grids.h_in))
    throw Error("grid resolutions must be positive and finite");
}

// Visits the lattice nodes of `sample` inside the box center +- radius.
template <class Visit>
void for_each_node_near(const GridSample& sample, std::span<const double> center, double radius, Visit&& visit) {
  const auto& lat = sample.lattice;
  const std::size_t dim = center.size();
  std::vector<std::int64_t> lo(dim), hi(dim), cur(dim);
  for (std::size_t d = 0; d < dim; ++d) {
    const auto count = static_cast<std::int64_t>(lat.counts[d]);
    lo[d] = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::floor((center[d] - radius - lat.origin[d]) / lat.h)));
    hi[d] = std::min<std::int64_t>(count - 1,
                                   static_cast<std::int64_t>(std::ceil((center[d] + radius - lat.origin[d]) / lat.h)));
    if (lo[d] > hi[d]) return;
  }
  cur = lo;
  for (;;) {
    if (const auto idx = lat.find(cur)) visit(*idx);
    std::size_t d = dim;
    while (d-- > 0) {
      if (++cur[d] <= hi[d]) break;
      cur[d] = lo[d];
    }
    if (d == static_cast<std::size_t>(-1)) return;
  }
}

}  // namespace

SplitProblem::SplitProblem(geometry::ConvexSetSpec c, geometry::ConvexSetSpec q, Bifunction f, Bifunction g,
                           geometry::LinearOperatorSpec a, GridResolution grids)
    : c_(std::move(c)), q_(std::move(q)), f_(std::move(f)), g_(std::move(g)), a_(std::move(a)), grids_(grids) {
  if (f_.dimension() != c_.dimension()) throw DimensionMismatch(c_.dimension(), f_.dimension());
  if (g_.dimension() != q_.dimension()) throw DimensionMismatch(q_.dimension(), g_.dimension());
  if (a_.cols() != c_.dimension()) throw DimensionMismatch(c_.dimension(), a_.cols());
  if (a_.rows() != q_.dimension()) throw DimensionMismatch(q_.dimension(), a_.rows());
  check_grids(grids_);
}

SplitProblem SplitProblem::with_grids(GridResolution grids) const {
  SplitProblem copy = *this;
  check_grids(grids);
  copy.grids_ = grids;
  return copy;
}

InnerInfimum inner_infimum(const Bifunction& fn, std::span<const double> fixed, const geometry::ConvexSetSpec& set,
                           double h_in) {
  if (fixed.size() != fn.dimension()) throw DimensionMismatch(fn.dimension(), fixed.size());
  const GridSample inner = geometry::sample_lattice(set, h_in);
  const Scan s = scan_inner(fn, fixed, inner.cloud, kInf, inner.cloud.size());
  const auto arg = inner.cloud[s.arg];
  return {s.min, Vector(arg.begin(), arg.end()), local_slack(fn, fixed, inner, s.arg, s.min)};
}

double eps_residual(const SplitProblem& prob, std::span<const double> x, std::span<const double> y) {
  if (!geometry::contains(prob.C(), x, kMembershipTol)) throw Infeasible("C");
  if (!geometry::contains(prob.Q(), y, kMembershipTol)) throw Infeasible("Q");
  const Vector ax = prob.A().apply(x);
  const double coupling = geometry::distance(y, ax);
  const double inf_f = inner_infimum(prob.f(), x, prob.C(), prob.grids().h_in).value;
  const double inf_g = inner_infimum(prob.g(), y, prob.Q(), prob.grids().h_in).value;
  return std::max({coupling, -inf_f, -inf_g, 0.0});
}

ResidualTable::ResidualTable(const SplitProblem& prob, GridResolution grids, double cutoff, unsigned threads)
    : prob_(&prob), grids_(grids), cutoff_(floor_eps(cutoff)) {
  check_grids(grids);
  if (!(cutoff >= 0.0) || !std::isfinite(cutoff)) throw Error("epsilon must be finite and nonnegative");

  const GridSample outer_c = geometry::sample_lattice(prob.C(), grids.h_out);
  const GridSample outer_q = geometry::sample_lattice(prob.Q(), grids.h_out);
  const GridSample inner_c = geometry::sample_lattice(prob.C(), grids.h_in);
  const GridSample inner_q = geometry::sample_lattice(prob.Q(), grids.h_in);
  if (outer_c.cloud.size() > std::numeric_limits<std::uint32_t>::max() ||
      outer_q.cloud.size() > std::numeric_limits<std::uint32_t>::max())
    throw BudgetExceeded("outer grid too large");
  xs_ = outer_c.cloud;
  ys_ = outer_q.cloud;
  const std::size_t nx = xs_.size();
  const std::size_t ny = ys_.size();
  const std::size_t m = prob.m();

  // Images Ax of every candidate x.
  std::vector<double> images(nx * m);
  for (std::size_t i = 0; i < nx; ++i) prob.A().apply_into(xs_[i], {images.data() + i * m, m});
  auto image = [&](std::size_t i) { return std::span<const double>(images.data() + i * m, m); };

  // Pass 1: which x and y take part in some pair with |y - Ax| <= cutoff.
  std::vector<char> touched_x(nx, 0), touched_y(ny, 0);
  for (std::size_t i = 0; i < nx; ++i) {
    for_each_node_near(outer_q, image(i), cutoff_, [&](std::size_t j) {
      if (geometry::distance(ys_[j], image(i)) <= cutoff_) {
        touched_x[i] = 1;
        touched_y[j] = 1;
      }
    });
  }

  // Pass 2: inner residuals, exact when at most the cutoff.
  rf_.assign(nx, kInf);
  rg_.assign(ny, kInf);
  slack_f_.assign(nx, 0.0);
  slack_g_.assign(ny, 0.0);
  auto fill = [&](const Bifunction& fn, const PointCloud& outer, const GridSample& inner,
                  const std::vector<char>& touched, std::vector<double>& residual, std::vector<double>& slack) {
    parallel_for(outer.size(), threads, [&](std::size_t begin, std::size_t end) {
      std::size_t hint = inner.cloud.size();
      for (std::size_t i = begin; i < end; ++i) {
        if (!touched[i]) continue;
        const Scan s = scan_inner(fn, outer[i], inner.cloud, cutoff_, hint);
        hint = s.arg;
        if (s.rejected) continue;
        residual[i] = -s.min;
        slack[i] = local_slack(fn, outer[i], inner, s.arg, s.min);
      }
    });
  };
  fill(prob.f(), xs_, inner_c, touched_x, rf_, slack_f_);
  fill(prob.g(), ys_, inner_q, touched_y, rg_, slack_g_);

  // Pass 3: keep pairs whose full residual is within the cutoff.
  for (std::size_t i = 0; i < nx; ++i) {
    if (!(std::max(rf_[i], 0.0) <= cutoff_)) continue;
    for_each_node_near(outer_q, image(i), cutoff_, [&](std::size_t j) {
      const double coupling = geometry::distance(ys_[j], image(i));
      if (std::max({coupling, rf_[i], rg_[j], 0.0}) <= cutoff_)
        pairs_.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j), coupling});
    });
  }
}

ApproxSolutionSet ResidualTable::select(double epsilon) const {
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw Error("epsilon must be finite and nonnegative");
  const double eps = floor_eps(epsilon);
  if (eps > cutoff_) throw Error("epsilon above the residual table cutoff");

  const std::size_t n = prob_->n();
  const std::size_t m = prob_->m();
  ApproxSolutionSet out;
  out.epsilon = eps;
  out.n = n;
  out.m = m;
  out.cloud = PointCloud(n + m, grids_.h_out);
  out.certification.h_out = grids_.h_out;
  out.certification.h_in = grids_.h_in;
  out.certification.window_C = prob_->C().window();
  out.certification.window_Q = prob_->Q().window();

  Vector point(n + m);
  for (const Pair& pr : pairs_) {
    const double r = std::max({pr.coupling, rf_[pr.x], rg_[pr.y], 0.0});
    if (r > eps) continue;
    const auto x = xs_[pr.x];
    const auto y = ys_[pr.y];
    std::copy(x.begin(), x.end(), point.begin());
    std::copy(y.begin(), y.end(), point.begin() + static_cast<std::ptrdiff_t>(n));
    out.cloud.push_back(point);
    out.residuals.push_back(r);
    out.certification.slack = std::max({out.certification.slack, slack_f_[pr.x], slack_g_[pr.y]});
  }
  return out;
}

ApproxSolutionSet approx_solution_set(const SplitProblem& prob, double epsilon, GridResolution grids,
                                      unsigned threads) {
  return ResidualTable(prob, grids, epsilon, threads).select(epsilon);
}

ApproxSolutionSet approx_solution_set(const SplitProblem& prob, double epsilon, unsigned threads) {
  return approx_solution_set(prob, epsilon, prob.grids(), threads);
}

ApproxSolutionSet solution_set(const SplitProblem& prob, double tol, GridResolution grids, unsigned threads) {
  ApproxSolutionSet s = approx_solution_set(prob, tol, grids, threads);
  s.certification.outer_approximation = true;
  return s;
}

namespace {

SequenceEntry entry_at(const ApproxSolutionSet& set, std::size_t i) {
  const auto p = set.cloud[i];
  return {Vector(p.begin(), p.begin() + static_cast<std::ptrdiff_t>(set.n)),
          Vector(p.begin() + static_cast<std::ptrdiff_t>(set.n), p.end()), set.epsilon, set.residuals[i]};
}

std::size_t nearest_index(const PointCloud& cloud, std::span<const double> target) {
  std::size_t arg = 0;
  double best = kInf;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const double d = geometry::squared_distance(cloud[i], target);
    if (d < best) {
      best = d;
      arg = i;
    }
  }
  return arg;
}

void check_schedule(const std::vector<double>& schedule) {
  for (std::size_t k = 0; k < schedule.size(); ++k) {
    if (!(schedule[k] > 0.0) || !std::isfinite(schedule[k])) throw Error("epsilon schedule entries must be positive");
    if (k > 0 && !(schedule[k] < schedule[k - 1])) throw Error("epsilon schedule must be strictly decreasing");
  }
}

}  // namespace

ApproxSequence make_approx_sequence(const SplitProblem& prob, const std::vector<double>& eps_schedule,
                                    const Selector& selector, unsigned threads) {
  check_schedule(eps_schedule);
  ApproxSequence seq;
  if (eps_schedule.empty()) return seq;

  const ResidualTable table(prob, prob.grids(), eps_schedule.front(), threads);
  std::mt19937_64 rng(selector.seed);

  std::optional<PointCloud> reference;
  if (selector.kind == Selector::Kind::FarthestFromSolution) {
    // S is approximated by S(eps_min / 10), falling back to S(eps_min).
    ApproxSolutionSet s = table.select(eps_schedule.back() / 10.0);
    if (s.cloud.empty()) s = table.select(eps_schedule.back());
    if (s.cloud.empty()) throw EmptyApproxSet(eps_schedule.back());
    reference = std::move(s.cloud);
  }

  std::optional<Vector> previous = selector.start;
  for (double eps : eps_schedule) {
    const ApproxSolutionSet set = table.select(eps);
    if (set.cloud.empty()) throw EmptyApproxSet(eps);
    std::size_t pick = 0;
    switch (selector.kind) {
      case Selector::Kind::NearestToPrevious:
        if (previous) {
          if (previous->size() != prob.n() + prob.m()) throw DimensionMismatch(prob.n() + prob.m(), previous->size());
          pick = nearest_index(set.cloud, *previous);
        }
        break;
      case Selector::Kind::Random:
        pick = static_cast<std::size_t>(rng() % set.cloud.size());
        break;
      case Selector::Kind::FarthestFromSolution: {
        double best = -1.0;
        for (std::size_t i = 0; i < set.cloud.size(); ++i) {
          const auto q = set.cloud[i];
          const double d = geometry::squared_distance((*reference)[nearest_index(*reference, q)], q);
          if (d > best) {
            best = d;
            pick = i;
          }
        }
        break;
      }
    }
    const auto p = set.cloud[pick];
    previous = Vector(p.begin(), p.end());
    seq.entries.push_back(entry_at(set, pick));
  }
  return seq;
}

SequenceVerdict validate_approx_sequence(const SplitProblem& prob, const ApproxSequence& seq) {
  auto fail = [](std::size_t i, std::string condition, double residual) {
    return SequenceVerdict{false, SequenceViolation{i, std::move(condition), residual}};
  };
  for (std::size_t i = 0; i < seq.entries.size(); ++i) {
    const SequenceEntry& e = seq.entries[i];
    if (!(e.epsilon > 0.0) || (i > 0 && e.epsilon > seq.entries[i - 1].epsilon)) return fail(i, "epsilon", e.epsilon);
    if (e.x.size() != prob.n() || !geometry::contains(prob.C(), e.x, kMembershipTol)) return fail(i, "x-membership", kInf);
    if (e.y.size() != prob.m() || !geometry::contains(prob.Q(), e.y, kMembershipTol)) return fail(i, "y-membership", kInf);
    const double coupling = geometry::distance(e.y, prob.A().apply(e.x));
    if (coupling > e.epsilon) return fail(i, "coupling", coupling);
    const double rf = -inner_infimum(prob.f(), e.x, prob.C(), prob.grids().h_in).value;
    if (rf > e.epsilon) return fail(i, "f-constraint", rf);
    const double rg = -inner_infimum(prob.g(), e.y, prob.Q(), prob.grids().h_in).value;
    if (rg > e.epsilon) return fail(i, "g-constraint", rg);
  }
  return {};
}

}  // namespace sep
}  // namespace sepwp
