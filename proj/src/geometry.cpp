#include "sepwp/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "sepwp/parallel.hpp"

namespace sepwp::geometry {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_dim(std::size_t expected, std::size_t got) {
  if (expected != got) throw DimensionMismatch(expected, got);
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void validate_box(const Box& b, std::size_t dim) {
  require_dim(dim, b.lower.size());
  require_dim(dim, b.upper.size());
  for (std::size_t i = 0; i < dim; ++i) {
    if (std::isnan(b.lower[i]) || std::isnan(b.upper[i])) throw Error("box bound is NaN");
    if (b.lower[i] > b.upper[i]) throw Error("box lower bound exceeds upper bound in coordinate " + std::to_string(i));
    if (b.lower[i] == kInf || b.upper[i] == -kInf) throw Error("box is empty");
  }
}

}  // namespace

ConvexSetSpec ConvexSetSpec::box(Vector lower, Vector upper) {
  if (lower.empty()) throw Error("set dimension must be positive");
  Box b{std::move(lower), std::move(upper)};
  validate_box(b, b.lower.size());
  const std::size_t dim = b.lower.size();
  return ConvexSetSpec(dim, std::move(b));
}

ConvexSetSpec ConvexSetSpec::ball(Vector center, double radius) {
  if (center.empty()) throw Error("set dimension must be positive");
  for (double c : center)
    if (!std::isfinite(c)) throw Error("ball center must be finite");
  if (!(radius > 0.0) || !std::isfinite(radius)) throw Error("ball radius must be positive and finite");
  const std::size_t dim = center.size();
  return ConvexSetSpec(dim, Ball{std::move(center), radius});
}

ConvexSetSpec ConvexSetSpec::halfspaces(std::vector<Halfspace> halfspaces, Vector witness) {
  if (witness.empty()) throw Error("set dimension must be positive");
  const std::size_t dim = witness.size();
  for (const auto& h : halfspaces) {
    require_dim(dim, h.normal.size());
    double norm2 = 0.0;
    for (double a : h.normal) {
      if (!std::isfinite(a)) throw Error("half-space normal must be finite");
      norm2 += a * a;
    }
    if (norm2 == 0.0) throw Error("half-space normal must be nonzero");
    if (!std::isfinite(h.offset)) throw Error("half-space offset must be finite");
  }
  ConvexSetSpec set(dim, HalfspaceIntersection{std::move(halfspaces), witness});
  if (!contains(set, witness, 1e-9)) throw Error("half-space witness point violates a constraint");
  return set;
}

ConvexSetSpec ConvexSetSpec::with_window(double radius) const {
  if (!(radius > 0.0) || !std::isfinite(radius)) throw Error("window radius must be positive and finite");
  return with_window(Box{Vector(dim_, -radius), Vector(dim_, radius)});
}

ConvexSetSpec ConvexSetSpec::with_window(Box window) const {
  validate_box(window, dim_);
  for (std::size_t i = 0; i < dim_; ++i)
    if (!std::isfinite(window.lower[i]) || !std::isfinite(window.upper[i]))
      throw Error("sampling window must be finite");
  ConvexSetSpec copy = *this;
  copy.window_ = std::move(window);
  return copy;
}

bool ConvexSetSpec::bounded() const {
  if (const auto* b = std::get_if<Box>(&shape_)) {
    for (std::size_t i = 0; i < dim_; ++i)
      if (!std::isfinite(b->lower[i]) || !std::isfinite(b->upper[i])) return false;
    return true;
  }
  // Half-space systems are treated as unbounded; boundedness would need an LP.
  return std::holds_alternative<Ball>(shape_);
}

Box ConvexSetSpec::sampling_box() const {
  Box out{Vector(dim_, -kInf), Vector(dim_, kInf)};
  if (const auto* b = std::get_if<Box>(&shape_)) {
    out = *b;
  } else if (const auto* ball = std::get_if<Ball>(&shape_)) {
    for (std::size_t i = 0; i < dim_; ++i) {
      out.lower[i] = ball->center[i] - ball->radius;
      out.upper[i] = ball->center[i] + ball->radius;
    }
  }
  if (window_) {
    for (std::size_t i = 0; i < dim_; ++i) {
      out.lower[i] = std::max(out.lower[i], window_->lower[i]);
      out.upper[i] = std::min(out.upper[i], window_->upper[i]);
    }
  }
  for (std::size_t i = 0; i < dim_; ++i) {
    if (!std::isfinite(out.lower[i]) || !std::isfinite(out.upper[i]))
      throw Unbounded("set is unbounded in coordinate " + std::to_string(i) + " and has no sampling window");
  }
  return out;
}

bool contains(const ConvexSetSpec& set, std::span<const double> x, double tol) {
  require_dim(set.dimension(), x.size());
  for (double v : x)
    if (std::isnan(v)) return false;
  return std::visit(
      [&](const auto& s) -> bool {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Box>) {
          for (std::size_t i = 0; i < x.size(); ++i)
            if (x[i] < s.lower[i] - tol || x[i] > s.upper[i] + tol) return false;
          return true;
        } else if constexpr (std::is_same_v<T, Ball>) {
          return distance(x, s.center) <= s.radius + tol;
        } else {
          for (const auto& h : s.halfspaces)
            if (dot(h.normal, x) > h.offset + tol) return false;
          return true;
        }
      },
      set.shape());
}

Vector project(const ConvexSetSpec& set, std::span<const double> x) {
  require_dim(set.dimension(), x.size());
  Vector out(x.begin(), x.end());
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Box>) {
          for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::clamp(out[i], s.lower[i], s.upper[i]);
        } else if constexpr (std::is_same_v<T, Ball>) {
          const double d = distance(out, s.center);
          if (d > s.radius) {
            const double scale = s.radius / d;
            for (std::size_t i = 0; i < out.size(); ++i) out[i] = s.center[i] + scale * (out[i] - s.center[i]);
          }
        } else {
          constexpr int kMaxIterations = 10'000;
          constexpr double kTolerance = 1e-10;
          for (int it = 0; it < kMaxIterations; ++it) {
            double worst = 0.0;
            for (const auto& h : s.halfspaces) {
              const double excess = dot(h.normal, out) - h.offset;
              if (excess <= 0.0) continue;
              const double n2 = dot(h.normal, h.normal);
              for (std::size_t i = 0; i < out.size(); ++i) out[i] -= excess / n2 * h.normal[i];
              worst = std::max(worst, excess / std::sqrt(n2));
            }
            if (worst <= kTolerance) {
              if (contains(set, out, kTolerance)) return;
            }
          }
          throw NotSupported("alternating projections did not converge within 10000 sweeps");
        }
      },
      set.shape());
  return out;
}

PointCloud PointCloud::from_points(const std::vector<Vector>& points, double resolution) {
  if (points.empty()) throw EmptyCloud();
  PointCloud cloud(points.front().size(), resolution);
  cloud.reserve(points.size());
  for (const auto& p : points) cloud.push_back(p);
  return cloud;
}

void PointCloud::push_back(std::span<const double> point) {
  require_dim(dim_, point.size());
  for (double v : point)
    if (!std::isfinite(v)) throw Error("point cloud coordinates must be finite");
  coords_.insert(coords_.end(), point.begin(), point.end());
}

std::optional<std::size_t> Lattice::find(std::span<const std::int64_t> coords) const {
  std::size_t flat = 0;
  for (std::size_t d = 0; d < counts.size(); ++d) {
    if (coords[d] < 0 || static_cast<std::size_t>(coords[d]) >= counts[d]) return std::nullopt;
    flat = flat * counts[d] + static_cast<std::size_t>(coords[d]);
  }
  const std::int32_t idx = point_index[flat];
  if (idx < 0) return std::nullopt;
  return static_cast<std::size_t>(idx);
}

GridSample sample_lattice(const ConvexSetSpec& set, double h, std::size_t max_points) {
  if (!(h > 0.0) || !std::isfinite(h)) throw Error("grid resolution must be positive");
  const Box box = set.sampling_box();
  const std::size_t dim = set.dimension();

  Lattice lattice;
  lattice.origin = box.lower;
  lattice.h = h;
  lattice.counts.resize(dim);
  double total = 1.0;
  for (std::size_t d = 0; d < dim; ++d) {
    const double steps = std::floor((box.upper[d] - box.lower[d]) / h + 1e-9);
    lattice.counts[d] = static_cast<std::size_t>(steps) + 1;
    total *= static_cast<double>(lattice.counts[d]);
  }
  if (total > static_cast<double>(max_points))
    throw BudgetExceeded("grid of spacing " + format_real(h) + " has " + format_real(total) +
                         " nodes, above the cap of " + std::to_string(max_points));

  const auto nodes = static_cast<std::size_t>(total);
  lattice.point_index.assign(nodes, -1);
  PointCloud cloud(dim, h);
  std::vector<std::size_t> idx(dim, 0);
  Vector point(dim);
  for (std::size_t flat = 0; flat < nodes; ++flat) {
    for (std::size_t d = 0; d < dim; ++d) point[d] = box.lower[d] + static_cast<double>(idx[d]) * h;
    if (contains(set, point, 1e-12)) {
      lattice.point_index[flat] = static_cast<std::int32_t>(cloud.size());
      cloud.push_back(point);
    }
    for (std::size_t d = dim; d-- > 0;) {
      if (++idx[d] < lattice.counts[d]) break;
      idx[d] = 0;
    }
  }
  return {std::move(cloud), std::move(lattice)};
}

PointCloud sample_grid(const ConvexSetSpec& set, double h, std::size_t max_points) {
  return sample_lattice(set, h, max_points).cloud;
}

double dyadic_floor(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) throw Error("dyadic_floor needs a positive finite value");
  int e = 0;
  const double m = std::frexp(x, &e);  // x = m * 2^e, m in [0.5, 1)
  (void)m;
  return std::ldexp(1.0, e - 1);
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

double distance(std::span<const double> a, std::span<const double> b) { return std::sqrt(squared_distance(a, b)); }

bool lex_less(std::span<const double> a, std::span<const double> b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

namespace {

double brute_force_diameter2(const PointCloud& cloud, std::span<const std::size_t> ids) {
  double best = 0.0;
  for (std::size_t i = 0; i < ids.size(); ++i)
    for (std::size_t j = i + 1; j < ids.size(); ++j)
      best = std::max(best, squared_distance(cloud[ids[i]], cloud[ids[j]]));
  return best;
}

std::size_t farthest_from(const PointCloud& cloud, std::span<const std::size_t> ids, std::span<const double> from) {
  std::size_t arg = ids.front();
  double best = -1.0;
  for (std::size_t id : ids) {
    const double d = squared_distance(cloud[id], from);
    if (d > best) {
      best = d;
      arg = id;
    }
  }
  return arg;
}

// Exact squared diameter of a subset. Points that cannot belong to a pair
// longer than the double-sweep lower bound are discarded before the
// quadratic pass: any pair (u, v) satisfies |u-v| <= |u-c| + R.
double subset_diameter2(const PointCloud& cloud, std::span<const std::size_t> ids) {
  if (ids.size() < 2) return 0.0;
  if (ids.size() <= 64) return brute_force_diameter2(cloud, ids);

  const std::size_t dim = cloud.dimension();
  Vector lo(dim, kInf), hi(dim, -kInf), center(dim);
  for (std::size_t id : ids) {
    const auto p = cloud[id];
    for (std::size_t d = 0; d < dim; ++d) {
      lo[d] = std::min(lo[d], p[d]);
      hi[d] = std::max(hi[d], p[d]);
    }
  }
  for (std::size_t d = 0; d < dim; ++d) center[d] = 0.5 * (lo[d] + hi[d]);

  std::vector<double> radial(ids.size());
  double radius = 0.0;
  for (std::size_t k = 0; k < ids.size(); ++k) {
    radial[k] = distance(cloud[ids[k]], center);
    radius = std::max(radius, radial[k]);
  }
  const std::size_t a = farthest_from(cloud, ids, cloud[ids.front()]);
  const std::size_t b = farthest_from(cloud, ids, cloud[a]);
  const double lower2 = squared_distance(cloud[a], cloud[b]);
  const double threshold = std::sqrt(lower2) - radius - 1e-9 * (1.0 + radius);

  std::vector<std::size_t> candidates;
  for (std::size_t k = 0; k < ids.size(); ++k)
    if (radial[k] >= threshold) candidates.push_back(ids[k]);
  return std::max(lower2, brute_force_diameter2(cloud, candidates));
}

std::vector<std::size_t> all_ids(std::size_t n) {
  std::vector<std::size_t> ids(n);
  for (std::size_t i = 0; i < n; ++i) ids[i] = i;
  return ids;
}

}  // namespace

double diameter(const PointCloud& cloud, unsigned /*threads*/) {
  if (cloud.empty()) throw EmptyCloud();
  const auto ids = all_ids(cloud.size());
  return std::sqrt(subset_diameter2(cloud, ids));
}

double directed_distance(const PointCloud& from, const PointCloud& to, unsigned threads) {
  if (from.empty() || to.empty()) throw EmptyCloud();
  require_dim(from.dimension(), to.dimension());
  const std::size_t n = from.size();
  const std::size_t m = to.size();

  // Early-break scan: once a point is known to be within the running
  // maximum of some target it cannot raise the supremum.
  std::vector<double> chunk_max(std::max(1u, threads), 0.0);
  const std::size_t workers = std::clamp<std::size_t>(threads, 1, n);
  const std::size_t chunk = (n + workers - 1) / workers;
  parallel_for(n, static_cast<unsigned>(workers), [&](std::size_t begin, std::size_t end) {
    double cmax = 0.0;
    std::size_t hint = 0;
    for (std::size_t i = begin; i < end; ++i) {
      const auto p = from[i];
      double cmin = kInf;
      const std::size_t start = hint;
      for (std::size_t k = 0; k < m; ++k) {
        const std::size_t j = start + k < m ? start + k : start + k - m;
        const double d = squared_distance(p, to[j]);
        if (d < cmin) {
          cmin = d;
          hint = j;
          if (cmin <= cmax) break;
        }
      }
      cmax = std::max(cmax, cmin);
    }
    chunk_max[begin / chunk] = cmax;
  });
  return std::sqrt(*std::max_element(chunk_max.begin(), chunk_max.end()));
}

double hausdorff(const PointCloud& a, const PointCloud& b, unsigned threads) {
  return std::max(directed_distance(a, b, threads), directed_distance(b, a, threads));
}

namespace {

// Index of the lexicographically smallest point among those maximizing key.
std::size_t argmax_lex(const PointCloud& cloud, const std::vector<double>& key) {
  std::size_t arg = 0;
  for (std::size_t i = 1; i < key.size(); ++i) {
    if (key[i] > key[arg] || (key[i] == key[arg] && lex_less(cloud[i], cloud[arg]))) arg = i;
  }
  return arg;
}

// Largest cluster diameter for a given assignment.
double max_cluster_diameter(const PointCloud& cloud, const std::vector<std::size_t>& owner, std::size_t k) {
  std::vector<std::vector<std::size_t>> members(k);
  for (std::size_t i = 0; i < owner.size(); ++i) members[owner[i]].push_back(i);
  double worst2 = 0.0;
  for (const auto& ids : members) worst2 = std::max(worst2, subset_diameter2(cloud, ids));
  return std::sqrt(worst2);
}

void assign(const PointCloud& cloud, const std::vector<Vector>& centers, std::vector<std::size_t>& owner) {
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    double best = kInf;
    std::size_t arg = 0;
    for (std::size_t c = 0; c < centers.size(); ++c) {
      const double d = squared_distance(cloud[i], centers[c]);
      if (d < best) {
        best = d;
        arg = c;
      }
    }
    owner[i] = arg;
  }
}

// Moves each center to the middle of its cluster's bounding box and
// reassigns; returns the smallest max-cluster diameter seen.
double refine(const PointCloud& cloud, std::vector<Vector> centers, std::vector<std::size_t> owner, double best) {
  constexpr int kMaxRounds = 20;
  const std::size_t dim = cloud.dimension();
  const std::size_t k = centers.size();
  for (int round = 0; round < kMaxRounds; ++round) {
    std::vector<Vector> lo(k, Vector(dim, kInf)), hi(k, Vector(dim, -kInf));
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      const auto p = cloud[i];
      for (std::size_t d = 0; d < dim; ++d) {
        lo[owner[i]][d] = std::min(lo[owner[i]][d], p[d]);
        hi[owner[i]][d] = std::max(hi[owner[i]][d], p[d]);
      }
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (lo[c][0] > hi[c][0]) continue;  // empty cluster keeps its center
      for (std::size_t d = 0; d < dim; ++d) centers[c][d] = 0.5 * (lo[c][d] + hi[c][d]);
    }
    std::vector<std::size_t> next(owner.size());
    assign(cloud, centers, next);
    if (next == owner) break;
    owner = std::move(next);
    best = std::min(best, max_cluster_diameter(cloud, owner, k));
  }
  return best;
}

// Greedy cover by cubes of the given side, each anchored at the first
// uncovered point in lexicographic order (first coordinate in
// [a, a + side], the others within side / 2). Stops once limit is exceeded.
std::size_t cube_cover_count(const PointCloud& cloud, const std::vector<std::size_t>& order, double side,
                             std::size_t limit) {
  const std::size_t dim = cloud.dimension();
  std::vector<char> covered(order.size(), 0);
  std::size_t count = 0;
  for (std::size_t a = 0; a < order.size(); ++a) {
    if (covered[a]) continue;
    if (++count > limit) return count;
    const auto anchor = cloud[order[a]];
    for (std::size_t b = a; b < order.size(); ++b) {
      const auto p = cloud[order[b]];
      if (p[0] > anchor[0] + side) break;
      if (covered[b]) continue;
      bool inside = true;
      for (std::size_t d = 1; d < dim && inside; ++d) inside = std::fabs(p[d] - anchor[d]) <= 0.5 * side;
      if (inside) covered[b] = 1;
    }
  }
  return count;
}

// Smallest side k * width / 64 whose greedy cube cover fits the budget,
// returned as the cube diameter; the candidate set is fixed, so the result
// is nonincreasing in the budget.
double cube_cover_bound(const PointCloud& cloud, std::size_t budget, double stop_at) {
  constexpr int kSteps = 64;
  const std::size_t n = cloud.size();
  const std::size_t dim = cloud.dimension();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return lex_less(cloud[a], cloud[b]) || (!lex_less(cloud[b], cloud[a]) && a < b);
  });
  double width = 0.0;
  for (std::size_t d = 0; d < dim; ++d) {
    double lo = kInf, hi = -kInf;
    for (std::size_t i = 0; i < n; ++i) {
      lo = std::min(lo, cloud[i][d]);
      hi = std::max(hi, cloud[i][d]);
    }
    width = std::max(width, hi - lo);
  }
  const double root_dim = std::sqrt(static_cast<double>(dim));
  for (int k = 1; k <= kSteps; ++k) {
    const double side = width * k / kSteps;
    if (side * root_dim >= stop_at) break;
    if (cube_cover_count(cloud, order, side, budget) <= budget) return side * root_dim;
  }
  return kInf;
}

}  // namespace

double kuratowski_estimate(const PointCloud& cloud, std::size_t max_cover_sets) {
  if (cloud.empty()) throw EmptyCloud();
  if (max_cover_sets == 0) throw Error("covering budget must be at least 1");
  const std::size_t n = cloud.size();

  // Farthest-point seeding starts from the lexicographically smallest point.
  std::size_t first = 0;
  for (std::size_t i = 1; i < n; ++i)
    if (lex_less(cloud[i], cloud[first])) first = i;

  std::vector<Vector> centers;
  std::vector<double> nearest2(n, kInf);
  std::vector<std::size_t> owner(n, 0);
  double best = kInf;
  std::size_t next_center = first;
  for (std::size_t k = 1; k <= max_cover_sets; ++k) {
    const auto c = cloud[next_center];
    centers.emplace_back(c.begin(), c.end());
    for (std::size_t i = 0; i < n; ++i) {
      const double d = squared_distance(cloud[i], c);
      if (d < nearest2[i]) {
        nearest2[i] = d;
        owner[i] = k - 1;
      }
    }
    const std::size_t far = argmax_lex(cloud, nearest2);
    if (nearest2[far] == 0.0) return 0.0;  // every point is a center

    const double seeded = max_cluster_diameter(cloud, owner, k);
    best = std::min(best, refine(cloud, centers, owner, seeded));
    next_center = far;
  }
  best = std::min(best, cube_cover_bound(cloud, max_cover_sets, best));
  if (best == 0.0) return 0.0;
  // Cover sets need diameter strictly below eps.
  return std::nextafter(best, kInf);
}

LinearOperatorSpec::LinearOperatorSpec(std::size_t rows, std::size_t cols, std::vector<double> row_major)
    : rows_(rows), cols_(cols), entries_(std::move(row_major)), norm_(0.0) {
  if (rows == 0 || cols == 0) throw Error("operator dimensions must be positive");
  if (entries_.size() != rows * cols) throw DimensionMismatch(rows * cols, entries_.size());
  for (double a : entries_)
    if (!std::isfinite(a)) throw Error("operator entries must be finite");

  // Lower bound: largest column norm |A e_j|.
  double lower = 0.0;
  for (std::size_t j = 0; j < cols; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < rows; ++i) s += entries_[i * cols + j] * entries_[i * cols + j];
    lower = std::max(lower, std::sqrt(s));
  }
  // Power iteration on A^T A.
  Vector v(cols, 1.0 / std::sqrt(static_cast<double>(cols))), av(rows), w(cols);
  double estimate = 0.0;
  for (int it = 0; it < 100; ++it) {
    apply_into(v, av);
    for (std::size_t j = 0; j < cols; ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < rows; ++i) s += entries_[i * cols + j] * av[i];
      w[j] = s;
    }
    double wn = 0.0;
    for (double x : w) wn += x * x;
    wn = std::sqrt(wn);
    if (wn == 0.0) break;
    estimate = std::sqrt(wn);
    for (std::size_t j = 0; j < cols; ++j) v[j] = w[j] / wn;
  }
  norm_ = std::max(lower, estimate);
}

LinearOperatorSpec LinearOperatorSpec::identity(std::size_t n) {
  std::vector<double> e(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) e[i * n + i] = 1.0;
  return LinearOperatorSpec(n, n, std::move(e));
}

Vector LinearOperatorSpec::apply(std::span<const double> x) const {
  Vector out(rows_);
  apply_into(x, out);
  return out;
}

void LinearOperatorSpec::apply_into(std::span<const double> x, std::span<double> out) const {
  require_dim(cols_, x.size());
  require_dim(rows_, out.size());
  for (std::size_t i = 0; i < rows_; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < cols_; ++j) s += entries_[i * cols_ + j] * x[j];
    out[i] = s;
  }
}

std::string format_real(double v) {
  std::array<char, 40> buf{};
  std::snprintf(buf.data(), buf.size(), "%.17g", v);
  return buf.data();
}

void write_csv(std::ostream& out, const PointCloud& cloud, const std::vector<std::string>& columns) {
  if (!columns.empty()) {
    require_dim(cloud.dimension(), columns.size());
    for (std::size_t d = 0; d < columns.size(); ++d) out << (d ? "," : "") << columns[d];
    out << '\n';
  }
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto p = cloud[i];
    for (std::size_t d = 0; d < p.size(); ++d) out << (d ? "," : "") << format_real(p[d]);
    out << '\n';
  }
}

}  // namespace sepwp::geometry
