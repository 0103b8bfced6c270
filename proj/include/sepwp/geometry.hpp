#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "sepwp/error.hpp"

/// Closed convex sets, finite point clouds and the set metrics used by the
/// diagnostics: diameter, directed/symmetric Hausdorff distance and a
/// covering estimate of the Kuratowski measure of noncompactness.
namespace sepwp::geometry {

using Vector = std::vector<double>;

/// Componentwise bounds; entries may be +-infinity.
struct Box {
  Vector lower;
  Vector upper;
};

struct Ball {
  Vector center;
  double radius;
};

/// The half-space <normal, x> <= offset.
struct Halfspace {
  Vector normal;
  double offset;
};

struct HalfspaceIntersection {
  std::vector<Halfspace> halfspaces;
  Vector witness;  // a point known to satisfy every constraint
};

using Shape = std::variant<Box, Ball, HalfspaceIntersection>;

/// A closed convex set together with an optional sampling window. The window
/// only restricts sampling; membership and projection use the set itself.
class ConvexSetSpec {
 public:
  static ConvexSetSpec box(Vector lower, Vector upper);
  static ConvexSetSpec ball(Vector center, double radius);
  static ConvexSetSpec halfspaces(std::vector<Halfspace> halfspaces, Vector witness);

  /// Copy restricted for sampling to [-radius, radius]^n.
  ConvexSetSpec with_window(double radius) const;
  ConvexSetSpec with_window(Box window) const;

  std::size_t dimension() const { return dim_; }
  const Shape& shape() const { return shape_; }
  const std::optional<Box>& window() const { return window_; }

  /// True when the set itself is bounded (ignoring any window).
  bool bounded() const;

  /// Finite box that sampling enumerates: set bounds intersected with the
  /// window. Throws Unbounded if a coordinate stays infinite.
  Box sampling_box() const;

 private:
  ConvexSetSpec(std::size_t dim, Shape shape) : dim_(dim), shape_(std::move(shape)) {}

  std::size_t dim_;
  Shape shape_;
  std::optional<Box> window_;
};

/// x in set, allowing additive slack tol on every defining constraint.
bool contains(const ConvexSetSpec& set, std::span<const double> x, double tol = 0.0);

/// Euclidean projection for Box and Ball; cyclic alternating projections for
/// half-space systems (NotSupported if they fail to converge).
Vector project(const ConvexSetSpec& set, std::span<const double> x);

/// A finite set of points of one dimension stored contiguously.
class PointCloud {
 public:
  explicit PointCloud(std::size_t dim, double resolution = 0.0) : dim_(dim), resolution_(resolution) {}

  static PointCloud from_points(const std::vector<Vector>& points, double resolution = 0.0);

  void push_back(std::span<const double> point);
  void reserve(std::size_t n) { coords_.reserve(n * dim_); }

  std::size_t dimension() const { return dim_; }
  std::size_t size() const { return dim_ == 0 ? 0 : coords_.size() / dim_; }
  bool empty() const { return coords_.empty(); }
  double resolution() const { return resolution_; }

  std::span<const double> operator[](std::size_t i) const { return {coords_.data() + i * dim_, dim_}; }
  const std::vector<double>& coordinates() const { return coords_; }

  friend bool operator==(const PointCloud&, const PointCloud&) = default;

 private:
  std::size_t dim_;
  double resolution_;
  std::vector<double> coords_;
};

/// Integer lattice origin + i*h over a box, with a dense map from lattice
/// position to the index of the sampled point (or -1 when the lattice node
/// is outside the set).
struct Lattice {
  Vector origin;
  double h = 0.0;
  std::vector<std::size_t> counts;
  std::vector<std::int32_t> point_index;

  /// Index of the sampled point at integer coordinates, if any.
  std::optional<std::size_t> find(std::span<const std::int64_t> coords) const;
};

struct GridSample {
  PointCloud cloud;
  Lattice lattice;
};

inline constexpr std::size_t kDefaultGridBudget = 20'000'000;

/// All lattice points of spacing h inside the (windowed) set, in
/// lexicographic order. Throws Unbounded or BudgetExceeded.
GridSample sample_lattice(const ConvexSetSpec& set, double h, std::size_t max_points = kDefaultGridBudget);
PointCloud sample_grid(const ConvexSetSpec& set, double h, std::size_t max_points = kDefaultGridBudget);

/// Largest power of two not exceeding x (x > 0).
double dyadic_floor(double x);

double distance(std::span<const double> a, std::span<const double> b);
double squared_distance(std::span<const double> a, std::span<const double> b);

/// Lexicographic comparison of coordinates.
bool lex_less(std::span<const double> a, std::span<const double> b);

double diameter(const PointCloud& cloud, unsigned threads = 1);
double directed_distance(const PointCloud& from, const PointCloud& to, unsigned threads = 1);
double hausdorff(const PointCloud& a, const PointCloud& b, unsigned threads = 1);

/// Smallest eps found such that at most max_cover_sets subsets of diameter
/// < eps cover the cloud. Farthest-point seeding plus minimax refinement; the
/// result is an upper bound of the budget-restricted infimum and is
/// nonincreasing in max_cover_sets.
double kuratowski_estimate(const PointCloud& cloud, std::size_t max_cover_sets);

/// A bounded linear map R^n -> R^m stored row-major.
class LinearOperatorSpec {
 public:
  LinearOperatorSpec(std::size_t rows, std::size_t cols, std::vector<double> row_major);
  static LinearOperatorSpec identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  const std::vector<double>& entries() const { return entries_; }
  double norm_estimate() const { return norm_; }

  Vector apply(std::span<const double> x) const;
  void apply_into(std::span<const double> x, std::span<double> out) const;

  friend bool operator==(const LinearOperatorSpec& a, const LinearOperatorSpec& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.entries_ == b.entries_;
  }

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> entries_;
  double norm_;
};

/// One point per row, 17 significant digits. Optional column names.
void write_csv(std::ostream& out, const PointCloud& cloud, const std::vector<std::string>& columns = {});

/// Shortest decimal text that parses back to the same double.
std::string format_real(double v);

}  // namespace sepwp::geometry
