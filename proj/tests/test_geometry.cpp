#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <sstream>

#include "sepwp/geometry.hpp"

using namespace sepwp;
using namespace sepwp::geometry;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

PointCloud random_cloud(std::mt19937_64& rng, std::size_t dim, std::size_t max_size, double spread = 1.0) {
  std::uniform_real_distribution<double> u(-spread, spread);
  const std::size_t n = 1 + rng() % max_size;
  PointCloud c(dim);
  Vector p(dim);
  for (std::size_t i = 0; i < n; ++i) {
    for (double& v : p) v = u(rng);
    c.push_back(p);
  }
  return c;
}

double brute_diameter(const PointCloud& c) {
  double d = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i)
    for (std::size_t j = i + 1; j < c.size(); ++j) d = std::max(d, distance(c[i], c[j]));
  return d;
}

double brute_directed(const PointCloud& a, const PointCloud& b) {
  double sup = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double inf = kInf;
    for (std::size_t j = 0; j < b.size(); ++j) inf = std::min(inf, distance(a[i], b[j]));
    sup = std::max(sup, inf);
  }
  return sup;
}

PointCloud merge(const PointCloud& a, const PointCloud& b) {
  PointCloud c(a.dimension());
  for (std::size_t i = 0; i < a.size(); ++i) c.push_back(a[i]);
  for (std::size_t i = 0; i < b.size(); ++i) c.push_back(b[i]);
  return c;
}

}  // namespace

TEST_CASE("contains") {
  const auto unit = ConvexSetSpec::box({0.0}, {1.0});
  CHECK(contains(unit, std::vector<double>{0.5}));
  CHECK(contains(unit, std::vector<double>{1.0 + 1e-9}, 1e-8));
  CHECK_FALSE(contains(unit, std::vector<double>{1.0 + 1e-9}));
  CHECK_FALSE(contains(ConvexSetSpec::ball({0.0}, 1.0), std::vector<double>{2.0}));
  CHECK_THROWS_AS(contains(unit, std::vector<double>{0.0, 0.0}), DimensionMismatch);
  const auto half = ConvexSetSpec::halfspaces({{{1.0, 1.0}, 1.0}, {{-1.0, 0.0}, 0.0}}, {0.0, 0.0});
  CHECK(contains(half, std::vector<double>{0.5, 0.5}));
  CHECK_FALSE(contains(half, std::vector<double>{-0.1, 0.5}));
}

TEST_CASE("invalid sets are rejected") {
  CHECK_THROWS_AS(ConvexSetSpec::box({1.0}, {0.0}), Error);
  CHECK_THROWS_AS(ConvexSetSpec::ball({0.0}, 0.0), Error);
  CHECK_THROWS_AS(ConvexSetSpec::halfspaces({{{1.0}, -1.0}}, {0.0}), Error);
}

TEST_CASE("project") {
  CHECK(project(ConvexSetSpec::box({0.0}, {1.0}), std::vector<double>{2.0}) == Vector{1.0});
  const Vector b = project(ConvexSetSpec::ball({0.0, 0.0}, 1.0), std::vector<double>{3.0, 4.0});
  CHECK(b[0] == doctest::Approx(0.6));
  CHECK(b[1] == doctest::Approx(0.8));
  CHECK(project(ConvexSetSpec::box({0.0, 0.0}, {1.0, 1.0}), std::vector<double>{0.3, 0.7}) == Vector{0.3, 0.7});

  // x + y <= 1, x >= 0: the projection of (2, 2) is (0.5, 0.5).
  const auto half = ConvexSetSpec::halfspaces({{{1.0, 1.0}, 1.0}, {{-1.0, 0.0}, 0.0}}, {0.0, 0.0});
  const Vector h = project(half, std::vector<double>{2.0, 2.0});
  CHECK(h[0] == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(h[1] == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(contains(half, h, 1e-10));
}

TEST_CASE("sample_grid") {
  const auto g1 = sample_grid(ConvexSetSpec::box({0.0}, {1.0}), 0.5);
  CHECK(g1.coordinates() == std::vector<double>{0.0, 0.5, 1.0});
  CHECK(g1.resolution() == 0.5);
  CHECK(sample_grid(ConvexSetSpec::box({0.0, 0.0}, {1.0, 1.0}), 0.5).size() == 9);
  const auto half_line = ConvexSetSpec::box({0.0}, {kInf}).with_window(1.0);
  CHECK(sample_grid(half_line, 0.5).coordinates() == std::vector<double>{0.0, 0.5, 1.0});
  CHECK_THROWS_AS(sample_grid(ConvexSetSpec::box({0.0}, {kInf}), 0.5), Unbounded);
  CHECK_THROWS_AS(sample_grid(ConvexSetSpec::box({0.0, 0.0}, {1.0, 1.0}), 1e-3, 1000), BudgetExceeded);

  const auto disk = ConvexSetSpec::ball({0.0, 0.0}, 1.0);
  const auto pts = sample_grid(disk, 0.125);
  for (std::size_t i = 0; i < pts.size(); ++i) CHECK(contains(disk, pts[i], 1e-12));
}

TEST_CASE("halving a dyadic grid gives a superset") {
  for (const auto& set : {ConvexSetSpec::box({-2.0}, {2.0}), ConvexSetSpec::ball({0.0, 0.0}, 1.0),
                          ConvexSetSpec::box({0.0, 0.0}, {1.0, 0.5})}) {
    const auto coarse = sample_grid(set, 0.25);
    const auto fine = sample_grid(set, 0.125);
    std::set<Vector> fine_set;
    for (std::size_t i = 0; i < fine.size(); ++i) fine_set.insert(Vector(fine[i].begin(), fine[i].end()));
    for (std::size_t i = 0; i < coarse.size(); ++i) CHECK(fine_set.count(Vector(coarse[i].begin(), coarse[i].end())));
  }
}

TEST_CASE("diameter") {
  CHECK(diameter(PointCloud::from_points({{0.0, 0.0}})) == 0.0);
  CHECK(diameter(PointCloud::from_points({{0.0, 0.0}, {1.0, 1.0}})) == doctest::Approx(std::sqrt(2.0)));
  CHECK_THROWS_AS(diameter(PointCloud(2)), EmptyCloud);

  std::mt19937_64 rng(5);
  for (int t = 0; t < 40; ++t) {
    const auto c = random_cloud(rng, 1 + t % 3, 400);
    CHECK(diameter(c) == brute_diameter(c));
    CHECK(diameter(c, 4) == diameter(c, 1));
  }
}

TEST_CASE("diameter of a union dominates both parts") {
  std::mt19937_64 rng(8);
  for (int t = 0; t < 50; ++t) {
    const auto a = random_cloud(rng, 2, 100);
    const auto b = random_cloud(rng, 2, 100, 2.0);
    CHECK(diameter(merge(a, b)) >= std::max(diameter(a), diameter(b)));
  }
}

TEST_CASE("directed distance and Hausdorff") {
  const auto origin = PointCloud::from_points({{0.0, 0.0}});
  const auto e1 = PointCloud::from_points({{1.0, 0.0}});
  CHECK(directed_distance(origin, e1) == 1.0);
  const auto both = PointCloud::from_points({{0.0}, {1.0}});
  const auto mid = PointCloud::from_points({{0.5}});
  CHECK(directed_distance(both, mid) == 0.5);
  CHECK(directed_distance(PointCloud::from_points({{0.0}}), both) == 0.0);
  CHECK(hausdorff(both, mid) == 0.5);
  CHECK(hausdorff(both, both) == 0.0);
  CHECK_THROWS_AS(hausdorff(both, PointCloud(1)), EmptyCloud);
  CHECK_THROWS_AS(hausdorff(both, origin), DimensionMismatch);

  std::mt19937_64 rng(2);
  for (int t = 0; t < 30; ++t) {
    const auto a = random_cloud(rng, 2, 300);
    const auto b = random_cloud(rng, 2, 300);
    CHECK(directed_distance(a, b) == brute_directed(a, b));
    CHECK(directed_distance(a, b, 4) == directed_distance(a, b, 1));
  }
}

TEST_CASE("strip versus diagonal grid: Hausdorff distance about eps / sqrt 2") {
  // Brute force over both grids of [0,1]^2 with h = 1/80.
  const double h = 1.0 / 80.0, eps = 0.1;
  PointCloud strip(2), diag(2);
  for (int i = 0; i <= 80; ++i)
    for (int j = 0; j <= 80; ++j) {
      const double x = i * h, y = j * h;
      if (std::fabs(y - x) <= eps + 1e-12) strip.push_back(std::vector<double>{x, y});
      if (i == j) diag.push_back(std::vector<double>{x, y});
    }
  CHECK(std::fabs(hausdorff(strip, diag) - eps / std::sqrt(2.0)) <= 2.0 * h);
  CHECK(hausdorff(strip, diag) == std::max(brute_directed(strip, diag), brute_directed(diag, strip)));
}

TEST_CASE("Hausdorff metric axioms on random triples") {
  std::mt19937_64 rng(17);
  for (int t = 0; t < 200; ++t) {
    const std::size_t dim = 1 + t % 3;
    const auto p = random_cloud(rng, dim, 40);
    const auto q = random_cloud(rng, dim, 40);
    const auto r = random_cloud(rng, dim, 40);
    CHECK(hausdorff(p, p) == 0.0);
    CHECK(hausdorff(p, q) == hausdorff(q, p));
    CHECK(hausdorff(p, r) <= hausdorff(p, q) + hausdorff(q, r) + 1e-12);
  }
}

TEST_CASE("Kuratowski estimate examples") {
  std::mt19937_64 rng(4);
  const auto c = random_cloud(rng, 2, 30);
  CHECK(kuratowski_estimate(c, c.size()) == 0.0);
  CHECK(kuratowski_estimate(c, c.size() + 5) == 0.0);

  const auto pair = PointCloud::from_points({{0.0}, {1.0}});
  const double one = kuratowski_estimate(pair, 1);
  CHECK(one > 1.0);
  CHECK(one <= 1.0 + 1e-12);

  const double h = 1.0 / 64.0;
  const auto grid = sample_grid(ConvexSetSpec::box({0.0}, {1.0}), h);
  CHECK(kuratowski_estimate(grid, 4) <= 0.25 + h);
  CHECK_THROWS_AS(kuratowski_estimate(PointCloud(1), 3), EmptyCloud);
  CHECK_THROWS_AS(kuratowski_estimate(pair, 0), Error);
}

TEST_CASE("Kuratowski estimate is nonincreasing in the budget") {
  std::mt19937_64 rng(9);
  for (int t = 0; t < 20; ++t) {
    const auto c = random_cloud(rng, 2, 200);
    double prev = kInf;
    for (std::size_t b = 1; b <= 24; ++b) {
      const double v = kuratowski_estimate(c, b);
      CHECK(v <= prev);
      prev = v;
    }
  }
}

TEST_CASE("covering estimate satisfies the 2H transfer inequality") {
  // Each estimate is within a factor 2 of the budget-optimal cover, so
  // a(P) <= 2 H(P,Q) + a(Q) + a(P)/2 on finite clouds.
  std::mt19937_64 rng(21);
  for (int t = 0; t < 100; ++t) {
    const auto p = random_cloud(rng, 2, 60);
    const auto q = random_cloud(rng, 2, 60);
    for (std::size_t b : {1, 2, 4, 8}) {
      const double ap = kuratowski_estimate(p, b);
      CHECK(ap <= 2.0 * hausdorff(p, q) + kuratowski_estimate(q, b) + ap / 2.0 + 1e-12);
    }
  }
  // The slack vanishes once the budget covers the clouds.
  const auto p = random_cloud(rng, 2, 20);
  const auto q = random_cloud(rng, 2, 20);
  CHECK(kuratowski_estimate(p, 20) <= 2.0 * hausdorff(p, q) + kuratowski_estimate(q, 20));
}

TEST_CASE("linear operators") {
  CHECK(LinearOperatorSpec::identity(1).apply(std::vector<double>{0.7}) == Vector{0.7});
  CHECK(LinearOperatorSpec(2, 3, std::vector<double>(6, 0.0)).apply(std::vector<double>{1.0, 2.0, 3.0}) ==
        Vector{0.0, 0.0});
  CHECK(LinearOperatorSpec(1, 2, {1.0, 1.0}).apply(std::vector<double>{1.0, 2.0}) == Vector{3.0});
  CHECK_THROWS_AS(LinearOperatorSpec(1, 2, {1.0, 1.0}).apply(std::vector<double>{1.0}), DimensionMismatch);
  CHECK_THROWS_AS(LinearOperatorSpec(1, 2, {1.0}), Error);

  const LinearOperatorSpec a(2, 2, {3.0, 0.0, 0.0, 1.0});
  CHECK(a.norm_estimate() == doctest::Approx(3.0));
  const LinearOperatorSpec b(1, 2, {1.0, 1.0});
  CHECK(b.norm_estimate() == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("CSV export keeps 17 significant digits") {
  const auto c = PointCloud::from_points({{0.1, 1.0 / 3.0}});
  std::ostringstream out;
  write_csv(out, c, {"x", "y"});
  std::istringstream in(out.str());
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  CHECK(header == "x,y");
  const auto comma = row.find(',');
  CHECK(std::stod(row.substr(0, comma)) == 0.1);
  CHECK(std::stod(row.substr(comma + 1)) == 1.0 / 3.0);
  CHECK(std::stod(format_real(std::nextafter(1.0, 2.0))) == std::nextafter(1.0, 2.0));
}
