#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>

#include "sepwp/analysis.hpp"

namespace sepwp::analysis {

using geometry::ConvexSetSpec;
using geometry::Vector;

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr std::size_t kMaxGridPoints = 4096;
constexpr int kProbeLevels = 8;
constexpr int kProbeDirections = 16;

double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

struct Sample {
  std::vector<Vector> points;
  std::string description;
};

Sample draw(const ConvexSetSpec& set, const SamplingOptions& options) {
  const geometry::Box box = set.sampling_box();
  const std::size_t dim = set.dimension();
  double width = 0.0;
  for (std::size_t d = 0; d < dim; ++d) width = std::max(width, box.upper[d] - box.lower[d]);

  Sample s;
  if (options.grid_points > 0) {
    double h = width > 0.0 ? geometry::dyadic_floor(width / static_cast<double>(options.grid_points)) : 1.0;
    auto count = [&](double step) {
      double total = 1.0;
      for (std::size_t d = 0; d < dim; ++d) total *= std::floor((box.upper[d] - box.lower[d]) / step + 1e-9) + 1.0;
      return total;
    };
    while (count(h) > static_cast<double>(kMaxGridPoints)) h *= 2.0;
    const geometry::PointCloud grid = geometry::sample_grid(set, h);
    for (std::size_t i = 0; i < grid.size(); ++i) s.points.emplace_back(grid[i].begin(), grid[i].end());
    s.description = "dyadic grid h=" + fmt(h) + " (" + std::to_string(grid.size()) + " points)";
  }

  std::mt19937_64 rng(options.seed);
  std::size_t added = 0;
  for (std::size_t i = 0; i < options.random_points; ++i) {
    Vector p(dim);
    for (std::size_t d = 0; d < dim; ++d) p[d] = box.lower[d] + unit_uniform(rng) * (box.upper[d] - box.lower[d]);
    try {
      p = geometry::project(set, p);
    } catch (const NotSupported&) {
      continue;
    }
    if (!geometry::contains(set, p, 1e-12)) continue;
    s.points.push_back(std::move(p));
    ++added;
  }
  if (!s.description.empty()) s.description += " + ";
  s.description += std::to_string(added) + " random (seed " + std::to_string(options.seed) + ")";
  if (s.points.empty()) throw EmptyCloud();
  return s;
}

// Unit directions in +-pairs so that one-dimensional probes cover both sides.
std::vector<Vector> probe_directions(std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<Vector> dirs;
  for (int i = 0; i < kProbeDirections; ++i) {
    if (i % 2 == 1) {
      Vector d = dirs.back();
      for (double& c : d) c = -c;
      dirs.push_back(std::move(d));
      continue;
    }
    Vector d(dim);
    double norm = 0.0;
    do {
      norm = 0.0;
      for (double& c : d) {
        c = 2.0 * unit_uniform(rng) - 1.0;
        norm += c * c;
      }
    } while (norm < 1e-6);
    for (double& c : d) c /= std::sqrt(norm);
    dirs.push_back(std::move(d));
  }
  return dirs;
}

// Keeps the counterexample with the largest violation; ties keep the first.
struct Worst {
  double violation = kNegInf;
  Counterexample ce;

  template <class Make>
  void offer(double v, Make&& make) {
    if (v > violation) {
      violation = v;
      ce = make();
      ce.violation = v;
    }
  }
};

CheckerReport finish(std::string property, Worst worst, std::size_t count, std::string sampling) {
  CheckerReport r;
  r.property = std::move(property);
  r.sample_count = count;
  r.sampling = std::move(sampling);
  if (worst.violation > kCheckTolerance) {
    r.verdict = Verdict::Refuted;
    r.counterexample = std::move(worst.ce);
  }
  return r;
}

// Decay-aware tail test shared by the sequential checks: the excess must stay
// above tolerance over the whole tail and must not shrink below half of its
// first tail value.
bool persistent(const std::vector<double>& excess) {
  if (excess.empty()) return false;
  const std::size_t first = excess.size() / 2;
  for (std::size_t k = first; k < excess.size(); ++k)
    if (!(excess[k] > kCheckTolerance)) return false;
  return excess.back() >= 0.5 * excess[first];
}

Vector axpy(std::span<const double> x, double t, std::span<const double> d) {
  Vector out(x.begin(), x.end());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += t * d[i];
  return out;
}

double base_radius(const ConvexSetSpec& set) {
  const geometry::Box box = set.sampling_box();
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (std::size_t d = 0; d < box.lower.size(); ++d) {
    const double w = box.upper[d] - box.lower[d];
    hi = std::max(hi, w);
    if (w > 0.0) lo = std::min(lo, w);
  }
  return 0.25 * (std::isfinite(lo) ? lo : hi);
}

enum class Side { First, Second };

// Sequential semicontinuity probe. For usc in the first argument the excess
// at radius r is max_d f(x + r d, p) - f(x, p); for lsc in the second it is
// max_d f(x, p) - f(x, p + r d).
CheckerReport semicontinuity(const char* property, Side side, const Bifunction& fn, const ConvexSetSpec& set,
                             const SamplingOptions& options) {
  const Sample moving = draw(set, {std::max<std::size_t>(options.grid_points / 2, 1), options.random_points / 4,
                                   options.seed});
  const Sample fixed = draw(set, {std::max<std::size_t>(options.grid_points / 4, 1), options.random_points / 8,
                                  options.seed + 1});
  const std::vector<Vector> dirs = probe_directions(set.dimension(), options.seed);
  const double r0 = base_radius(set);

  Worst worst;
  std::size_t count = 0;
  std::vector<double> excess(kProbeLevels);
  for (const Vector& a : moving.points) {
    for (const Vector& b : fixed.points) {
      const Vector& x = side == Side::First ? a : b;
      const Vector& p = side == Side::First ? b : a;
      const double base = fn(x, p);
      Vector last_probe;
      double last_value = 0.0;
      for (int k = 0; k < kProbeLevels; ++k) {
        const double r = r0 * std::ldexp(1.0, -(k + 1));
        double best = kNegInf;
        for (const Vector& d : dirs) {
          Vector probe = axpy(side == Side::First ? x : p, r, d);
          if (!geometry::contains(set, probe)) continue;
          const double v = side == Side::First ? fn(probe, p) : fn(x, probe);
          ++count;
          const double e = side == Side::First ? v - base : base - v;
          if (e > best) {
            best = e;
            if (k == kProbeLevels - 1) {
              last_probe = std::move(probe);
              last_value = v;
            }
          }
        }
        excess[k] = best;
      }
      if (!persistent(excess)) continue;
      worst.offer(excess.back(), [&] {
        Counterexample ce;
        ce.points = {{"x", x}, {"p", p}, {"probe", last_probe}};
        ce.values = {{"f(x,p)", base},
                     {side == Side::First ? "f(probe,p)" : "f(x,probe)", last_value},
                     {"radius", r0 * std::ldexp(1.0, -kProbeLevels)}};
        return ce;
      });
    }
  }
  return finish(property, std::move(worst), count,
                moving.description + "; " + std::to_string(kProbeLevels) + " radii x " +
                    std::to_string(kProbeDirections) + " directions, r0=" + fmt(r0));
}

}  // namespace

const Vector& Counterexample::point(const std::string& name) const {
  for (const auto& [key, p] : points)
    if (key == name) return p;
  throw Error("counterexample has no point '" + name + "'");
}

double Counterexample::value(const std::string& name) const {
  for (const auto& [key, v] : values)
    if (key == name) return v;
  throw Error("counterexample has no value '" + name + "'");
}

std::vector<Vector> sample_points(const ConvexSetSpec& set, const SamplingOptions& options) {
  return draw(set, options).points;
}

CheckerReport check_monotone(const Bifunction& fn, const ConvexSetSpec& set, std::size_t n_pairs,
                             std::uint64_t seed) {
  const Sample s = draw(set, {32, 32, seed});
  const std::size_t n = s.points.size();
  const std::size_t total = n * (n + 1) / 2;
  const std::size_t stride = n_pairs == 0 ? 1 : std::max<std::size_t>(1, (total + n_pairs - 1) / n_pairs);

  Worst worst;
  std::size_t count = 0, index = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j, ++index) {
      if (index % stride != 0) continue;
      const Vector& x = s.points[i];
      const Vector& y = s.points[j];
      const double fxy = fn(x, y);
      const double fyx = fn(y, x);
      ++count;
      worst.offer(fxy + fyx, [&] {
        Counterexample ce;
        ce.points = {{"x", x}, {"y", y}};
        ce.values = {{"f(x,y)", fxy}, {"f(y,x)", fyx}};
        return ce;
      });
    }
  }
  return finish("monotone", std::move(worst), count, s.description + "; pairs stride " + std::to_string(stride));
}

CheckerReport check_hemicontinuous(const Bifunction& fn, const ConvexSetSpec& set, const SamplingOptions& options,
                                   const std::vector<double>& t_schedule) {
  if (t_schedule.empty()) throw Error("t schedule must not be empty");
  for (std::size_t k = 0; k < t_schedule.size(); ++k)
    if (!(t_schedule[k] > 0.0 && t_schedule[k] <= 1.0) || (k > 0 && !(t_schedule[k] < t_schedule[k - 1])))
      throw Error("t schedule must be strictly decreasing in (0, 1]");

  const Sample s = draw(set, {std::max<std::size_t>(options.grid_points / 2, 1), options.random_points / 2,
                              options.seed});
  Worst worst;
  std::size_t count = 0;
  std::vector<double> excess(t_schedule.size());
  for (const Vector& x : s.points) {
    for (const Vector& y : s.points) {
      if (x == y) continue;
      const double base = fn(x, y);
      Vector xt(x.size());
      for (std::size_t k = 0; k < t_schedule.size(); ++k) {
        for (std::size_t d = 0; d < x.size(); ++d) xt[d] = x[d] + t_schedule[k] * (y[d] - x[d]);
        excess[k] = fn(xt, y) - base;
        ++count;
      }
      if (!persistent(excess)) continue;
      worst.offer(excess.back(), [&] {
        Counterexample ce;
        ce.points = {{"x", x}, {"y", y}, {"x_t", xt}};
        ce.values = {{"t", t_schedule.back()}, {"f(x,y)", base}, {"f(x_t,y)", base + excess.back()}};
        return ce;
      });
    }
  }
  return finish("hemicontinuous", std::move(worst), count,
                s.description + "; t from " + fmt(t_schedule.front()) + " to " + fmt(t_schedule.back()));
}

CheckerReport check_convex_second(const Bifunction& fn, const ConvexSetSpec& set, const SamplingOptions& options,
                                  const std::vector<double>& lambdas) {
  const Sample xs = draw(set, {std::max<std::size_t>(options.grid_points / 4, 1), options.random_points / 8,
                               options.seed});
  const Sample ps = draw(set, options);
  Worst worst;
  std::size_t count = 0;
  Vector mix;
  for (const Vector& x : xs.points) {
    for (std::size_t i = 0; i < ps.points.size(); ++i) {
      const Vector& p = ps.points[i];
      const double fp = fn(x, p);
      for (std::size_t j = i + 1; j < ps.points.size(); ++j) {
        const Vector& q = ps.points[j];
        const double fq = fn(x, q);
        for (double l : lambdas) {
          mix.resize(p.size());
          for (std::size_t d = 0; d < p.size(); ++d) mix[d] = l * p[d] + (1.0 - l) * q[d];
          const double fm = fn(x, mix);
          ++count;
          worst.offer(fm - (l * fp + (1.0 - l) * fq), [&] {
            Counterexample ce;
            ce.points = {{"x", x}, {"p", p}, {"p'", q}};
            ce.values = {{"lambda", l}, {"f(x,mix)", fm}, {"f(x,p)", fp}, {"f(x,p')", fq}};
            return ce;
          });
        }
      }
    }
  }
  return finish("convex-second", std::move(worst), count, ps.description);
}

CheckerReport check_lsc_second(const Bifunction& fn, const ConvexSetSpec& set, const SamplingOptions& options) {
  return semicontinuity("lsc-second", Side::Second, fn, set, options);
}

CheckerReport check_usc_first(const Bifunction& fn, const ConvexSetSpec& set, const SamplingOptions& options) {
  return semicontinuity("usc-first", Side::First, fn, set, options);
}

CheckerReport check_diagonal_nonneg(const Bifunction& fn, const ConvexSetSpec& set, const SamplingOptions& options) {
  const Sample s = draw(set, options);
  Worst worst;
  for (const Vector& p : s.points) {
    const double v = fn(p, p);
    worst.offer(-v, [&] {
      Counterexample ce;
      ce.points = {{"p", p}};
      ce.values = {{"f(p,p)", v}};
      return ce;
    });
  }
  return finish("diagonal-nonneg", std::move(worst), s.points.size(), s.description);
}

const std::vector<std::string>& property_names() {
  static const std::vector<std::string> names = {"monotone",   "hemicontinuous", "convex-second",
                                                 "lsc-second", "usc-first",      "diagonal-nonneg"};
  return names;
}

CheckerReport run_checker(const std::string& property, const Bifunction& fn, const ConvexSetSpec& set,
                          const SamplingOptions& options) {
  if (property == "monotone") return check_monotone(fn, set, 4096, options.seed);
  if (property == "hemicontinuous") return check_hemicontinuous(fn, set, options);
  if (property == "convex-second") return check_convex_second(fn, set, options);
  if (property == "lsc-second") return check_lsc_second(fn, set, options);
  if (property == "usc-first") return check_usc_first(fn, set, options);
  if (property == "diagonal-nonneg") return check_diagonal_nonneg(fn, set, options);
  throw Error("unknown property '" + property + "'");
}

std::vector<CheckerReport> run_all_checkers(const sep::SplitProblem& prob, const SamplingOptions& options) {
  std::vector<CheckerReport> out;
  for (const auto& [subject, fn, set] : {std::tuple{"f", &prob.f(), &prob.C()}, std::tuple{"g", &prob.g(), &prob.Q()}}) {
    for (const std::string& name : property_names()) {
      CheckerReport r = run_checker(name, *fn, *set, options);
      r.subject = subject;
      out.push_back(std::move(r));
    }
  }
  return out;
}

MintyResult minty_check(const Bifunction& fn, const ConvexSetSpec& set, std::span<const double> candidate,
                        double h_in, const std::vector<CheckerReport>* hypotheses, const std::string& subject) {
  if (candidate.size() != fn.dimension()) throw DimensionMismatch(fn.dimension(), candidate.size());
  if (!geometry::contains(set, candidate, 1e-9)) throw Infeasible("the candidate's set");
  const geometry::GridSample grid = geometry::sample_lattice(set, h_in);
  const auto& cloud = grid.cloud;
  if (cloud.empty()) throw EmptyCloud();

  std::vector<double> fwd(cloud.size()), bwd(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    fwd[i] = fn(candidate, cloud[i]);
    bwd[i] = fn(cloud[i], candidate);
  }
  const std::size_t imin = static_cast<std::size_t>(std::min_element(fwd.begin(), fwd.end()) - fwd.begin());
  const std::size_t imax = static_cast<std::size_t>(std::max_element(bwd.begin(), bwd.end()) - bwd.begin());

  // Largest change to an axis neighbour of the extremal node.
  auto local = [&](const std::vector<double>& values, std::size_t at) {
    const auto p = cloud[at];
    std::vector<std::int64_t> coords(p.size());
    for (std::size_t d = 0; d < p.size(); ++d)
      coords[d] = static_cast<std::int64_t>(std::llround((p[d] - grid.lattice.origin[d]) / grid.lattice.h));
    double s = 0.0;
    for (std::size_t d = 0; d < p.size(); ++d) {
      for (int step : {-1, 1}) {
        coords[d] += step;
        if (const auto nb = grid.lattice.find(coords)) s = std::max(s, std::fabs(values[*nb] - values[at]));
        coords[d] -= step;
      }
    }
    return s;
  };

  MintyResult r;
  r.forward_min = fwd[imin];
  r.backward_max = bwd[imax];
  r.slack = std::max(local(fwd, imin), local(bwd, imax)) + kCheckTolerance;
  r.forward = r.forward_min >= -r.slack;
  r.backward = r.backward_max <= r.slack;

  if (hypotheses && r.forward != r.backward) {
    bool all = true;
    for (const char* name : {"monotone", "hemicontinuous", "convex-second", "diagonal-nonneg"}) {
      const auto it = std::find_if(hypotheses->begin(), hypotheses->end(), [&](const CheckerReport& c) {
        return c.property == name && (subject.empty() || c.subject == subject);
      });
      all = all && it != hypotheses->end() && it->holds();
    }
    if (all)
      r.warning = "forward and backward Minty conditions disagree although the equivalence hypotheses hold on "
                  "samples; suspect the inner grid";
  }
  return r;
}

ProblemMinty minty_check(const sep::SplitProblem& prob, std::span<const double> x, std::span<const double> y,
                         const std::vector<CheckerReport>* hypotheses) {
  return {minty_check(prob.f(), prob.C(), x, prob.grids().h_in, hypotheses, "f"),
          minty_check(prob.g(), prob.Q(), y, prob.grids().h_in, hypotheses, "g")};
}

}  // namespace sepwp::analysis
