#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sepwp::reproduce {

struct Claim {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct Outcome {
  std::string title;
  std::vector<Claim> claims;
  double seconds = 0.0;

  bool pass() const;
};

/// Diameter bound 2 sqrt(2 eps), monotone curve, WellPosed.
Outcome example1(unsigned threads = 1);
/// Hausdorff bound eps / sqrt(2), diameter plateau near sqrt 2, GeneralizedWellPosed.
Outcome example2(unsigned threads = 1);
/// Uniqueness hypotheses hold, S(1e-3) near the origin, cross-check CONSISTENT, WellPosed.
Outcome example3(unsigned threads = 1);
Outcome example(int k, unsigned threads = 1);

/// Forward and backward Minty conditions at each example's solutions, and
/// their joint failure at candidates shifted by 0.5 (examples 1 and 3).
Outcome minty(unsigned threads = 1);

/// Known refutations: a non-monotone f, a negative diagonal, a usc jump.
Outcome negative_controls();

/// One line per claim followed by an overall PASS/FAIL line.
void print(std::ostream& out, const Outcome& outcome);

}  // namespace sepwp::reproduce
