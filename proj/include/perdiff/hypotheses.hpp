#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "perdiff/linear_theory.hpp"

namespace perdiff {

/// A checker was called outside its preconditions (even N, t-dependent g, wrong kernel
/// dimension, ...).
class HypothesisError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ConditionVerdict {
  std::string id;
  bool pass = false;
  bool sampled = false;  // verdict rests on finitely many samples, not a proof
  std::string note;
};

struct CheckReport {
  std::string theorem;
  std::vector<ConditionVerdict> conditions;
  std::map<std::string, double> quantities;
  std::map<std::string, std::vector<double>> series;
  std::map<std::string, double> sampling;

  bool overall() const;
};

/// Conditions C1-C4 for the existence theorem with kernel dimension below two.
/// delta = 1.05 max|g| over t = 0..N-1 and `grid` points of [-2r, 2r]; C2 samples
/// |x| in (zhat, 4r]; C3 uses the sound upper bound on |M_p(I-Q)|.
CheckReport check_thm1(const Problem& p, double r, double zhat, int grid = 401);

struct UMembership {
  bool in_u = false;
  std::optional<std::pair<long long, long long>> witness;  // (k, j)
  double theta = 0.0;
};

/// Distance within which theta / (2 pi) is taken to equal a fraction with this
/// denominator: min(1e-12, max(1e-15, 1e-3 / j^2)). A flat 1e-12 would accept the
/// convergents every irrational has near j ~ 1e6.
double rational_tolerance(long long denominator);

/// Whether arccos(-b/2) = 2 pi k / j with 0 <= 2k < j and j <= max_denominator, found
/// through the continued-fraction convergents of theta / (2 pi).
/// Throws std::domain_error for |b| >= 2.
UMembership membership_U(double b, long long max_denominator = 1000000);

/// Conditions C1*-C3* of the autonomous corollary. C1* passes when the ratio
/// |h|_{2r} / r strictly decreases along r_schedule and ends at most half its first value.
CheckReport check_corollary(const Problem& p, double R, const std::vector<double>& r_schedule,
                            int grid = 2001);

/// Conditions C1-C3 of the theorem for a two-dimensional kernel. K is inflated by 5%,
/// J deflated by 5%.
CheckReport check_thm2(const Problem& p, double zhat, int grid = 2001);

/// g(t, x) == g(t + N, x) to 1e-12 on a probe grid in [-probe_range, probe_range].
bool periodic_in_t(const Problem& p, double probe_range);

/// g(t, x) == g(0, x) to 1e-12 for every t on a probe grid.
bool independent_of_t(const Problem& p, double probe_range);

}  // namespace perdiff
