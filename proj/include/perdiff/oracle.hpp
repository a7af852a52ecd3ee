#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "perdiff/linear_theory.hpp"

// Brute-force periodic solver: the unknowns are y(0), ..., y(N-1) and the
// equations are the N cyclic recurrences. It never touches the reduction
// machinery and is the arbiter for every solution the library produces.
namespace perdiff::oracle {

using ScalarPeriodic = std::vector<double>;

/// Entry t is y(t+2) + b y(t+1) + c y(t) - g(t, y(t)), indices mod N.
std::vector<double> residual(const Problem& p, std::span<const double> y);
double residual_sup(const Problem& p, std::span<const double> y);

struct NewtonResult {
  enum class Status { Converged, SingularJacobian, MaxIterations, LineSearchFailed, DomainError };

  Status status = Status::MaxIterations;
  ScalarPeriodic y;
  double residual_sup = 0.0;
  int iterations = 0;
  std::string message;

  bool converged() const { return status == Status::Converged; }
};

/// Damped Newton with Armijo backtracking on |residual|^2 and a central-difference
/// Jacobian (step 1e-7 (1 + |y_i|)). Succeeds iff the sup residual reaches tol.
NewtonResult newton_solve(const Problem& p, std::span<const double> y0, double tol = 1e-11,
                          int max_iter = 100);

/// Newton from n_starts uniform starts in [-box, box]^N. Solutions closer than
/// 1e-6 in sup norm are merged; the list is sorted lexicographically.
std::vector<ScalarPeriodic> multistart_search(const Problem& p, int n_starts, double box,
                                              std::uint64_t seed);

struct CrossCheck {
  bool verified = false;
  double residual_sup = 0.0;   // of the candidate itself
  double distance = 0.0;       // sup distance to the Newton-refined root
  ScalarPeriodic refined;
};

/// Refines a candidate with newton_solve and accepts it when its own residual is
/// at most tol and the refined root lies within 1e-8 of it.
CrossCheck cross_check(const Problem& p, std::span<const double> y, double tol = 1e-9);

}  // namespace perdiff::oracle
