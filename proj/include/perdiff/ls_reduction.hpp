#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "perdiff/linear_theory.hpp"

namespace perdiff {

class SolverError : public std::runtime_error {
 public:
  enum class Kind {
    NonConvergence,      // an iteration ran out of budget
    NoSignChange,        // bifurcation values at +r and -r share a sign
    NoRoot,              // no seed produced an accepted root
    DomainError,         // g could not be evaluated along the iteration
    WrongRegime,         // the solver does not apply to this kernel dimension
    DegenerateBoundary,  // the planar map vanishes on the sampling circle
  };

  SolverError(Kind kind, const std::string& what, double last_residual = 0.0)
      : std::runtime_error(what), kind_(kind), last_residual_(last_residual) {}

  Kind kind() const { return kind_; }
  double last_residual() const { return last_residual_; }

 private:
  Kind kind_;
  double last_residual_;
};

const char* to_string(SolverError::Kind kind);

/// F(x)(t) = (0, g(t, x_u(t))). Domain errors are rethrown naming t.
PeriodicSequence apply_F(const Problem& p, const PeriodicSequence& x);

/// Observer invoked with the starting point and every accepted Picard iterate.
using IterateObserver = std::function<void(const PeriodicSequence&)>;

struct InnerOptions {
  double tol = 1e-12;  // on the sup fixed-point residual, relative to max(1, |x|)
  int max_iter = 500;
  IterateObserver observer;
};

struct FixedPointResult {
  PeriodicSequence x;
  double residual = 0.0;  // sup norm of x - T(x)
  int picard_iterations = 0;
  int newton_iterations = 0;
};

/// x = T(x) by damped Picard (x <- (1 - l) x + l T(x); l starts at 1, halves when the
/// residual would grow, floor 2^-10), falling back to finite-difference Newton on
/// x - T(x) when Picard stalls.
FixedPointResult solve_fixed_point(const std::function<PeriodicSequence(const PeriodicSequence&)>& map,
                                   PeriodicSequence x0, const InnerOptions& opts);

/// Kernel coordinates. In dimension one only `u` is used.
using KernelCoords = Vec2;

/// The finite-dimensional alternative equation of the reduction.
///
/// For kernel coordinates alpha the auxiliary equation x = M_p(I - Q) F(k(alpha) + x) is
/// solved on Ker(P), with k(alpha) = sum_j alpha_j kernel_basis_j. The bifurcation value is
/// then the vector of pairings sum_i <adjoint_basis_j(i+1), F(k(alpha) + x*)(i)>: the sum
/// sum_i g(i, alpha + h(i)) in dimension one and the cos/sin-weighted sums in dimension two.
class BifurcationMap {
 public:
  BifurcationMap(const Problem& p, const LinearData& ld, InnerOptions opts = {});

  int dim() const { return ld_->cls.dim; }
  const Problem& problem() const { return *p_; }
  const LinearData& linear_data() const { return *ld_; }
  const InnerOptions& options() const { return opts_; }

  PeriodicSequence kernel_element(const KernelCoords& alpha) const;

  /// Fixed point x* of the auxiliary equation. Throws SolverError on failure.
  FixedPointResult aux_solve(const KernelCoords& alpha) const;

  KernelCoords value(const KernelCoords& alpha) const;
  KernelCoords value_at(const KernelCoords& alpha, const PeriodicSequence& aux) const;

  /// k(alpha) + x*(alpha).
  PeriodicSequence assemble(const KernelCoords& alpha, const PeriodicSequence& aux) const;

 private:
  const Problem* p_;
  const LinearData* ld_;
  InnerOptions opts_;
};

using PlanarMap = std::function<Vec2(const Vec2&)>;

struct WindingResult {
  int winding = 0;
  int evaluations = 0;
  double min_magnitude = 0.0;
};

/// Total angle swept by f along |alpha| = radius divided by 2 pi, from at least 8 samples.
/// Arcs whose image points
/// subtend pi/2 or more are bisected until every consecutive pair subtends less.
/// Throws SolverError(DegenerateBoundary) when an image point has magnitude below
/// 1e-8 times the largest sampled magnitude.
WindingResult winding_number(const PlanarMap& f, double radius, int samples);
int winding_number(const BifurcationMap& bm, double radius, int samples);

struct SolveReport {
  PeriodicSequence solution;
  std::vector<double> y;
  double residual_sup = 0.0;
  int regime = 0;
  KernelCoords alpha;
  std::optional<int> winding;
  bool degree_evidence = false;
  bool oracle_verified = false;
  double radius = 0.0;
  double pre_polish_residual = 0.0;
  std::optional<bool> nontrivial_found;  // set when g(t, 0) = 0 for all t
  std::vector<double> nontrivial_y;
  struct Counters {
    int outer = 0;
    int inner_picard = 0;
    int inner_newton = 0;
    int map_evaluations = 0;
  } iterations;
  std::vector<std::string> notes;
};

/// Dimension zero: fixed point of L^{-1} F from x = 0.
SolveReport solve_nonresonant(const Problem& p, double tol = 1e-10, int max_iter = 500);

/// Dimension one: bisection on alpha in [-r, r] for the scalar bifurcation equation.
SolveReport solve_1d(const Problem& p, double r, double tol = 1e-10);

/// Dimension two: winding number on |alpha| = radius, then Newton on the planar
/// bifurcation map from grid x grid seeds in the disk. radius = 0 selects
/// default_radius_2d.
SolveReport solve_2d(const Problem& p, double radius, int grid, double tol = 1e-10);

/// Heuristic disk radius 10 (z_est + |M_p(I-Q)|_upper K_est), with z_est and K_est
/// sampled from g over x in [-100, 100].
double default_radius_2d(const Problem& p, const LinearData& ld);

struct SolveOptions {
  double tol = 1e-10;
  double radius = 0.0;
  double r = 10.0;
  int grid = 9;
};

/// Classifies and dispatches to the solver for the kernel dimension.
SolveReport solve(const Problem& p, const SolveOptions& opts = {});

struct ReducedResiduals {
  double auxiliary = 0.0;    // |x - Px - M_p(I-Q) F(x)|
  double bifurcation = 0.0;  // |Q F(x)|
};

/// Residuals of the two reduced equations at x.
ReducedResiduals reduced_residuals(const Problem& p, const LinearData& ld,
                                   const PeriodicSequence& x);

}  // namespace perdiff
