#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "perdiff/expr.hpp"
#include "perdiff/linalg.hpp"

namespace perdiff {

/// y(t+2) + b y(t+1) + c y(t) = g(t, y(t)), looked for with period n.
struct Problem {
  double b = 0.0;
  double c = 1.0;
  int n = 2;
  Expr g;
};

/// Validates c != 0, n >= 2 and finite coefficients; throws std::invalid_argument.
Problem make_problem(double b, double c, int n, Expr g);

/// An n-periodic map Z+ -> R^2 stored as its first n values. Indexing wraps.
class PeriodicSequence {
 public:
  PeriodicSequence() = default;
  explicit PeriodicSequence(std::size_t n) : values_(n) {}
  explicit PeriodicSequence(std::vector<Vec2> values) : values_(std::move(values)) {}

  /// The companion-system state x(t) = (y(t), y(t+1)) of a scalar sequence.
  static PeriodicSequence from_scalar(std::span<const double> y);

  std::size_t period() const { return values_.size(); }

  Vec2& operator[](std::int64_t t) { return values_[wrap(t)]; }
  const Vec2& operator[](std::int64_t t) const { return values_[wrap(t)]; }

  std::span<const Vec2> values() const { return values_; }

  /// sup over t of the Euclidean norm of x(t).
  double sup_norm() const;
  /// The scalar sequence y(t) = first component of x(t).
  std::vector<double> first_components() const;
  bool finite() const;

  PeriodicSequence& operator+=(const PeriodicSequence& o);
  PeriodicSequence& operator-=(const PeriodicSequence& o);
  PeriodicSequence& operator*=(double s);
  friend PeriodicSequence operator+(PeriodicSequence a, const PeriodicSequence& b) { return a += b; }
  friend PeriodicSequence operator-(PeriodicSequence a, const PeriodicSequence& b) { return a -= b; }
  friend PeriodicSequence operator*(double s, PeriodicSequence a) { return a *= s; }

 private:
  std::size_t wrap(std::int64_t t) const {
    const auto n = static_cast<std::int64_t>(values_.size());
    return static_cast<std::size_t>(((t % n) + n) % n);
  }

  std::vector<Vec2> values_;
};

double sup_distance(const PeriodicSequence& a, const PeriodicSequence& b);

/// Inner product sum_t <a(t), b(t)> over one period.
double inner(const PeriodicSequence& a, const PeriodicSequence& b);

/// Dimension of Ker(L) with explicit bases.
///
/// kernel_basis[j](t) = A^t kernel_coords e_j and adjoint_basis[j](t) = Gamma(t) adjoint_coords e_j,
/// where Gamma(t) = (A^{-T})^t is the principal fundamental matrix of the adjoint system.
/// When 1 + b + c = 0 in dimension one the bases are the constants (1, 1) and (-c, 1).
/// In dimension two with c = 1 and |b| < 2 they are the trigonometric pair
/// Phi(t) = [[cos th t, sin th t], [cos th (t+1), sin th (t+1)]],
/// Gamma(t) = [[-cos th t, -sin th t], [cos th (t-1), sin th (t-1)]], th = arccos(-b/2).
struct ResonanceClass {
  int dim = 0;
  std::vector<PeriodicSequence> kernel_basis;
  std::vector<PeriodicSequence> adjoint_basis;
  Mat2 kernel_coords;
  Mat2 adjoint_coords;
  std::optional<double> theta;
  std::optional<int> r_int;
};

struct LinearData {
  int n = 0;
  double b = 0.0;
  double c = 1.0;
  Mat2 a;
  std::vector<Mat2> a_pows;  // A^t, t = 0..n
  std::vector<Mat2> gamma;   // Gamma(t) = (A^{-T})^t, t = 0..n
  Mat2 monodromy;            // A^n
  Mat2 v;                    // orthogonal projector onto Ker(I - A^n)
  Mat2 v_adjoint;            // orthogonal projector onto Ker((I - A^n)^T)
  Mat2 resolvent_pinv;       // pinv(I - A^n)
  std::vector<Mat2> w_table;  // W(t) = Gamma(t+1) v_adjoint, t = 0..n-1
  Mat2 gram_inv;             // pinv(sum_t W(t)^T W(t))
  ResonanceClass cls;
};

/// A = [[0, 1], [-c, -b]]; throws std::invalid_argument for c = 0.
Mat2 companion(double b, double c);

LinearData build_linear_data(const Problem& p);
ResonanceClass classify(const Problem& p);

/// (Lx)(t) = x(t+1) - A x(t).
PeriodicSequence apply_L(const LinearData& ld, const PeriodicSequence& x);

/// Pairings sum_i <adjoint_basis_j(i+1), h(i)>, one per kernel dimension.
std::vector<double> image_test(const LinearData& ld, const PeriodicSequence& h);

/// Tolerance used to decide membership in Im(L).
inline double image_tolerance(const PeriodicSequence& h) { return 1e-9 * (1.0 + h.sup_norm()); }
bool in_image(const LinearData& ld, const PeriodicSequence& h);

/// (Px)(t) = A^t V x(0).
PeriodicSequence proj_P(const LinearData& ld, const PeriodicSequence& x);

/// Orthogonal projection onto span{t -> W(t) e_j}; its kernel is Im(L).
PeriodicSequence proj_Q(const LinearData& ld, const PeriodicSequence& h);

/// Unique x with Lx = h and Px = 0. Throws std::domain_error when h is not in Im(L).
PeriodicSequence mp_solve(const LinearData& ld, const PeriodicSequence& h);

/// M_p(I - Q) h without the image check (the argument is projected first).
PeriodicSequence mp_iq(const LinearData& ld, const PeriodicSequence& h);

/// The n x n grid of 2x2 blocks B(t, i) with (M_p(I-Q) h)(t) = sum_i B(t, i) h(i).
/// Stored row-major: blocks[t * n + i].
std::vector<Mat2> mp_iq_blocks(const LinearData& ld);

struct NormBound {
  double lower = 0.0;
  double upper = 0.0;
};

/// Bounds on the operator norm of M_p(I - Q) induced by the sup-of-Euclidean norm.
/// upper = max_t sum_i s_max(B(t, i)); lower = best of mc_samples random unit inputs.
NormBound norm_bound_mp_iq(const LinearData& ld, int mc_samples, std::uint64_t seed = 0);

}  // namespace perdiff
