#pragma once

#include <cmath>
#include <cstdint>

namespace perdiff {

/// Column vector in R^2. The names follow the state (u, v) = (y(t), y(t+1)).
struct Vec2 {
  double u = 0.0;
  double v = 0.0;

  constexpr Vec2& operator+=(const Vec2& o) {
    u += o.u;
    v += o.v;
    return *this;
  }
  constexpr Vec2& operator-=(const Vec2& o) {
    u -= o.u;
    v -= o.v;
    return *this;
  }
  constexpr Vec2& operator*=(double s) {
    u *= s;
    v *= s;
    return *this;
  }
  friend constexpr Vec2 operator+(Vec2 a, const Vec2& b) { return a += b; }
  friend constexpr Vec2 operator-(Vec2 a, const Vec2& b) { return a -= b; }
  friend constexpr Vec2 operator-(const Vec2& a) { return {-a.u, -a.v}; }
  friend constexpr Vec2 operator*(double s, Vec2 a) { return a *= s; }
  friend constexpr Vec2 operator*(Vec2 a, double s) { return a *= s; }
  friend constexpr bool operator==(const Vec2&, const Vec2&) = default;
};

constexpr double dot(const Vec2& a, const Vec2& b) { return a.u * b.u + a.v * b.v; }
inline double norm(const Vec2& a) { return std::hypot(a.u, a.v); }

/// Real 2x2 matrix, row-major.
struct Mat2 {
  double a11 = 0.0;
  double a12 = 0.0;
  double a21 = 0.0;
  double a22 = 0.0;

  static constexpr Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
  static constexpr Mat2 zero() { return {}; }
  /// Matrix whose columns are c1 and c2.
  static constexpr Mat2 from_columns(const Vec2& c1, const Vec2& c2) {
    return {c1.u, c2.u, c1.v, c2.v};
  }

  constexpr Vec2 col(int j) const { return j == 0 ? Vec2{a11, a21} : Vec2{a12, a22}; }
  constexpr Vec2 row(int i) const { return i == 0 ? Vec2{a11, a12} : Vec2{a21, a22}; }
  constexpr double det() const { return a11 * a22 - a12 * a21; }
  constexpr double trace() const { return a11 + a22; }
  constexpr Mat2 transposed() const { return {a11, a21, a12, a22}; }
  double frobenius() const { return std::sqrt(a11 * a11 + a12 * a12 + a21 * a21 + a22 * a22); }
  double max_abs() const {
    return std::fmax(std::fmax(std::fabs(a11), std::fabs(a12)),
                     std::fmax(std::fabs(a21), std::fabs(a22)));
  }
  bool finite() const {
    return std::isfinite(a11) && std::isfinite(a12) && std::isfinite(a21) && std::isfinite(a22);
  }

  constexpr Mat2& operator+=(const Mat2& o) {
    a11 += o.a11;
    a12 += o.a12;
    a21 += o.a21;
    a22 += o.a22;
    return *this;
  }
  constexpr Mat2& operator-=(const Mat2& o) {
    a11 -= o.a11;
    a12 -= o.a12;
    a21 -= o.a21;
    a22 -= o.a22;
    return *this;
  }
  constexpr Mat2& operator*=(double s) {
    a11 *= s;
    a12 *= s;
    a21 *= s;
    a22 *= s;
    return *this;
  }
  friend constexpr Mat2 operator+(Mat2 a, const Mat2& b) { return a += b; }
  friend constexpr Mat2 operator-(Mat2 a, const Mat2& b) { return a -= b; }
  friend constexpr Mat2 operator*(double s, Mat2 a) { return a *= s; }
  friend constexpr Mat2 operator*(const Mat2& a, const Mat2& b) {
    return {a.a11 * b.a11 + a.a12 * b.a21, a.a11 * b.a12 + a.a12 * b.a22,
            a.a21 * b.a11 + a.a22 * b.a21, a.a21 * b.a12 + a.a22 * b.a22};
  }
  friend constexpr Vec2 operator*(const Mat2& a, const Vec2& x) {
    return {a.a11 * x.u + a.a12 * x.v, a.a21 * x.u + a.a22 * x.v};
  }
  friend constexpr bool operator==(const Mat2&, const Mat2&) = default;
};

/// Outer product a b^T.
constexpr Mat2 outer(const Vec2& a, const Vec2& b) {
  return {a.u * b.u, a.u * b.v, a.v * b.u, a.v * b.v};
}

/// A^t by repeated multiplication; A^0 is the identity.
Mat2 mat2_pow(const Mat2& a, std::int64_t t);

/// Closed-form singular value decomposition A = s_max u_max v_max^T + s_min u_min v_min^T.
struct Svd2 {
  double s_max = 0.0;
  double s_min = 0.0;
  Vec2 u_max;  // left singular vectors
  Vec2 u_min;
  Vec2 v_max;  // right singular vectors
  Vec2 v_min;
};

Svd2 svd2(const Mat2& a);

struct SingularValues {
  double max = 0.0;
  double min = 0.0;
};

SingularValues svals2(const Mat2& a);

/// Singular values at or below this are treated as zero.
inline double rank_tolerance(double s_max) { return 1e-9 * std::fmax(1.0, s_max); }

/// Numerical rank under rank_tolerance.
int rank2(const Mat2& a);

/// Moore-Penrose pseudo-inverse; singular values under rank_tolerance are dropped.
Mat2 pinv2(const Mat2& a);

/// Inverse of a nonsingular matrix via the adjugate.
Mat2 inverse2(const Mat2& a);

/// Orthogonal projector onto Ker(A), built from the right singular vectors.
Mat2 kernel_projector(const Mat2& a);

}  // namespace perdiff
