#include "perdiff/linalg.hpp"

#include <stdexcept>

namespace perdiff {

Mat2 mat2_pow(const Mat2& a, std::int64_t t) {
  if (t < 0) {
    throw std::invalid_argument("mat2_pow: negative exponent");
  }
  Mat2 out = Mat2::identity();
  for (std::int64_t k = 0; k < t; ++k) {
    out = out * a;
  }
  return out;
}

SingularValues svals2(const Mat2& a) {
  // A = [[e+f, g-h], [g+h, e-f]] splits into a rotation-scaling part (e, h)
  // and a reflection-scaling part (f, g); the singular values are q +- r.
  const double e = 0.5 * (a.a11 + a.a22);
  const double f = 0.5 * (a.a11 - a.a22);
  const double g = 0.5 * (a.a21 + a.a12);
  const double h = 0.5 * (a.a21 - a.a12);
  const double q = std::hypot(e, h);
  const double r = std::hypot(f, g);
  const double s_max = q + r;
  // |q - r| cancels badly near rank one; |det| / s_max does not.
  const double s_min = s_max > 0.0 ? std::fabs(a.det()) / s_max : 0.0;
  return {s_max, std::fmin(s_min, s_max)};
}

Svd2 svd2(const Mat2& a) {
  const SingularValues sv = svals2(a);
  // Right singular vectors are the eigenvectors of A^T A.
  const double p = a.a11 * a.a11 + a.a21 * a.a21;
  const double s = a.a12 * a.a12 + a.a22 * a.a22;
  const double q = a.a11 * a.a12 + a.a21 * a.a22;
  const double phi = 0.5 * std::atan2(2.0 * q, p - s);

  Svd2 out;
  out.s_max = sv.max;
  out.s_min = sv.min;
  out.v_max = {std::cos(phi), std::sin(phi)};
  out.v_min = {-std::sin(phi), std::cos(phi)};

  if (sv.max > 0.0) {
    out.u_max = (1.0 / sv.max) * (a * out.v_max);
  } else {
    out.u_max = {1.0, 0.0};
  }
  if (sv.min > rank_tolerance(sv.max) * 1e-6) {
    out.u_min = (1.0 / sv.min) * (a * out.v_min);
  } else {
    out.u_min = {-out.u_max.v, out.u_max.u};
  }
  return out;
}

int rank2(const Mat2& a) {
  const SingularValues sv = svals2(a);
  const double tol = rank_tolerance(sv.max);
  return (sv.max > tol ? 1 : 0) + (sv.min > tol ? 1 : 0);
}

Mat2 inverse2(const Mat2& a) {
  const double d = a.det();
  if (d == 0.0) {
    throw std::domain_error("inverse2: singular matrix");
  }
  return (1.0 / d) * Mat2{a.a22, -a.a12, -a.a21, a.a11};
}

Mat2 pinv2(const Mat2& a) {
  const Svd2 sv = svd2(a);
  const double tol = rank_tolerance(sv.s_max);
  if (sv.s_max <= tol) {
    return Mat2::zero();
  }
  if (sv.s_min <= tol) {
    return (1.0 / sv.s_max) * outer(sv.v_max, sv.u_max);
  }
  return inverse2(a);
}

Mat2 kernel_projector(const Mat2& a) {
  const Svd2 sv = svd2(a);
  const double tol = rank_tolerance(sv.s_max);
  if (sv.s_max <= tol) {
    return Mat2::identity();
  }
  if (sv.s_min <= tol) {
    return outer(sv.v_min, sv.v_min);
  }
  return Mat2::zero();
}

}  // namespace perdiff
