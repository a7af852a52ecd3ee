#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "perdiff/linalg.hpp"

namespace perdiff {
namespace {

constexpr double kTol = 1e-12;

void ExpectMatNear(const Mat2& expected, const Mat2& actual, double tol) {
  EXPECT_NEAR(expected.a11, actual.a11, tol);
  EXPECT_NEAR(expected.a12, actual.a12, tol);
  EXPECT_NEAR(expected.a21, actual.a21, tol);
  EXPECT_NEAR(expected.a22, actual.a22, tol);
}

Mat2 RandomMat(std::mt19937_64& rng, double scale = 3.0) {
  std::uniform_real_distribution<double> uni(-scale, scale);
  return {uni(rng), uni(rng), uni(rng), uni(rng)};
}

TEST(Mat2Pow, ZeroExponentIsIdentity) {
  const Mat2 a = {0.3, -2.0, 7.0, 1.5};
  EXPECT_EQ(Mat2::identity(), mat2_pow(a, 0));
}

TEST(Mat2Pow, CubeRootOfUnityCompanion) {
  EXPECT_EQ(Mat2::identity(), mat2_pow({0.0, 1.0, -1.0, -1.0}, 3));
}

TEST(Mat2Pow, Square) {
  const Mat2 expected = {-2.0, 3.0, -6.0, 7.0};
  EXPECT_EQ(expected, mat2_pow({0.0, 1.0, -2.0, 3.0}, 2));
}

TEST(Mat2Pow, NegativeExponentThrows) {
  EXPECT_THROW(mat2_pow(Mat2::identity(), -1), std::invalid_argument);
}

TEST(Svals2, Identity) {
  const SingularValues s = svals2(Mat2::identity());
  EXPECT_NEAR(1.0, s.max, kTol);
  EXPECT_NEAR(1.0, s.min, kTol);
}

TEST(Svals2, Diagonal) {
  const SingularValues s = svals2({3.0, 0.0, 0.0, 0.0});
  EXPECT_NEAR(3.0, s.max, kTol);
  EXPECT_NEAR(0.0, s.min, kTol);
}

TEST(Svals2, RotationScaled) {
  const SingularValues s = svals2({0.0, 1.0, -2.0, 0.0});
  EXPECT_NEAR(2.0, s.max, kTol);
  EXPECT_NEAR(1.0, s.min, kTol);
}

TEST(Svals2, ZeroMatrix) {
  const SingularValues s = svals2(Mat2::zero());
  EXPECT_EQ(0.0, s.max);
  EXPECT_EQ(0.0, s.min);
}

TEST(Svals2, MatchesInvariants) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 500; ++trial) {
    const Mat2 a = RandomMat(rng);
    const SingularValues s = svals2(a);
    EXPECT_GE(s.max, s.min);
    EXPECT_GE(s.min, 0.0);
    EXPECT_NEAR(std::fabs(a.det()), s.max * s.min, 1e-10 * (1.0 + s.max * s.max));
    EXPECT_NEAR(a.frobenius() * a.frobenius(), s.max * s.max + s.min * s.min,
                1e-10 * (1.0 + s.max * s.max));
  }
}

TEST(Svd2, Reconstructs) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 500; ++trial) {
    const Mat2 a = RandomMat(rng);
    const Svd2 d = svd2(a);
    const Mat2 back = d.s_max * outer(d.u_max, d.v_max) + d.s_min * outer(d.u_min, d.v_min);
    ExpectMatNear(a, back, 1e-10);
    EXPECT_NEAR(1.0, norm(d.v_max), 1e-12);
    EXPECT_NEAR(1.0, norm(d.v_min), 1e-12);
    EXPECT_NEAR(0.0, dot(d.v_max, d.v_min), 1e-12);
  }
}

TEST(Svd2, RankOneReconstructs) {
  const Mat2 a = outer({1.0, -2.0}, {3.0, 0.5});
  const Svd2 d = svd2(a);
  EXPECT_NEAR(0.0, d.s_min, 1e-12);
  ExpectMatNear(a, d.s_max * outer(d.u_max, d.v_max), 1e-12);
}

TEST(Rank2, Cases) {
  EXPECT_EQ(0, rank2(Mat2::zero()));
  EXPECT_EQ(1, rank2({1.0, 0.0, 0.0, 0.0}));
  EXPECT_EQ(2, rank2(Mat2::identity()));
  EXPECT_EQ(1, rank2({1.0, 2.0, 2.0, 4.0}));
  EXPECT_EQ(0, rank2({1e-12, 0.0, 0.0, 0.0}));
}

TEST(Pinv2, Identity) { EXPECT_EQ(Mat2::identity(), pinv2(Mat2::identity())); }

TEST(Pinv2, Zero) { EXPECT_EQ(Mat2::zero(), pinv2(Mat2::zero())); }

TEST(Pinv2, ProjectorIsItsOwnPseudoInverse) {
  const Mat2 e11 = {1.0, 0.0, 0.0, 0.0};
  ExpectMatNear(e11, pinv2(e11), kTol);
}

TEST(Pinv2, MoorePenroseConditions) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 300; ++trial) {
    const Mat2 a = trial % 2 == 0 ? RandomMat(rng) : outer({std::normal_distribution<>()(rng), 1.0},
                                                           {0.5, std::normal_distribution<>()(rng)});
    const Mat2 p = pinv2(a);
    ExpectMatNear(a, a * p * a, 1e-9);
    ExpectMatNear(p, p * a * p, 1e-9);
    ExpectMatNear((a * p).transposed(), a * p, 1e-9);
    ExpectMatNear((p * a).transposed(), p * a, 1e-9);
  }
}

TEST(Inverse2, RoundTrip) {
  const Mat2 a = {1.0, 2.0, -4.0, 1.0};
  ExpectMatNear(Mat2::identity(), a * inverse2(a), kTol);
}

TEST(Inverse2, SingularThrows) {
  EXPECT_THROW(inverse2({1.0, 2.0, 2.0, 4.0}), std::domain_error);
}

TEST(KernelProjector, Cases) {
  EXPECT_EQ(Mat2::identity(), kernel_projector(Mat2::zero()));
  EXPECT_EQ(Mat2::zero(), kernel_projector(Mat2::identity()));
  // I - A^3 for b = -3, c = 2, N = 3 has kernel span{(1, 1)}.
  const Mat2 k = kernel_projector({7.0, -7.0, 14.0, -14.0});
  ExpectMatNear({0.5, 0.5, 0.5, 0.5}, k, 1e-12);
}

TEST(KernelProjector, IsIdempotentAndAnnihilated) {
  std::mt19937_64 rng(14);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 200; ++trial) {
    const Mat2 a = outer({nd(rng), nd(rng)}, {nd(rng), nd(rng)});
    const Mat2 k = kernel_projector(a);
    ExpectMatNear(k, k * k, 1e-10);
    ExpectMatNear(Mat2::zero(), a * k, 1e-9 * (1.0 + a.frobenius()));
  }
}

}  // namespace
}  // namespace perdiff
