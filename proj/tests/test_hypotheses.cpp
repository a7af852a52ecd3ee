#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <numeric>
#include <string>
#include <vector>

#include "perdiff/hypotheses.hpp"

namespace perdiff {
namespace {

Problem Make(double b, double c, int n, const std::string& g) { return make_problem(b, c, n, parse(g)); }

const ConditionVerdict& Find(const CheckReport& rep, const std::string& id) {
  for (const ConditionVerdict& v : rep.conditions) {
    if (v.id == id) return v;
  }
  throw std::out_of_range("no condition " + id);
}

const std::vector<double> kSchedule = {10, 1e2, 1e3, 1e4, 1e5, 1e6};

TEST(CheckReport, OverallIsConjunction) {
  CheckReport rep;
  EXPECT_FALSE(rep.overall());
  rep.conditions.push_back({"a", true, false, ""});
  EXPECT_TRUE(rep.overall());
  rep.conditions.push_back({"b", false, false, ""});
  EXPECT_FALSE(rep.overall());
}

TEST(Periodicity, ProbeDetectsPeriod) {
  EXPECT_TRUE(periodic_in_t(Make(0, 2, 3, "x+cos(2*pi*t/3)"), 10));
  EXPECT_FALSE(periodic_in_t(Make(0, 2, 4, "x+cos(2*pi*t/3)"), 10));
  EXPECT_FALSE(periodic_in_t(Make(0, 2, 3, "x+t"), 10));
  EXPECT_TRUE(independent_of_t(Make(0, 2, 3, "tanh(x)"), 10));
  EXPECT_FALSE(independent_of_t(Make(0, 2, 3, "tanh(x)+0.1*cos(2*pi*t/3)"), 10));
}

TEST(CheckThm1, BoundedOddNonlinearityInResonance) {
  const CheckReport rep = check_thm1(Make(-3, 2, 3, "tanh(x)"), 10, 1);
  EXPECT_TRUE(rep.overall());
  EXPECT_NEAR(1.05, rep.quantities.at("delta"), 1e-9);
  EXPECT_NEAR(2.049169221366092, rep.quantities.at("norm_mp_iq_upper"), 1e-9);
  EXPECT_NEAR(1.0 + 2.049169221366092 * 1.05, rep.quantities.at("c3_lhs"), 1e-8);
  EXPECT_TRUE(Find(rep, "C1").sampled);
  EXPECT_FALSE(Find(rep, "C3").sampled);
}

TEST(CheckThm1, ThresholdBeyondRadiusFailsC3) {
  const CheckReport rep = check_thm1(Make(0, 2, 3, "x^3"), 1, 5);
  EXPECT_FALSE(Find(rep, "C3").pass);
  EXPECT_FALSE(rep.overall());
}

TEST(CheckThm1, SublinearGrowthFamily) {
  // |g| <= M1 |x|^s + M2 with r = 2 zhat.
  const double m1 = 0.1, s = 0.5, m2 = 0.05, zhat = 1.0;
  const CheckReport rep = check_thm1(Make(0, 2, 3, "0.1*sign(x)*abs(x)^0.5+0.05"), 2 * zhat, zhat);
  EXPECT_TRUE(rep.overall());
  EXPECT_NEAR(1.05 * (m1 * std::pow(4.0, s) * std::pow(zhat, s) + m2), rep.quantities.at("delta"), 1e-12);
}

TEST(CheckThm1, NegativeSignFailsC2) {
  const CheckReport rep = check_thm1(Make(-3, 2, 3, "-tanh(x)"), 10, 1);
  EXPECT_FALSE(Find(rep, "C2").pass);
}

TEST(CheckThm1, FullResonanceFailsC4) {
  const CheckReport rep = check_thm1(Make(1, 1, 3, "tanh(x)"), 10, 1);
  EXPECT_FALSE(Find(rep, "C4").pass);
}

TEST(CheckThm1, Preconditions) {
  EXPECT_THROW(check_thm1(Make(-3, 2, 4, "tanh(x)"), 10, 1), HypothesisError);
  EXPECT_THROW(check_thm1(Make(-3, 2, 3, "tanh(x)"), -1, 1), HypothesisError);
  EXPECT_THROW(check_thm1(Make(-3, 2, 3, "tanh(x)"), 10, 0), HypothesisError);
}

TEST(CheckThm1, AperiodicForcingFails) {
  const CheckReport rep = check_thm1(Make(0, 2, 3, "tanh(x)+0.01*t"), 10, 1);
  EXPECT_FALSE(Find(rep, "periodic_in_t").pass);
  EXPECT_FALSE(rep.overall());
}

TEST(MembershipU, KnownAngles) {
  const UMembership one = membership_U(1.0);
  EXPECT_TRUE(one.in_u);
  EXPECT_EQ((std::pair<long long, long long>{1, 3}), one.witness.value());
  EXPECT_NEAR(2.0 * std::numbers::pi / 3.0, one.theta, 1e-15);

  EXPECT_EQ((std::pair<long long, long long>{1, 4}), membership_U(0.0).witness.value());
  EXPECT_EQ((std::pair<long long, long long>{1, 6}), membership_U(-1.0).witness.value());
}

TEST(MembershipU, IrrationalAngle) {
  const UMembership u = membership_U(1.2);
  EXPECT_FALSE(u.in_u);
  EXPECT_FALSE(u.witness.has_value());
}

TEST(MembershipU, RationalAnglesRecovered) {
  for (long long j = 3; j <= 60; ++j) {
    for (long long k = 1; 2 * k < j; ++k) {
      const double b = -2.0 * std::cos(2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(j));
      const UMembership u = membership_U(b);
      const long long g = std::gcd(k, j);
      ASSERT_TRUE(u.in_u) << k << "/" << j;
      EXPECT_EQ((std::pair<long long, long long>{k / g, j / g}), u.witness.value());
    }
  }
}

TEST(MembershipU, DenominatorCap) {
  const double b = -2.0 * std::cos(2.0 * std::numbers::pi / 97.0);
  EXPECT_TRUE(membership_U(b, 97).in_u);
  EXPECT_FALSE(membership_U(b, 96).in_u);
}

TEST(MembershipU, Errors) {
  EXPECT_THROW(membership_U(2.0), std::domain_error);
  EXPECT_THROW(membership_U(-2.5), std::domain_error);
  EXPECT_THROW(membership_U(0.0, 1), std::invalid_argument);
}

TEST(RationalTolerance, ShrinksWithDenominator) {
  EXPECT_EQ(1e-12, rational_tolerance(3));
  EXPECT_LT(rational_tolerance(500000), 1e-14);
  EXPECT_EQ(1e-15, rational_tolerance(1000000));
}

TEST(CheckCorollary, LogfadeSatisfiesGrowthCondition) {
  const CheckReport rep = check_corollary(Make(1.2, 1, 3, "logfade"), 1, kSchedule);
  EXPECT_TRUE(Find(rep, "C1*").pass);
  const std::vector<double>& ratio = rep.series.at("c1_ratio");
  ASSERT_EQ(kSchedule.size(), ratio.size());
  for (std::size_t i = 1; i < ratio.size(); ++i) EXPECT_LT(ratio[i], ratio[i - 1]);
  EXPECT_TRUE(Find(rep, "C3*").pass);
}

TEST(CheckCorollary, LinearGrowthFailsC1Star) {
  const CheckReport rep = check_corollary(Make(1.2, 1, 3, "x"), 1, kSchedule);
  EXPECT_FALSE(Find(rep, "C1*").pass);
  for (double r : rep.series.at("c1_ratio")) EXPECT_NEAR(2.0, r, 1e-12);
  EXPECT_TRUE(Find(rep, "C2*").pass);
}

TEST(CheckCorollary, BoundedOddNonlinearityPasses) {
  const CheckReport rep = check_corollary(Make(1.2, 1, 3, "tanh(x)"), 1, kSchedule);
  EXPECT_TRUE(rep.overall());
}

TEST(CheckCorollary, ResonantCoefficientFailsC3Star) {
  const CheckReport rep = check_corollary(Make(1, 1, 3, "tanh(x)"), 1, kSchedule);
  EXPECT_FALSE(Find(rep, "C3*").pass);
  EXPECT_EQ(1.0, rep.quantities.at("u_witness_k"));
  EXPECT_EQ(3.0, rep.quantities.at("u_witness_j"));
  EXPECT_TRUE(Find(check_corollary(Make(1, 2, 3, "tanh(x)"), 1, kSchedule), "C3*").pass);
  EXPECT_TRUE(Find(check_corollary(Make(2.5, 1, 3, "tanh(x)"), 1, kSchedule), "C3*").pass);
}

TEST(CheckCorollary, Preconditions) {
  EXPECT_THROW(check_corollary(Make(1.2, 1, 3, "tanh(x)+cos(2*pi*t/3)"), 1, kSchedule), HypothesisError);
  EXPECT_THROW(check_corollary(Make(1.2, 1, 3, "tanh(x)"), 1, {10}), HypothesisError);
  EXPECT_THROW(check_corollary(Make(1.2, 1, 3, "tanh(x)"), 0, kSchedule), HypothesisError);
}

TEST(CheckThm2, CanonicalInstance) {
  const CheckReport rep = check_thm2(Make(1, 1, 3, "tanh(x)+0.1*cos(2*pi*t/3)"), 1);
  EXPECT_TRUE(rep.overall());
  EXPECT_NEAR(1.1, rep.quantities.at("K_sampled"), 1e-9);
  EXPECT_NEAR(std::tanh(1.0) - 0.1, rep.quantities.at("J_sampled"), 1e-12);
  EXPECT_NEAR(1.05 * 1.1, rep.quantities.at("K"), 1e-9);
  EXPECT_NEAR(0.95 * (std::tanh(1.0) - 0.1), rep.quantities.at("J"), 1e-12);
  EXPECT_EQ(1.0, rep.quantities.at("r_int"));
  EXPECT_EQ(1.0, rep.quantities.at("gcd"));
  EXPECT_EQ(3.0, rep.quantities.at("threshold"));
}

TEST(CheckThm2, PrimePeriodWithBoundedNonlinearity) {
  const double b = -2.0 * std::cos(2.0 * std::numbers::pi * 2.0 / 5.0);
  const CheckReport rep = check_thm2(Make(b, 1, 5, "tanh(x)"), 1);
  EXPECT_TRUE(rep.overall());
  EXPECT_EQ(2.0, rep.quantities.at("r_int"));
  EXPECT_EQ(3.0, rep.quantities.at("threshold"));
}

TEST(CheckThm2, SmallThresholdFails) {
  const CheckReport rep = check_thm2(Make(1, 1, 3, "tanh(x)+0.1*cos(2*pi*t/3)"), 0.01);
  EXPECT_FALSE(Find(rep, "C3").pass);
  EXPECT_FALSE(rep.overall());
}

TEST(CheckThm2, WeakNonlinearityNeedsLargerPeriod) {
  // J small relative to K pushes K/J + 1 above N / gcd.
  const CheckReport rep = check_thm2(Make(1, 1, 3, "tanh(x)+0.5*sin(x)"), 1);
  EXPECT_GT(rep.quantities.at("threshold"), 3.0);
  EXPECT_FALSE(Find(rep, "C3").pass);
}

TEST(CheckThm2, Preconditions) {
  EXPECT_THROW(check_thm2(Make(-3, 2, 3, "tanh(x)"), 1), HypothesisError);
  EXPECT_THROW(check_thm2(Make(0, 1, 4, "tanh(x)"), 1), HypothesisError);
  EXPECT_THROW(check_thm2(Make(1, 1, 3, "tanh(x)"), 0), HypothesisError);
}

}  // namespace
}  // namespace perdiff
