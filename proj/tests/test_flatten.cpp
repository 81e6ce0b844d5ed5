#include <gtest/gtest.h>

#include <cmath>

#include "flatblow/flatten.hpp"

using namespace flatblow;

namespace {

IntegratorConfig tight() {
  IntegratorConfig c;
  c.rel_tol = 1e-10;
  c.abs_tol = 1e-20;
  return c;
}

}  // namespace

TEST(ExtendKuehn, RhsArithmetic) {
  const auto aug = extend_kuehn(1.0);
  const double e1 = std::exp(-1.0);
  const State f = aug.extended(make_state({1.0, 1.0, e1, 0.0}));
  EXPECT_DOUBLE_EQ(f[0], 0.0);
  EXPECT_NEAR(f[1], 1.0 - e1, 1e-15);
  EXPECT_NEAR(f[2], e1 * (1.0 - e1), 1e-15);
  EXPECT_EQ(f[3], 0.0);
}

TEST(ExtendKuehn, QAxisInvariant) {
  const auto aug = extend_kuehn(2.0);
  for (double x : {-1.0, 0.0, 0.7}) EXPECT_EQ(aug.extended(make_state({x, 0.3, 0.0, 0.1}))[2], 0.0);
}

TEST(ExtendKuehn, ConstraintRateVanishesOnQ) {
  const auto aug = extend_kuehn(1.0);
  const State s = aug.lift(make_state({0.5, 0.4, 0.0}));
  EXPECT_NEAR(s[2], std::exp(-2.5), 1e-17);
  EXPECT_LE(std::abs(aug.q_constraint_rate(s)), 1e-16);
}

TEST(ExtendKuehn, BaseFieldRecoveredOnQ) {
  const auto aug = extend_kuehn(1.5);
  const State base = make_state({0.3, 0.6, 0.02});
  const State f_ext = aug.extended(aug.lift(base));
  const State f_base = aug.base(base);
  EXPECT_NEAR(f_ext[0], f_base[0], 1e-16);
  EXPECT_NEAR(f_ext[1], f_base[1], 1e-16);
}

TEST(ExtendTanh, RhsArithmetic) {
  const auto aug = extend_tanh();
  const double q = std::exp(-4.0);
  const State f = aug.extended(make_state({0.0, 0.5, q, 0.01}));
  EXPECT_DOUBLE_EQ(f[0], 0.01);
  EXPECT_NEAR(f[1], -0.25 * q, 1e-18);
  EXPECT_NEAR(f[2], -2.0 * std::exp(-8.0), 1e-18);
  EXPECT_NEAR(f[2], -6.709e-4, 1e-7);
}

TEST(ExtendTanh, QPlaneInvariantAndConstraintRate) {
  const auto aug = extend_tanh();
  EXPECT_EQ(aug.extended(make_state({0.3, 0.4, 0.0, 0.1}))[2], 0.0);
  const State s = aug.lift(make_state({0.2, 0.4, 0.05}));
  EXPECT_NEAR(s[2], std::exp(-5.0), 1e-18);
  EXPECT_LE(std::abs(aug.q_constraint_rate(s)), 1e-17);
}

TEST(ExtendTanh, ReconstructY) {
  EXPECT_DOUBLE_EQ(tanh_reconstruct_y(make_state({0.0, 0.5, 0.0, 0.01})), 0.02);
  EXPECT_THROW(tanh_reconstruct_y(make_state({0.0, 0.0, 0.0, 0.01})), DomainError);
}

TEST(ExtendAircraft, FixedOnSliceXEqualsQ) {
  const double eps = 0.05, alpha = -1.0;
  const auto aug = extend_aircraft(1.0, 0.5, alpha);
  for (double y0 : {0.2, 0.5, 0.9}) {
    const State f = aug.extended(make_state({0.3, y0, 0.3, eps}));
    EXPECT_EQ(f[1], 0.0);
    EXPECT_EQ(f[2], 0.0);
    EXPECT_NEAR(f[0], y0 * eps * (1.0 + alpha * y0), 1e-16);
  }
}

TEST(ExtendAircraft, RhsArithmetic) {
  const auto aug = extend_aircraft(1.0, 0.5, -1.0);
  const State f = aug.extended(make_state({0.2, 0.5, 0.1, 0.0}));
  EXPECT_NEAR(f[0], 0.01, 1e-16);
  EXPECT_NEAR(f[1], 0.025, 1e-16);
  EXPECT_NEAR(f[2], 0.1 * 0.1 * (2.0 / 3.0), 1e-16);
}

TEST(ExtendAircraft, ConstraintRateAndGuard) {
  const auto aug = extend_aircraft(1.0, 0.5, -1.0);
  const State s = aug.lift(make_state({0.7, 0.5, 0.02}));
  EXPECT_LE(std::abs(aug.q_constraint_rate(s)), 1e-16);
  const auto neg = extend_aircraft(-1.0, 0.5, -1.0);
  EXPECT_FALSE(neg.extended.admissible(make_state({0.0, 1.5, 0.0, 0.0})));
  EXPECT_THROW(extend_aircraft(1.0, 0.0, 0.0), UsageError);
}

TEST(QDrift, KuehnOnQ) {
  const auto aug = extend_kuehn(1.0);
  const Trajectory tr = integrate(aug.extended, aug.lift(make_state({0.1, 0.5, 0.05})), {0.0, 1.0}, tight());
  ASSERT_TRUE(tr.ok());
  EXPECT_LE(q_drift(aug, tr), 1e-8);
}

TEST(QDrift, TanhOnQ) {
  const auto aug = extend_tanh();
  const Trajectory tr = integrate(aug.extended, aug.lift(make_state({-0.3, 0.4, 0.05})), {0.0, 1.0}, tight());
  ASSERT_TRUE(tr.ok());
  EXPECT_LE(q_drift(aug, tr), 1e-8);
}

TEST(QDrift, OffQIsReported) {
  const auto aug = extend_kuehn(1.0);
  State s = aug.lift(make_state({0.1, 0.5, 0.05}));
  s[2] *= 2.0;
  const Trajectory tr = integrate(aug.extended, s, {0.0, 1.0}, tight());
  ASSERT_TRUE(tr.ok());
  EXPECT_GT(q_drift(aug, tr), 0.3);
}

TEST(FlatAugmentation, LiftProjectRoundTrip) {
  const auto aug = extend_aircraft(1.0, 0.5, -1.0);
  const State b = make_state({0.4, 0.3, 0.05});
  const State back = aug.project(aug.lift(b));
  EXPECT_EQ((back - b).lpNorm<Eigen::Infinity>(), 0.0);
}
