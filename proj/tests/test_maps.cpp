#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <stdexcept>

#include "flatblow/maps.hpp"

using namespace flatblow;

namespace {

IntegratorConfig tight() {
  IntegratorConfig c;
  c.rel_tol = 1e-13;
  c.abs_tol = 1e-15;
  return c;
}

OdeSystem tanh_xy(double eps) {
  PwsParams pp;
  pp.phi_kind = PhiKind::tanh;
  pp.eps = eps;
  return regularized_xy(pp);
}

double tanh_spread(double eps) {
  const auto m = transition_map(
      tanh_xy(eps), [](double y) { return make_state({-1.0, y}); },
      coordinate_event(0, 1.0, Direction::rising, true, 1e-15), 1, {-0.1, 0.1}, 1e4, tight());
  return m.exit_spread();
}

}  // namespace

TEST(ProjectToSection, LandsOnSection) {
  const OdeSystem s = tanh_xy(0.05);
  const EventSpec ev = coordinate_event(0, 1.0, Direction::rising);
  const State p = project_to_section(s, ev, make_state({1.0 - 1e-9, 1.02}));
  EXPECT_EQ(p[0], 1.0);
}

TEST(TransitionMap, TanhExitsAgree) {
  const auto m = transition_map(
      tanh_xy(0.05), [](double y) { return make_state({-1.0, y}); },
      coordinate_event(0, 1.0, Direction::rising, true, 1e-15), 1, {-0.1, -0.05, 0.0, 0.05, 0.1}, 1e4, tight());
  ASSERT_EQ(m.succeeded(), 5u);
  EXPECT_LT(m.exit_spread(), 1e-6);
  EXPECT_TRUE(m.contraction_defined);
  EXPECT_LT(std::abs(m.contraction_estimate), 1e-4);
}

TEST(TransitionMap, SingleInputHasNoContractionEstimate) {
  const auto m = transition_map(
      tanh_xy(0.05), [](double y) { return make_state({-1.0, y}); }, coordinate_event(0, 1.0, Direction::rising), 1,
      {0.0}, 1e4, tight());
  EXPECT_FALSE(m.contraction_defined);
  EXPECT_TRUE(std::isnan(m.contraction_estimate));
}

TEST(TransitionMap, FailuresAreFlaggedPerInput) {
  // y' = 1 never reaches x = 1 when x is frozen
  const OdeSystem s{"frozen", {"x", "y"}, {}, [](const State&) { return make_state({0.0, 1.0}); }, {}};
  const auto m = transition_map(
      s, [](double y) { return make_state({0.0, y}); }, coordinate_event(0, 1.0), 1, {0.0, 1.0}, 5.0);
  EXPECT_EQ(m.succeeded(), 0u);
  EXPECT_FALSE(m.failures[0].empty());
  EXPECT_TRUE(std::isnan(m.exit_spread()));
}

TEST(ContractionScaling, TanhLadder) {
  const ScalingFit f = contraction_scaling({0.2, 0.1, 0.0667}, tanh_spread);
  EXPECT_LT(f.slope, 0.0);
  EXPECT_GE(f.r2, 0.95);
}

TEST(ContractionScaling, NonContractingControl) {
  // translation x' = 1, y' = 0 carries the spread unchanged
  auto spread = [](double) {
    const OdeSystem s{"shift", {"x", "y"}, {}, [](const State&) { return make_state({1.0, 0.0}); }, {}};
    return transition_map(
               s, [](double y) { return make_state({-1.0, y}); }, coordinate_event(0, 1.0, Direction::rising), 1,
               {-0.1, 0.1}, 10.0, tight())
        .exit_spread();
  };
  const ScalingFit f = contraction_scaling({0.2, 0.1, 0.0667}, spread);
  EXPECT_NEAR(f.slope, 0.0, 1e-10);
}

TEST(ContractionScaling, UnderflowAndTooFewPoints) {
  const ScalingFit f = contraction_scaling(std::vector<std::pair<double, double>>{
      {0.2, 1e-3}, {0.1, 1e-6}, {0.05, 1e-12}, {0.01, 0.0}});
  EXPECT_EQ(f.used.size(), 3u);
  EXPECT_EQ(f.warnings.size(), 1u);
  EXPECT_THROW(contraction_scaling(std::vector<std::pair<double, double>>{{0.2, 1e-3}, {0.1, 1e-300}}), DomainError);
}

TEST(LinearFit, ExactLine) {
  const ScalingFit f = linear_fit({1.0, 2.0, 3.0}, {1.0, 3.0, 5.0});
  EXPECT_DOUBLE_EQ(f.slope, 2.0);
  EXPECT_DOUBLE_EQ(f.intercept, -1.0);
  EXPECT_DOUBLE_EQ(f.r2, 1.0);
  EXPECT_THROW(linear_fit({1.0, 1.0}, {0.0, 1.0}), UsageError);
}

TEST(EntryExit, ApproachesReflection) {
  AircraftParams p;
  IntegratorConfig c;
  c.rel_tol = 1e-12;
  c.abs_tol = 1e-14;
  double prev = INFINITY;
  for (double y0 : {0.05, 0.02, 0.01}) {
    const auto r = entry_exit_map(p, y0, -1.0, 0.5, c);
    ASSERT_TRUE(r.ok) << r.message;
    const double dev = std::abs(r.x2_plus - 1.0);
    EXPECT_LT(dev, prev);
    prev = dev;
  }
  const auto r2 = entry_exit_map(p, 0.01, -2.0, 0.5, c);
  EXPECT_GT(r2.x2_plus, 1.5);
  EXPECT_LT(r2.x2_plus, 2.5);
  const double h = 0.01;
  const double d =
      (entry_exit_map(p, 0.01, -1.0 + h, 0.5, c).x2_plus - entry_exit_map(p, 0.01, -1.0 - h, 0.5, c).x2_plus) / (2 * h);
  EXPECT_NEAR(d, -1.0, 0.1);
}

TEST(EntryExit, DomainChecks) {
  AircraftParams p;
  EXPECT_THROW(entry_exit_map(p, 0.0, -1.0), DomainError);
  EXPECT_THROW(entry_exit_map(p, 0.01, 1.0), DomainError);
  EXPECT_THROW(entry_exit_map(p, 0.01, -1.0, 0.0), DomainError);
}

TEST(Canard, LocationNearMinusEps) {
  AircraftParams p{1.0, 1.0, 0.0, 1e-3};
  const CanardResult r = canard_bisect(p, -5e-3, 5e-3);
  EXPECT_GT(r.alpha_c, -2e-3);
  EXPECT_LT(r.alpha_c, 0.0);
  EXPECT_NE(r.class_lo, r.class_hi);
  EXPECT_FALSE(r.classifier_log.empty());
  const CanardResult rev = canard_bisect(p, 5e-3, -5e-3);
  EXPECT_NEAR(rev.alpha_c, r.alpha_c, std::max(r.width, rev.width));
}

TEST(Canard, SameClassBracketRejected) {
  AircraftParams p{1.0, 1.0, 0.0, 1e-3};
  EXPECT_THROW(canard_bisect(p, 0.1, 0.2), BracketError);
  EXPECT_THROW(canard_bisect(p, 0.1, 0.1), UsageError);
}

TEST(Canard, ClassesOnEitherSide) {
  AircraftParams p{1.0, 1.0, -0.01, 1e-3};
  EXPECT_EQ(classify_canard(p), CanardClass::head);
  p.alpha = 0.01;
  EXPECT_EQ(classify_canard(p), CanardClass::no_head);
}

TEST(Canard, WindowShrinksWithEps) {
  AircraftParams p{1.0, 1.0, 0.0, 0.1};
  const double w_big = canard_window_width(p, -2.0, 0.5, 2.0, 4.0);
  p.eps = 0.06;
  const double w_small = canard_window_width(p, -2.0, 0.5, 2.0, 4.0);
  EXPECT_LT(w_small, w_big);
}

TEST(Seeds, TanhSeedArithmetic) {
  EXPECT_NEAR(tanh_seed_x(0.4, 0.01), 0.738696822013340299, 1e-15);
  EXPECT_THROW(tanh_seed_x(0.0, 0.01), DomainError);
}

TEST(Seeds, TanhSeedAtZeroEpsIsStationary) {
  const SeedResult r = tanh_slow_manifold_seed(0.4, 0.0);
  EXPECT_LE((r.settled - r.seed).lpNorm<Eigen::Infinity>(), 1e-10);
}

TEST(Seeds, TanhSeedSettlesOnSection) {
  const SeedResult r = tanh_slow_manifold_seed(0.4, 1e-3);
  EXPECT_NEAR(r.settled[1], 2.5, 1e-10);
  EXPECT_TRUE(std::isfinite(r.settled[0]));
}

TEST(Seeds, KuehnKappa1) {
  const SeedResult inv = kuehn_kappa1_seed(1.0, 0.05);
  EXPECT_DOUBLE_EQ(inv.seed[1], 1.05);
  EXPECT_NEAR(inv.settled[1], inv.seed[1], 2.5e-3);
  EXPECT_NEAR(inv.settled[3], 0.05, 1e-12);
  // relaxing from the opposite-sign guess lands on the same curve
  const SeedResult disp = kuehn_kappa1_seed(1.0, 0.05, 1.0, 0.0, 0.2, KuehnManifoldForm::displayed);
  EXPECT_DOUBLE_EQ(disp.seed[1], 0.95);
  EXPECT_NEAR(disp.settled[1], 1.05, 2.5e-3);
}

TEST(Seeds, AircraftSettlesOnFoldSection) {
  AircraftParams p;
  p.eps = 0.05;
  const SeedResult r = aircraft_slow_manifold_seed(p);
  EXPECT_NEAR(r.settled[1], p.y_f(), 1e-10);
  EXPECT_GT(r.settled[0], p.lambda(p.y_f()));
}

TEST(Parallel, OrderedAndPropagatesErrors) {
  const auto v = parallel_map(100, [](std::size_t i) { return static_cast<int>(i * i); });
  for (std::size_t i = 0; i < v.size(); ++i) EXPECT_EQ(v[i], static_cast<int>(i * i));
  EXPECT_THROW(parallel_map(10,
                            [](std::size_t i) {
                              if (i == 7) throw std::runtime_error("boom");
                              return 0;
                            }),
               std::runtime_error);
}
