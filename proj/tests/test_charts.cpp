#include <gtest/gtest.h>

#include <random>

#include "flatblow/chart_catalog.hpp"

using namespace flatblow;

namespace {

void expect_state_near(const State& got, const State& want, double tol) {
  ASSERT_EQ(got.size(), want.size());
  for (Eigen::Index i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i], want[i], tol) << "component " << i;
}

}  // namespace

// tanh ambient order (x, eps_hat, q, eps); kappa1 local (r1, x1, eps_hat, eps1).
TEST(ChartToAmbient, TanhKappa1) {
  const State a = chart_to_ambient(tanh_chart_kappa1(), make_state({0.1, -0.5, 0.3, 0.04}));
  expect_state_near(a, make_state({-0.05, 0.3, 0.1, 0.0004}), 1e-16);
}

// Kuehn ambient (x, y, q, eps); kappa1 local (r1, x1, y, eps1).
TEST(ChartToAmbient, KuehnKappa1) {
  const State a = chart_to_ambient(kuehn_chart_kappa1(), make_state({0.2, 1.0, 0.05, 0.5}));
  expect_state_near(a, make_state({0.2, 0.05, 0.2, 0.1}), 1e-16);
}

// Aircraft ambient (x, y, q, eps); scaling chart local (x2, y, q2, r2).
TEST(ChartToAmbient, AircraftScalingChart) {
  const State a = chart_to_ambient(aircraft_chart_scaling(), make_state({2.0, 0.3, 1.0, 0.1}));
  expect_state_near(a, make_state({0.2, 0.3, 0.1, 0.01}), 1e-16);
}

TEST(AmbientToChart, InversesOfTheThreeExamples) {
  expect_state_near(ambient_to_chart(tanh_chart_kappa1(), make_state({-0.05, 0.3, 0.1, 0.0004})),
                    make_state({0.1, -0.5, 0.3, 0.04}), 1e-15);
  expect_state_near(ambient_to_chart(kuehn_chart_kappa1(), make_state({0.2, 0.05, 0.2, 0.1})),
                    make_state({0.2, 1.0, 0.05, 0.5}), 1e-15);
  expect_state_near(ambient_to_chart(aircraft_chart_scaling(), make_state({0.2, 0.3, 0.1, 0.01})),
                    make_state({2.0, 0.3, 1.0, 0.1}), 1e-15);
}

TEST(AmbientToChart, OutsideChartThrows) {
  EXPECT_THROW(ambient_to_chart(tanh_chart_kappa1(), make_state({-0.05, 0.3, 0.0, 0.0004})), NotInChart);
}

TEST(AmbientToChart, TanhKappa2) {
  // kappa2 local (x2, eps_hat, q2, r2)
  const State p = ambient_to_chart(tanh_chart_kappa2(), make_state({-0.05, 0.3, 0.1, 0.0004}));
  expect_state_near(p, make_state({-2.5, 0.3, 5.0, 0.02}), 1e-14);
}

TEST(Transition, TanhK1K2) {
  const State p = transition(tanh_chart_kappa1(), tanh_chart_kappa2(), make_state({0.1, -0.5, 0.3, 0.25}));
  expect_state_near(p, make_state({-1.0, 0.3, 2.0, 0.05}), 1e-15);
}

TEST(Transition, TanhK2K3) {
  // kappa3 local (r3, eps_hat, q3, eps3)
  const State p = transition(tanh_chart_kappa2(), tanh_chart_kappa3(), make_state({2.0, 0.3, 0.5, 0.1}));
  expect_state_near(p, make_state({0.2, 0.3, 0.25, 0.25}), 1e-15);
}

TEST(Transition, RoundTripIsIdentity) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(0.05, 1.0);
  for (int k = 0; k < 50; ++k) {
    const State p = make_state({U(rng), -2.0 * U(rng), U(rng), U(rng)});
    const State back = transition(tanh_chart_kappa2(), tanh_chart_kappa1(),
                                  transition(tanh_chart_kappa1(), tanh_chart_kappa2(), p));
    EXPECT_LE((back - p).lpNorm<Eigen::Infinity>() / p.lpNorm<Eigen::Infinity>(), 1e-12);
  }
}

TEST(Transition, DifferentBlowupsRejected) {
  EXPECT_THROW(transition(tanh_chart_kappa1(), kuehn_chart_kappa1(), make_state({0.1, 0.1, 0.1, 0.1})), UsageError);
}

TEST(Chart, MalformedDefinitionsRejected) {
  EXPECT_THROW(Chart("bad", tanh_blowup(), "eps_hat", 1, {radial("r"), barred("x1", "x")}), UsageError);
  EXPECT_THROW(Chart("bad", tanh_blowup(), "q", 2, {radial("r1"), barred("x1", "x"), passthrough("eps_hat"),
                                                     barred("eps1", "eps")}),
               UsageError);
  EXPECT_THROW(Chart("bad", tanh_blowup(), "q", 1, {radial("r1"), barred("x1", "x"), passthrough("eps_hat")}),
               UsageError);
}

TEST(DesingularizationCheck, EveryShippedPair) {
  for (const auto& pair : shipped_chart_pairs()) EXPECT_LE(check_chart_pair(pair, 100), 1e-9) << pair.name;
}

TEST(DesingularizationCheck, DetectsAWrongField) {
  auto pairs = shipped_chart_pairs();
  auto& pair = pairs.front();
  const auto good = pair.field.rhs.rhs;
  pair.field.rhs.rhs = [good](const State& s) {
    State v = good(s);
    v[1] += 0.1;
    return v;
  };
  EXPECT_GT(check_chart_pair(pair, 20), 1e-3);
}

TEST(DesingularizationCheck, NegativeAircraftParameterPairs) {
  AircraftParams ap;
  ap.a = -0.5;
  for (const auto& pair : shipped_chart_pairs(1.0, ap))
    if (pair.name.rfind("aircraft", 0) == 0) EXPECT_LE(check_chart_pair(pair, 50), 1e-9) << pair.name;
}
