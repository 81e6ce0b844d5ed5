#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "flatblow/asymptotics.hpp"
#include "flatblow/odecore.hpp"

using namespace flatblow;

// Reference values below were computed once with mpmath at 40 digits.

TEST(ErrorFunctions, ErfSymmetryAndZero) {
  EXPECT_EQ(flatblow::erf(0.0), 0.0);
  for (double u : {0.1, 0.7, 2.5}) EXPECT_EQ(flatblow::erf(-u), -flatblow::erf(u));
  EXPECT_NEAR(flatblow::erf(0.5), 0.52049987781304653768, 1e-15);
}

TEST(ErrorFunctions, ErfcAtOne) { EXPECT_NEAR(flatblow::erfc(1.0), 0.15729920705028513066, 1e-15); }

TEST(ErrorFunctions, ErfcxAgainstReference) {
  const std::pair<double, double> ref[] = {{0.5, 0.61569034419292587487},  {1.0, 0.42758357615580700441},
                                           {3.0, 0.17900115118138995042},  {5.0, 0.11070463773306862637},
                                           {10.0, 0.056140992743822585858}, {100.0, 0.0056416137829894329036},
                                           {-1.0, 5.0089800807622834663},  {-5.0, 144009798674.66104041}};
  for (const auto& [u, v] : ref) EXPECT_NEAR(erfcx(u) / v, 1.0, 1e-13) << "u = " << u;
}

TEST(ErrorFunctions, ErfcxLargeArgumentAsymptotics) {
  const double u = 100.0;
  EXPECT_NEAR(erfcx(u), 1.0 / (u * std::sqrt(std::numbers::pi)) * (1.0 - 1.0 / (2.0 * u * u)), 1e-10);
  EXPECT_NEAR(erfcx(1e9) * 1e9 * std::sqrt(std::numbers::pi), 1.0, 1e-15);
  EXPECT_TRUE(std::isinf(erfcx(-30.0)));
}

TEST(TanhYTheta, ExitConstantMatchesExactSolution) {
  EXPECT_NEAR(tanh_y_theta(1.0, 0.01).value, 1.0161076181309935921, 1e-14);
  EXPECT_NEAR(tanh_exact_solution(1.0, 0.01, 1.0), tanh_y_theta(1.0, 0.01).value, 1e-12);
}

TEST(TanhYTheta, DisplayedConstantVariant) {
  EXPECT_NEAR(tanh_y_theta(1.0, 0.01, TanhLogConstant::displayed).value, 1.0126418822281938656, 1e-14);
  EXPECT_NEAR(tanh_y_theta(0.5, 0.001, TanhLogConstant::displayed).value, 0.25183983449606789798, 1e-14);
}

TEST(TanhYTheta, SmallEpsLimitAndDomain) {
  EXPECT_NEAR(tanh_y_theta(1.0, 1e-300).value, 1.0, 1e-290);
  EXPECT_THROW(tanh_y_theta(1.0, 0.0), DomainError);
  EXPECT_THROW(tanh_y_theta(-1.0, 0.01), DomainError);
}

TEST(TanhExactSolution, ValueAtOrigin) {
  EXPECT_NEAR(tanh_exact_solution(0.0, 0.01, 1.0), 0.0025 * std::log(50.0 * std::numbers::pi), 1e-15);
}

TEST(TanhExactSolution, OdeResidual) {
  const double eps = 0.05;
  auto y = [eps](double x) { return tanh_exact_solution(x, eps, 1.0); };
  const double h = 1e-3;
  double worst = 0.0;
  for (double x = -1.0; x <= 1.0 + 1e-12; x += 0.01) {
    const double d = (-y(x + 2 * h) + 8 * y(x + h) - 8 * y(x - h) + y(x - 2 * h)) / (12 * h);
    worst = std::max(worst, std::abs(d - 2.0 * x - std::exp(-2.0 * y(x) / eps)));
  }
  EXPECT_LE(worst, 1e-10);
}

TEST(TanhExactSolution, DeepNegativeArgumentStaysFinite) {
  // 1 + erf(z) underflows near z = -27; the erfcx branch does not.
  const double v = tanh_exact_solution(-2.0, 0.005, 1.0);
  EXPECT_TRUE(std::isfinite(v));
  EXPECT_LT(v, 0.0);
}

TEST(Bonet, PrefactorForms) {
  EXPECT_NEAR(bonet_prefactor(2, 1.5, BonetPrefactor::displayed), 1.2114137285547597726, 1e-15);
  EXPECT_NEAR(bonet_prefactor(2, 1.5, BonetPrefactor::derived), 0.76314282836888791187, 1e-15);
  EXPECT_THROW(bonet_prefactor(1, 1.5), DomainError);
  EXPECT_THROW(bonet_prefactor(2, 0.0), DomainError);
}

TEST(Bonet, YThetaLimitAndValue) {
  const double eta = eta_oracle(2);
  EXPECT_DOUBLE_EQ(bonet_y_theta(2, 1.5, 1.0, 0.0, eta).value, 1.0);
  const double eps = 1e-4;
  const double want = 1.0 + eps - std::pow(eps, 4.0 / 3.0) * 1.2114137285547597726 * eta * eta;
  EXPECT_NEAR(bonet_y_theta(2, 1.5, 1.0, eps, eta, BonetPrefactor::displayed).value, want, 1e-15);
}

TEST(EtaOracle, FrozenValueAndPositivity) {
  const double eta2 = eta_oracle(2);
  EXPECT_NEAR(eta2, 1.0187929716477828, 1e-10);
  EXPECT_GT(eta_oracle(3), 0.0);
  EXPECT_GT(eta_oracle(4), 0.0);
}

TEST(EtaOracle, IndependentOfHorizon) {
  const double a = detail::eta_crossing(2, 64.0);
  EXPECT_NEAR(detail::eta_crossing(2, 128.0), a, 1e-8);
  EXPECT_NEAR(detail::eta_crossing(2, 256.0), a, 1e-8);
}

TEST(M2, ValuesAndResidual) {
  EXPECT_NEAR(m2(0.0), 0.79788456080286535588, 1e-15);
  EXPECT_NEAR(m2(-5.0), 10.098093233962511965, 1e-12);
  EXPECT_NEAR(m2(-5.0) / 10.0, 1.0, 0.01);
  EXPECT_NEAR(m2(1.0), 0.055247862678989959102, 1e-15);
  const double h = 1e-3, x = 1.0;
  const double d = (-m2(x + 2 * h) + 8 * m2(x + h) - 8 * m2(x - h) + m2(x - 2 * h)) / (12 * h);
  EXPECT_LE(std::abs(d + 2.0 * m2(x) * (2.0 * x + m2(x))), 1e-9);
}

TEST(S3, ValuesAndOverflowGuard) {
  EXPECT_NEAR(s3(2.0), 0.75787215614131210604, 1e-14);
  EXPECT_NEAR(s3(0.01), 0.99751851963673566278, 1e-14);
  EXPECT_LE(std::abs(s3(0.01) - 1.0), 0.01);
  // e^{1000} overflows in the naive product; the scaled form does not
  EXPECT_TRUE(std::isinf(std::exp(2.0 / 0.002)));
  EXPECT_NEAR(s3(0.002), 1.0, 0.002);
}

TEST(FiberTransform, IdentityAtZeroAndRoundTrip) {
  EXPECT_EQ(fiber_transform(0.1, 0.0, 0.5), 0.1);
  const double eh = fiber_transform(0.1, 0.5, 0.5);
  EXPECT_NEAR(fiber_transform_inverse(eh, 0.5, 0.5), 0.1, 1e-12);
}

TEST(FiberTransform, ScalingChartCollapse) {
  const double eta = 0.25, eps = 1e-3;
  // q3 = q2/x2 and eps3 = x2^{-2} with q2 = m2(x2) at x2 = eta^{-1/2}
  const double x2 = 1.0 / std::sqrt(eta);
  const double q3 = m2(x2) / x2, e3 = 1.0 / (x2 * x2);
  const double eh = tanh_eps_hat_scaling_exit(eta, eps);
  EXPECT_NEAR(fiber_transform_inverse(eh, q3, e3), tanh_eps_breve_scaling_exit(eta, eps), 1e-12);
}

TEST(Y2ClosedForm, ReductionsAndDisplayedVariant) {
  EXPECT_NEAR(y2_closed_form(1.0, 0.1, 0.0), 0.1 * std::sqrt(2.0), 1e-15);
  for (double a : {-0.5, 0.0, 0.3, 2.0}) EXPECT_NEAR(y2_closed_form(0.0, 0.07, a), 0.07, 1e-16);
  EXPECT_EQ(y2_closed_form(1.3, 0.1, 0.0, Y2Form::displayed), y2_closed_form(1.3, 0.1, 0.0));
  EXPECT_GT(std::abs(y2_closed_form(3.0, 0.05, 0.3, Y2Form::displayed) / y2_closed_form(3.0, 0.05, 0.3) - 1.0), 0.1);
  EXPECT_THROW(y2_closed_form(1.0, 0.0, 0.3), DomainError);
}

TEST(Y2ClosedForm, AgainstIntegration) {
  const double alpha = 0.3, y0 = 0.05;
  const OdeSystem s{"dy2dx2", {"x2", "y"}, {},
                    [alpha](const State& z) { return make_state({1.0, z[1] * z[0] / (1.0 + z[0] * z[0] + alpha * z[1])}); },
                    {}};
  IntegratorConfig c;
  c.rel_tol = 1e-12;
  c.abs_tol = 1e-14;
  c.max_step = 0.05;
  const Trajectory tr = integrate(s, make_state({0.0, y0}), {0.0, 3.0}, c);
  ASSERT_TRUE(tr.ok());
  double worst = 0.0;
  for (const auto& st : tr.states) worst = std::max(worst, std::abs(st[1] / y2_closed_form(st[0], y0, alpha) - 1.0));
  EXPECT_LE(worst, 1e-6);
}

TEST(KuehnPredictions, ManifoldFormsAndExponents) {
  const auto inv = kuehn_predictions(1.0, 0.05);
  EXPECT_DOUBLE_EQ(inv.center_manifold_x1.value, 1.05);
  EXPECT_DOUBLE_EQ(kuehn_predictions(1.0, 0.05, 2, KuehnManifoldForm::displayed).center_manifold_x1.value, 0.95);
  EXPECT_DOUBLE_EQ(kuehn_predictions(-1.0, 0.05).center_manifold_x1.value - 1.0,
                   -(inv.center_manifold_x1.value - 1.0));
  EXPECT_DOUBLE_EQ(inv.algebraic_exponents.first, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(inv.algebraic_exponents.second, 1.0 / 3.0);
  EXPECT_THROW(kuehn_predictions(0.0, 0.05), DomainError);
}

TEST(TanhReducedTransits, P1AndP3) {
  const auto [r1, eh] = tanh_p1_out(1e-4, 0.1);
  EXPECT_NEAR(r1, std::sqrt(1e-3), 1e-15);
  EXPECT_NEAR(eh, 4.0 / std::log(1000.0), 1e-15);
  const auto [eb, e3] = tanh_p3(0.2, 0.01, 1.0, 0.25);
  EXPECT_NEAR(1.0 / eb, 5.0 + 100.0 - 4.0, 1e-12);
  EXPECT_NEAR(e3, 0.01, 1e-16);
}
