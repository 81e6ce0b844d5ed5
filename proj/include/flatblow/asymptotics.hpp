#pragma once

// Closed-form asymptotic predictions for the regularized visible fold, the
// flat Kuehn model and the aircraft scaling chart, plus the shooting oracle
// for the Riccati crossing constant eta(n).

#include <cmath>
#include <map>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "flatblow/errors.hpp"
#include "flatblow/odecore.hpp"
#include "flatblow/special.hpp"

namespace flatblow {

struct Prediction {
  double value = 0.0;
  std::string error_order;
  std::map<std::string, double> inputs;
};

/// Which constant to use inside the logarithm of the tanh intersection.
/// `exit` is the value reached at x = theta by the exact solution and by the
/// chart computation (ln(2 pi / eps)); `displayed` is ln(pi / (2 eps)), which
/// is the value of the exact solution at x = 0.
enum class TanhLogConstant { exit, displayed };

/// y_theta(eps) = theta^2 + eps/4 ln(c / eps), the intersection of the slow
/// manifold of the tanh regularization with {x = theta}.
inline Prediction tanh_y_theta(double theta, double eps, TanhLogConstant form = TanhLogConstant::exit) {
  if (!(eps > 0.0 && eps < 1.0)) throw DomainError("tanh_y_theta needs eps in (0, 1)");
  if (!(theta > 0.0)) throw DomainError("tanh_y_theta needs theta > 0");
  const double c = form == TanhLogConstant::exit ? 2.0 * std::numbers::pi : std::numbers::pi / 2.0;
  return {theta * theta + 0.25 * eps * std::log(c / eps), "O(eps exp(-c/eps))", {{"theta", theta}, {"eps", eps}}};
}

/// Explicit solution of dy/dx = 2x + e^{-2y/eps}:
/// y = x^2 + eps/2 ln( sqrt(pi/(2 eps)) (erf(sqrt(2/eps) x) + C) ).
inline double tanh_exact_solution(double x, double eps, double C) {
  if (!(eps > 0.0)) throw DomainError("tanh_exact_solution needs eps > 0");
  const double z = std::sqrt(2.0 / eps) * x;
  const double pref = 0.5 * std::log(std::numbers::pi / (2.0 * eps));
  if (C == 1.0 && z < 0.0) {
    // 1 + erf(z) = erfcx(-z) e^{-z^2} and eps z^2 / 2 = x^2 cancel the x^2 term.
    return 0.5 * eps * (pref + std::log(erfcx(-z)));
  }
  const double arg = C == 1.0 ? erfc(-z) : erf(z) + C;
  if (!(arg > 0.0)) throw DomainError("tanh_exact_solution: nonpositive logarithm argument");
  return x * x + 0.5 * eps * (pref + std::log(arg));
}

/// Prefactor of the C_ST intersection defect. `derived` rescales the scaling
/// chart to v' = -u - v^n exactly, (2^{2-n}/phi_n)^{2/(2n-1)}; `displayed` is
/// (2/phi_n)^{2/(2n-1)}. The two agree only for n = 1.
enum class BonetPrefactor { derived, displayed };

/// Prefactor of r2^{2n} eta^2 in the defect theta^2 + eps - y_theta.
inline double bonet_prefactor(int n, double phi_n, BonetPrefactor form = BonetPrefactor::derived) {
  if (n < 2) throw DomainError("bonet_prefactor needs n >= 2");
  if (!(phi_n > 0.0)) throw DomainError("bonet_prefactor needs phi^[n] > 0");
  const double num = form == BonetPrefactor::derived ? std::pow(2.0, 2.0 - n) : 2.0;
  return std::pow(num / phi_n, 2.0 / (2.0 * n - 1.0));
}

/// theta^2 + eps - r2^{2n} prefactor eta^2 with r2 = eps^{1/(2n-1)};
/// the r2 F(r2) correction is not modeled.
inline Prediction bonet_y_theta(int n, double phi_n, double theta, double eps, double eta,
                                BonetPrefactor form = BonetPrefactor::derived) {
  if (!(eps >= 0.0)) throw DomainError("bonet_y_theta needs eps >= 0");
  const double pref = bonet_prefactor(n, phi_n, form);
  const double r2 = std::pow(eps, 1.0 / (2.0 * n - 1.0));
  return {theta * theta + eps - std::pow(r2, 2.0 * n) * pref * eta * eta, "O(r2^(2n+1)), r2 = eps^(1/(2n-1))",
          {{"n", n}, {"phi_n", phi_n}, {"theta", theta}, {"eps", eps}, {"eta", eta}}};
}

struct EtaOracleResult {
  double value = 0.0;
  double L = 0.0;
  std::vector<std::pair<double, double>> log;  // (L, crossing)
};

namespace detail {
inline double eta_crossing(int n, double L) {
  const OdeSystem riccati{"riccati", {"u", "v"}, {},
                          [n](const State& s) { return make_state({1.0, -s[0] - std::pow(s[1], n)}); }, {}};
  IntegratorConfig cfg;
  cfg.rel_tol = 1e-12;
  cfg.abs_tol = 1e-14;
  cfg.record_steps = false;
  const auto ev = coordinate_event(1, 0.0, Direction::falling, true, 1e-14);
  const auto tr = integrate(riccati, make_state({-L, std::pow(L, 1.0 / n)}), {0.0, L + 50.0}, cfg, {ev});
  if (tr.status != Status::terminated_by_event)
    throw OracleFailure("eta oracle: no crossing of v = 0 for L = " + std::to_string(L));
  return tr.final_state()[0];
}
}  // namespace detail

/// Crossing u = eta(n) > 0 of v = 0 by the solution of v' = -u - v^n that is
/// attracted to v = (-u)^{1/n} as u -> -infinity. Converged when doubling the
/// start distance L changes the crossing by less than 1e-8.
inline EtaOracleResult eta_oracle_detailed(int n) {
  if (n < 2) throw DomainError("eta_oracle needs n >= 2");
  EtaOracleResult res;
  double prev = detail::eta_crossing(n, 4.0);
  res.log.emplace_back(4.0, prev);
  for (double L = 8.0; L <= 512.0; L *= 2.0) {
    const double cur = detail::eta_crossing(n, L);
    res.log.emplace_back(L, cur);
    if (std::abs(cur - prev) < 1e-8) {
      res.value = cur;
      res.L = L;
      return res;
    }
    prev = cur;
  }
  throw OracleFailure("eta oracle did not converge up to L = 512");
}

inline double eta_oracle(int n) { return eta_oracle_detailed(n).value; }

/// m2(x) = 2 e^{-2x^2} / (sqrt(2 pi) (1 + erf(sqrt(2) x))), the orbit
/// q2 = m2(x2) of the tanh scaling chart.
inline double m2(double x) {
  const double z = std::numbers::sqrt2 * x;
  const double c = 2.0 / std::sqrt(2.0 * std::numbers::pi);
  if (x <= 0.0) return c / erfcx(-z);
  return c * std::exp(-z * z) / (1.0 + erf(z));
}

/// S3(eps3) = sqrt(2 pi / eps3) e^{2/eps3} erfc(sqrt(2/eps3)) = 1 + O(eps3).
inline double s3(double eps3) {
  if (!(eps3 > 0.0)) throw DomainError("s3 needs eps3 > 0");
  return std::sqrt(2.0 * std::numbers::pi / eps3) * erfcx(std::sqrt(2.0 / eps3));
}

/// W(q3, eps3) = -1/2 ln(1 + q3 S3(eps3) / 2).
inline double fiber_W(double q3, double eps3) {
  if (!(q3 >= 0.0)) throw DomainError("fiber transform needs q3 >= 0");
  return -0.5 * std::log1p(0.5 * q3 * s3(eps3));
}

/// eps_hat = eps_breve / (1 + eps_breve W): straightened fiber coordinate to eps_hat.
inline double fiber_transform(double eps_breve, double q3, double eps3) {
  const double den = 1.0 + eps_breve * fiber_W(q3, eps3);
  if (!(den > 0.0)) throw DomainError("fiber transform: nonpositive denominator");
  return eps_breve / den;
}

/// Inverse of fiber_transform: eps_breve = eps_hat / (1 - eps_hat W).
inline double fiber_transform_inverse(double eps_hat, double q3, double eps3) {
  const double den = 1.0 - eps_hat * fiber_W(q3, eps3);
  if (!(den > 0.0)) throw DomainError("inverse fiber transform: nonpositive denominator");
  return eps_hat / den;
}

/// eps_hat on the scaling-chart orbit q2 = m2(x2) at x2 = eta^{-1/2}:
/// 1/eps_hat = 1/4 ln(1/eps) + 1/eta + 1/2 ln( sqrt(2 pi)/2 (1 + erf(sqrt(2/eta))) ).
inline double tanh_eps_hat_scaling_exit(double eta, double eps) {
  const double inv = 0.25 * std::log(1.0 / eps) + 1.0 / eta +
                     0.5 * std::log(0.5 * std::sqrt(2.0 * std::numbers::pi) * (1.0 + erf(std::sqrt(2.0 / eta))));
  return 1.0 / inv;
}

/// The same point after straightening the fibers: 1/eps_breve = 1/4 ln(1/eps) + 1/eta + 1/4 ln(2 pi).
inline double tanh_eps_breve_scaling_exit(double eta, double eps) {
  return 1.0 / (0.25 * std::log(1.0 / eps) + 1.0 / eta + 0.25 * std::log(2.0 * std::numbers::pi));
}

/// Reduced kappa1 transit to {eps1 = nu}: (r1, eps_hat) = (sqrt(eps/nu), 4 / ln(nu/eps)).
inline std::pair<double, double> tanh_p1_out(double eps, double nu) {
  return {std::sqrt(eps / nu), 4.0 / std::log(nu / eps)};
}

/// Reduced kappa3 transit from {eps3 = eta} to {r3 = theta}: (eps_breve, eps3).
inline std::pair<double, double> tanh_p3(double eps_breve0, double eps, double theta, double eta) {
  return {1.0 / (1.0 / eps_breve0 + theta * theta / eps - 1.0 / eta), eps / (theta * theta)};
}

/// Which radicand to use in the closed form of dy/dx2 = y x2 / (1 + x2^2 + alpha y).
/// `derived` solves the equation, x2^2 (1 + 2 alpha y0); `displayed` uses
/// x2^2 (2 alpha + 1). Both coincide for alpha = 0.
enum class Y2Form { derived, displayed };

/// Solution of dy/dx2 = y x2 / (1 + x2^2 + alpha y) through y(0) = y0:
/// y0 (sqrt((alpha y0 + 1)^2 + x2^2 (1 + 2 alpha y0)) + alpha y0) / (1 + 2 alpha y0).
inline double y2_closed_form(double x2, double y0, double alpha, Y2Form form = Y2Form::derived) {
  if (!(y0 > 0.0)) throw DomainError("y2_closed_form needs y0 > 0");
  const double den = 1.0 + 2.0 * alpha * y0;
  if (den == 0.0) throw DomainError("y2_closed_form: 1 + 2 alpha y0 = 0");
  const double slope = form == Y2Form::derived ? den : 2.0 * alpha + 1.0;
  const double rad = (alpha * y0 + 1.0) * (alpha * y0 + 1.0) + x2 * x2 * slope;
  if (rad < 0.0) throw DomainError("y2_closed_form: negative radicand");
  return y0 * (std::sqrt(rad) + alpha * y0) / den;
}

/// Sign of the first-order term of the Kuehn kappa1 center manifold.
/// `invariant` is the expansion that solves the invariance equation,
/// x1 = 1 + mu eps1 + O(eps1^3); `displayed` is 1 - mu eps1.
enum class KuehnManifoldForm { invariant, displayed };

struct KuehnPredictions {
  Prediction center_manifold_x1;
  std::pair<double, double> algebraic_exponents;  // (x, y) ~ (eps^a, eps^b)
  std::string flat_scaling;                       // (x, y) ~ (O(eps), O(1/ln(1/eps)))
};

inline KuehnPredictions kuehn_predictions(double mu, double eps1, int n = 2,
                                          KuehnManifoldForm form = KuehnManifoldForm::invariant) {
  if (mu == 0.0) throw DomainError("kuehn_predictions needs mu != 0");
  if (n < 2) throw DomainError("kuehn_predictions needs n >= 2");
  KuehnPredictions out;
  const double sgn = form == KuehnManifoldForm::invariant ? 1.0 : -1.0;
  out.center_manifold_x1 = {1.0 + sgn * mu * eps1,
                            form == KuehnManifoldForm::invariant ? "O(eps1^3)" : "O(eps1^2)",
                            {{"mu", mu}, {"eps1", eps1}}};
  out.algebraic_exponents = {static_cast<double>(n) / (n + 1), 1.0 / (n + 1)};
  out.flat_scaling = "(x, y) = (O(eps), O(1/ln(1/eps)))";
  return out;
}

}  // namespace flatblow
