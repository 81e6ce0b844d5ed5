#pragma once

// Model catalog: the Kuehn-type flat slow manifold, the planar PWS visible
// fold with its Sotomayor-Teixeira and tanh regularizations, and the minimal
// aircraft ground-dynamics model, each in original, compactified and
// chart-local coordinates.

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "flatblow/errors.hpp"
#include "flatblow/odecore.hpp"

namespace flatblow {

/// e^{-c/y} for y > 0, continued by 0 for y <= 0.
inline double flat_exp(double c, double y) {
  if (!(y > 0.0)) return 0.0;
  const double e = c / y;
  if (e > 800.0) return 0.0;
  return std::exp(-e);
}

/// y^{-p} e^{-c/y}, computed in one exponential so tiny y underflows cleanly.
inline double flat_exp_scaled(double c, double y, int p) {
  if (!(y > 0.0)) return 0.0;
  const double e = -c / y - p * std::log(y);
  if (e < -800.0) return 0.0;
  return std::exp(e);
}

// ---------------------------------------------------------------- Kuehn --

struct KuehnParams {
  double mu = 1.0;
  int n = 2;
  double eps = 0.0;

  void validate() const {
    if (mu == 0.0) throw UsageError("Kuehn model requires mu != 0");
    if (n < 2) throw UsageError("Kuehn model requires n >= 2");
    if (eps < 0.0) throw UsageError("Kuehn model requires eps >= 0");
  }
};

/// u' = eps mu, v' = 1 - v^n u.
inline OdeSystem kuehn_original(const KuehnParams& p) {
  p.validate();
  const double mu = p.mu, eps = p.eps;
  const int n = p.n;
  return {"kuehn.original", {"u", "v"}, {{"mu", mu}, {"n", static_cast<double>(n)}, {"eps", eps}},
          [=](const State& s) { return make_state({eps * mu, 1.0 - std::pow(s[1], n) * s[0]}); }, {}};
}

/// Compactified algebraic model in (x, y) = (u, 1/v), time scaled by y^n.
inline OdeSystem kuehn_compactified(const KuehnParams& p) {
  p.validate();
  const double mu = p.mu;
  const int n = p.n;
  return {"kuehn.compactified", {"x", "y", "eps"}, {{"mu", mu}, {"n", static_cast<double>(n)}},
          [=](const State& s) {
            const double yn = std::pow(s[1], n);
            return make_state({s[2] * mu * yn, s[1] * s[1] * (s[0] - yn), 0.0});
          },
          [](const State& s) { return s[1] >= 0.0 && s[2] >= 0.0; }};
}

/// Flat variant: y^n replaced by e^{-1/y}.
inline OdeSystem kuehn_flat(const KuehnParams& p) {
  p.validate();
  const double mu = p.mu;
  return {"kuehn.flat", {"x", "y", "eps"}, {{"mu", mu}},
          [=](const State& s) {
            const double l = flat_exp(1.0, s[1]);
            return make_state({s[2] * mu * l, s[1] * s[1] * (s[0] - l), 0.0});
          },
          [](const State& s) { return s[1] >= 0.0 && s[2] >= 0.0; }};
}

/// Entry chart qbar = 1 of the extended flat model, divided by r1.
inline OdeSystem kuehn_kappa1(const KuehnParams& p) {
  p.validate();
  const double mu = p.mu;
  return {"kuehn.kappa1", {"r1", "x1", "y", "eps1"}, {{"mu", mu}},
          [=](const State& s) {
            const double r1 = s[0], x1 = s[1], y = s[2], e1 = s[3];
            return make_state({r1 * (x1 - 1.0), (1.0 - x1) * x1 + e1 * mu, y * y * (x1 - 1.0), (1.0 - x1) * e1});
          },
          [](const State& s) { return s[0] >= 0.0 && s[2] >= 0.0 && s[3] >= 0.0; }};
}

// ------------------------------------------------------------------ PWS --

enum class PhiKind { cst_cubic, tanh };

struct PwsParams {
  PhiKind phi_kind = PhiKind::tanh;
  double eps = 0.01;
  double rho = 1.0;
  double theta = 1.0;
  double nu = 0.1;
};

/// C_ST^1 example: -y^3/2 + 3y/2 on (-1, 1), +-1 outside.
inline double phi_cubic(double y) {
  if (y >= 1.0) return 1.0;
  if (y <= -1.0) return -1.0;
  return -0.5 * y * y * y + 1.5 * y;
}

inline double phi(PhiKind kind, double y) { return kind == PhiKind::tanh ? std::tanh(y) : phi_cubic(y); }

/// phi^[n] = (-1)^{n+1} phi^{(n)}(1^-) / n!, from a supplied one-sided derivative.
inline double phi_bracket(int n, double phi_n_derivative_at_1) {
  double fact = 1.0;
  for (int k = 2; k <= n; ++k) fact *= k;
  return ((n + 1) % 2 == 0 ? 1.0 : -1.0) * phi_n_derivative_at_1 / fact;
}

/// phi^[2] of the cubic example; phi''(1^-) = -3.
inline double phi_cubic_bracket() { return phi_bracket(2, -3.0); }

/// (1 - phi)/(1 + phi) at yhat; for tanh this is exactly e^{-2 yhat}.
inline double phi_ratio(PhiKind kind, double yhat) {
  if (kind == PhiKind::tanh) return std::exp(-2.0 * yhat);
  const double f = phi_cubic(yhat);
  return (1.0 - f) / (1.0 + f);
}

enum class FilippovRegion { sliding, crossing, fold };

inline const char* to_string(FilippovRegion r) {
  switch (r) {
    case FilippovRegion::sliding: return "sliding";
    case FilippovRegion::crossing: return "crossing";
    case FilippovRegion::fold: return "fold";
  }
  return "unknown";
}

/// Classification of a point (x, 0) of the switching line for X+ = (1, 2x), X- = (0, 1).
inline FilippovRegion filippov_classify(double x) {
  if (x < 0.0) return FilippovRegion::sliding;
  if (x > 0.0) return FilippovRegion::crossing;
  return FilippovRegion::fold;
}

/// Filippov sliding velocity x' = 1/(1 - 2x) on the sliding segment x < 0.
inline double filippov_sliding_rhs(double x) {
  if (!(x < 0.0)) throw DomainError("sliding vector field is defined only for x < 0");
  return 1.0 / (1.0 - 2.0 * x);
}

/// Piecewise-smooth flow of (X+, X-) with Filippov sliding, up to time t_max.
/// Event indices: 0 = arrival on the switching line, 1 = exit at the fold.
inline Trajectory pws_flow(double x0, double y0, double t_max, const IntegratorConfig& cfg = {}) {
  if (!(t_max > 0.0)) throw UsageError("pws_flow requires t_max > 0");
  const OdeSystem plus{"pws.plus", {"x", "y"}, {}, [](const State& s) { return make_state({1.0, 2.0 * s[0]}); }, {}};
  const OdeSystem minus{"pws.minus", {"x", "y"}, {}, [](const State&) { return make_state({0.0, 1.0}); }, {}};
  const OdeSystem slide{"pws.sliding", {"x", "y"}, {},
                        [](const State& s) { return make_state({1.0 / (1.0 - 2.0 * std::min(s[0], 0.0)), 0.0}); },
                        {}};
  enum class Mode { plus, minus, sliding };

  Trajectory out;
  double t = 0.0;
  State s = make_state({x0, y0});
  out.times.push_back(t);
  out.states.push_back(s);
  Mode mode = y0 > 0.0 ? Mode::plus : (y0 < 0.0 ? Mode::minus : (x0 < 0.0 ? Mode::sliding : Mode::plus));

  auto append = [&](const Trajectory& piece) {
    for (std::size_t i = 1; i < piece.times.size(); ++i) {
      out.times.push_back(piece.times[i]);
      out.states.push_back(piece.states[i]);
    }
    out.steps += piece.steps;
    out.rejected += piece.rejected;
    out.rhs_evals += piece.rhs_evals;
  };

  for (int leg = 0; leg < 64 && t < t_max; ++leg) {
    Trajectory piece;
    if (mode == Mode::minus) {
      piece = integrate(minus, s, {t, t_max}, cfg, {coordinate_event(1, 0.0, Direction::rising)});
    } else if (mode == Mode::plus) {
      piece = integrate(plus, s, {t, t_max}, cfg, {coordinate_event(1, 0.0, Direction::falling)});
    } else {
      piece = integrate(slide, s, {t, t_max}, cfg, {coordinate_event(0, 0.0, Direction::rising)});
    }
    append(piece);
    if (!piece.ok()) {
      out.status = piece.status;
      out.message = piece.message;
      return out;
    }
    t = piece.final_time();
    s = piece.final_state();
    if (piece.status != Status::terminated_by_event) break;
    if (mode == Mode::sliding) {
      s = make_state({0.0, 0.0});
      out.states.back() = s;
      out.events.push_back({1, t, s});
      mode = Mode::plus;
    } else {
      s[1] = 0.0;
      out.states.back() = s;
      out.events.push_back({0, t, s});
      mode = filippov_classify(s[0]) == FilippovRegion::sliding ? Mode::sliding : Mode::plus;
    }
  }
  out.status = Status::completed;
  return out;
}

/// Slow-fast form in slow time: x' = (1+phi)/2, eps yhat' = x(1+phi) + (1-phi)/2.
inline OdeSystem pws_slowfast(const PwsParams& p) {
  const PhiKind k = p.phi_kind;
  const double eps = p.eps;
  return {"pws.slowfast", {"x", "yhat"}, {{"eps", eps}},
          [=](const State& s) {
            const double f = phi(k, s[1]);
            return make_state({0.5 * (1.0 + f), (s[0] * (1.0 + f) + 0.5 * (1.0 - f)) / eps});
          },
          {}};
}

/// Regularized system with time divided by (1+phi)/2:
/// x' = eps, y' = eps (2x + (1-phi(y/eps))/(1+phi(y/eps))).
inline OdeSystem regularized_xy(const PwsParams& p) {
  const PhiKind k = p.phi_kind;
  const double eps = p.eps;
  if (!(eps > 0.0)) throw UsageError("regularized system requires eps > 0");
  Guard guard;
  if (k == PhiKind::cst_cubic)
    guard = [eps](const State& s) { return s[1] / eps > -1.0; };
  else
    guard = [eps](const State& s) { return s[1] / eps > -300.0; };
  return {k == PhiKind::tanh ? "tanh.xy" : "cst.xy", {"x", "y"}, {{"eps", eps}},
          [=](const State& s) { return make_state({eps, eps * (2.0 * s[0] + phi_ratio(k, s[1] / eps))}); },
          guard};
}

/// tanh case in the fast variable yhat = y/eps: x' = eps, yhat' = 2x + e^{-2 yhat}.
inline OdeSystem tanh_hat(double eps) {
  return {"tanh.hat", {"x", "yhat"}, {{"eps", eps}},
          [=](const State& s) { return make_state({eps, 2.0 * s[0] + std::exp(-2.0 * s[1])}); },
          [](const State& s) { return s[1] > -300.0; }};
}

/// Chart ybar = 1 of the tanh regularization: eps = epshat * y.
inline OdeSystem tanh_bary() {
  return {"tanh.bary", {"x", "y", "eps_hat"}, {},
          [](const State& s) {
            const double eh = s[2];
            const double w = 2.0 * s[0] + flat_exp(2.0, eh);
            return make_state({eh * s[1], eh * s[1] * w, -eh * eh * w});
          },
          [](const State& s) { return s[1] >= 0.0 && s[2] >= 0.0; }};
}

/// C_ST case near yhat = 1 in ytilde = yhat - 1, evaluated exactly for the cubic:
/// x' = eps, ytilde' = 2x + (1-phi)/(1+phi).
inline OdeSystem cst_expanded(double eps) {
  return {"cst.expanded", {"x", "ytilde"}, {{"eps", eps}},
          [=](const State& s) { return make_state({eps, 2.0 * s[0] + phi_ratio(PhiKind::cst_cubic, 1.0 + s[1])}); },
          [](const State& s) { return s[1] > -2.0; }};
}

/// Critical manifold of the layer problem in yhat: phi(yhat*) = (1+2x)/(1-2x), x < 0.
inline double critical_yhat(PhiKind kind, double x) {
  if (!(x < 0.0)) throw DomainError("critical manifold exists only over x < 0");
  const double target = (1.0 + 2.0 * x) / (1.0 - 2.0 * x);
  if (kind == PhiKind::tanh) return std::atanh(target);
  double lo = -1.0, hi = 1.0;
  for (int i = 0; i < 200 && hi - lo > 0.0; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    (phi_cubic(mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// tanh charts of the blowup x = r xbar, eps = r^2 epsbar, q = r qbar of the
// extended system (x, eps_hat, q, eps).

inline OdeSystem tanh_kappa1() {
  return {"tanh.kappa1", {"r1", "x1", "eps_hat", "eps1"}, {},
          [](const State& s) {
            const double r1 = s[0], x1 = s[1], eh = s[2], e1 = s[3];
            const double w = 2.0 * x1 + 1.0;
            return make_state({-2.0 * r1 * w, e1 + 2.0 * x1 * w, -eh * eh * w, 4.0 * e1 * w});
          },
          [](const State& s) { return s[0] >= 0.0 && s[2] >= 0.0 && s[3] >= 0.0; }};
}

/// Scaling chart; r2 = sqrt(eps) is constant and carried as a coordinate.
inline OdeSystem tanh_kappa2() {
  return {"tanh.kappa2", {"x2", "eps_hat", "q2", "r2"}, {},
          [](const State& s) {
            const double x2 = s[0], eh = s[1], q2 = s[2];
            const double w = 2.0 * x2 + q2;
            return make_state({1.0, -eh * eh * w, -2.0 * q2 * w, 0.0});
          },
          [](const State& s) { return s[1] >= 0.0 && s[2] >= 0.0 && s[3] >= 0.0; }};
}

/// Exit chart xbar = 1. The q3 equation carries a single factor q3.
inline OdeSystem tanh_kappa3() {
  return {"tanh.kappa3", {"r3", "eps_hat", "q3", "eps3"}, {},
          [](const State& s) {
            const double r3 = s[0], eh = s[1], q3 = s[2], e3 = s[3];
            return make_state({r3 * e3, -eh * eh * (2.0 + q3), -q3 * (2.0 * (2.0 + q3) + e3), -2.0 * e3 * e3});
          },
          [](const State& s) { return s[0] >= 0.0 && s[1] >= 0.0 && s[2] >= 0.0 && s[3] >= 0.0; }};
}

/// Reduced flow on the attracting center manifold of chart kappa1.
inline OdeSystem tanh_kappa1_reduced() {
  return {"tanh.kappa1.reduced", {"r1", "eps_hat", "eps1"}, {},
          [](const State& s) { return make_state({-2.0 * s[0], -s[1] * s[1], 4.0 * s[2]}); }, {}};
}

/// Chart kappa3 after straightening the stable fibers (eps_breve replaces eps_hat).
inline OdeSystem tanh_kappa3_reduced() {
  return {"tanh.kappa3.reduced", {"r3", "eps_breve", "q3", "eps3"}, {},
          [](const State& s) {
            const double r3 = s[0], eb = s[1], q3 = s[2], e3 = s[3];
            return make_state({r3 * e3, -2.0 * eb * eb, -q3 * (2.0 * (2.0 + q3) + e3), -2.0 * e3 * e3});
          },
          {}};
}

// ------------------------------------------------------------- aircraft --

struct AircraftParams {
  double a = 1.0;
  double b = 0.5;
  double alpha = -1.0;
  double eps = 0.0;

  void validate() const {
    if (!(b > 0.0)) throw UsageError("aircraft model requires b > 0");
    if (eps < 0.0) throw UsageError("aircraft model requires eps >= 0");
  }
  double v_f() const { return a - 1.0 / b; }
  double u_f() const { return std::exp((a - 1.0 / b) * b) / b; }
  /// Fold in the chart at infinity; requires v_f < 0.
  double y_f() const {
    if (!(v_f() < 0.0)) throw DomainError("the fold is visible at infinity only when v_f = a - 1/b < 0");
    return -1.0 / v_f();
  }
  double x_f() const { return u_f() * y_f(); }
  /// Flat eigenvalue function (1 + a y) e^{-b/y}.
  double lambda(double y) const { return (1.0 + a * y) * flat_exp(b, y); }
};

/// u' = -eps (alpha - v), v' = -u - (v - a) e^{v b}.
inline OdeSystem aircraft_model01(const AircraftParams& p) {
  p.validate();
  const double a = p.a, b = p.b, al = p.alpha, eps = p.eps;
  return {"aircraft.model01", {"u", "v"}, {{"a", a}, {"b", b}, {"alpha", al}, {"eps", eps}},
          [=](const State& s) { return make_state({-eps * (al - s[1]), -s[0] - (s[1] - a) * std::exp(s[1] * b)}); },
          [](const State& s) { return s[1] < 700.0; }};
}

/// Time-reversed model.
inline OdeSystem aircraft_model0(const AircraftParams& p) {
  p.validate();
  const double a = p.a, b = p.b, al = p.alpha, eps = p.eps;
  return {"aircraft.model0", {"u", "v"}, {{"a", a}, {"b", b}, {"alpha", al}, {"eps", eps}},
          [=](const State& s) { return make_state({eps * (al - s[1]), s[0] + (s[1] - a) * std::exp(s[1] * b)}); },
          [](const State& s) { return s[1] < 700.0; }};
}

/// (x, y) = (-u/v, -1/v) of the reversed model, time multiplied by y.
inline OdeSystem aircraft_infty(const AircraftParams& p) {
  p.validate();
  const AircraftParams q = p;
  return {"aircraft.infty", {"x", "y", "eps"}, {{"a", p.a}, {"b", p.b}, {"alpha", p.alpha}},
          [=](const State& s) {
            const double x = s[0], y = s[1], eps = s[2];
            const double d = x - q.lambda(y);
            return make_state({y * (eps * (1.0 + q.alpha * y) + x * d), y * y * d, 0.0});
          },
          [](const State& s) { return s[1] >= 0.0 && s[2] >= 0.0; }};
}

inline State aircraft_uv_to_xy(const State& uv) {
  if (!(uv[1] < 0.0)) throw DomainError("the chart at infinity needs v < 0");
  return make_state({-uv[0] / uv[1], -1.0 / uv[1]});
}

inline State aircraft_xy_to_uv(const State& xy) {
  if (!(xy[1] > 0.0)) throw DomainError("the chart at infinity needs y > 0");
  return make_state({xy[0] / xy[1], -1.0 / xy[1]});
}

namespace detail {
inline double aircraft_B(double a, double b, double y) { return b + a * y * y / (1.0 + a * y); }
}  // namespace detail

/// Extended system with q = (1 + a y) e^{-b/y}; guard 1 + a y > 0.
inline OdeSystem aircraft_q(const AircraftParams& p) {
  p.validate();
  const double a = p.a, b = p.b, al = p.alpha;
  return {"aircraft.q", {"x", "y", "q", "eps"}, {{"a", a}, {"b", b}, {"alpha", al}},
          [=](const State& s) {
            const double x = s[0], y = s[1], q = s[2], eps = s[3];
            const double d = x - q;
            return make_state({y * (eps * (1.0 + al * y) + x * d), y * y * d, q * d * detail::aircraft_B(a, b, y), 0.0});
          },
          [=](const State& s) { return s[1] >= 0.0 && 1.0 + a * s[1] > 0.0 && s[3] >= 0.0; }};
}

/// Scaling chart epsbar = 1 (x = r2 x2, q = r2 q2, eps = r2^2), divided by r2.
inline OdeSystem aircraft_q2(const AircraftParams& p) {
  p.validate();
  const double a = p.a, b = p.b, al = p.alpha;
  return {"aircraft.q2", {"x2", "y", "q2"}, {{"a", a}, {"b", b}, {"alpha", al}},
          [=](const State& s) {
            const double x2 = s[0], y = s[1], q2 = s[2];
            const double d = x2 - q2;
            return make_state({y * ((1.0 + al * y) + x2 * d), y * y * d, q2 * d * detail::aircraft_B(a, b, y)});
          },
          [=](const State& s) { return s[1] >= 0.0 && 1.0 + a * s[1] > 0.0; }};
}

/// The scaling chart with the constant r2 carried as a fourth coordinate.
inline OdeSystem aircraft_q2_with_radius(const AircraftParams& p) {
  const OdeSystem base = aircraft_q2(p);
  OdeSystem s = base;
  s.name = "aircraft.q2r";
  s.vars = {"x2", "y", "q2", "r2"};
  s.rhs = [f = base.rhs](const State& x) {
    const State v = f(x.head(3));
    return make_state({v[0], v[1], v[2], 0.0});
  };
  s.domain_guard = [g = base.domain_guard](const State& x) { return x[3] >= 0.0 && g(x.head(3)); };
  return s;
}

// Charts of the blowup x = rho xbar, y = rho^2 ybar, q = rho qbar of the
// scaling-chart system (x, y, q), each divided by rho.

inline OdeSystem aircraft_kappa1(const AircraftParams& p) {
  p.validate();
  const double a = p.a, b = p.b, al = p.alpha;
  return {"aircraft.kappa1", {"rho1", "x1", "y1"}, {{"a", a}, {"b", b}, {"alpha", al}},
          [=](const State& s) {
            const double r = s[0], x1 = s[1], y1 = s[2];
            const double r2 = r * r;
            const double B = b + a * r2 * r2 * y1 * y1 / (1.0 + a * r2 * y1);
            return make_state({r * (x1 - 1.0) * B,
                               y1 * (1.0 + al * r2 * y1 + r2 * x1 * (x1 - 1.0)) - x1 * (x1 - 1.0) * B,
                               -y1 * (x1 - 1.0) * (2.0 * B - y1 * r2)});
          },
          [=](const State& s) { return s[0] >= 0.0 && 1.0 + a * s[0] * s[0] * s[2] > 0.0; }};
}

inline OdeSystem aircraft_kappa2(const AircraftParams& p) {
  p.validate();
  const double a = p.a, b = p.b, al = p.alpha;
  return {"aircraft.kappa2", {"rho2", "y2", "q2"}, {{"a", a}, {"b", b}, {"alpha", al}},
          [=](const State& s) {
            const double r = s[0], y2 = s[1], q2 = s[2];
            const double r2 = r * r;
            const double A = 1.0 + al * r2 * y2 + r2 * (1.0 + q2);
            const double B = b + a * r2 * r2 * y2 * y2 / (1.0 + a * r2 * y2);
            return make_state({-r * y2 * A, y2 * y2 * (2.0 * A - r2 * (1.0 + q2)), -q2 * ((1.0 + q2) * B - y2 * A)});
          },
          [=](const State& s) { return s[0] >= 0.0 && 1.0 + a * s[0] * s[0] * s[1] > 0.0; }};
}

/// Chart ybar = 1 (y = rho3^2), full form including rho3 > 0.
inline OdeSystem aircraft_kappa3(const AircraftParams& p) {
  p.validate();
  const double a = p.a, b = p.b, al = p.alpha;
  return {"aircraft.kappa3", {"rho3", "x3", "q3"}, {{"a", a}, {"b", b}, {"alpha", al}},
          [=](const State& s) {
            const double r = s[0], x3 = s[1], q3 = s[2];
            const double r2 = r * r;
            const double d = x3 - q3;
            const double B = detail::aircraft_B(a, b, r2);
            return make_state({0.5 * r2 * r * d, 1.0 + al * r2 + 0.5 * r2 * x3 * d, q3 * d * (B - 0.5 * r2)});
          },
          [=](const State& s) { return s[0] >= 0.0 && 1.0 + a * s[0] * s[0] > 0.0; }};
}

/// Chart xbar = 1. The q4 equation carries the factor b + a y^2/(1 + a y).
inline OdeSystem aircraft_kappa4(const AircraftParams& p) {
  p.validate();
  const double a = p.a, b = p.b, al = p.alpha;
  return {"aircraft.kappa4", {"rho4", "y4", "q4"}, {{"a", a}, {"b", b}, {"alpha", al}},
          [=](const State& s) {
            const double r = s[0], y4 = s[1], q4 = s[2];
            const double r2 = r * r;
            const double A = 1.0 + al * r2 * y4 + r2 * (1.0 - q4);
            const double B = b + a * r2 * r2 * y4 * y4 / (1.0 + a * r2 * y4);
            return make_state({r * y4 * A, -y4 * y4 * (2.0 * A - r2 * (1.0 - q4)), q4 * ((1.0 - q4) * B - y4 * A)});
          },
          [=](const State& s) { return s[0] >= 0.0 && 1.0 + a * s[0] * s[0] * s[1] > 0.0; }};
}

/// Displayed eigenvalue along C with the sign convention printed next to the model.
inline double aircraft_eigenvalue_displayed(const AircraftParams& p, double v) {
  return -(p.b * (v - p.a) - 1.0) * std::exp(v * p.b);
}

// ---------------------------------------------------- eigenvalues on C --

/// Nontrivial layer eigenvalue at a point of the model's critical manifold.
/// Supported: kuehn.original (u,v), kuehn.flat (x,y), tanh.bary (x, eps_hat),
/// aircraft.model01 (u,v), aircraft.infty (x,y).
inline double eigenvalue_along_manifold(const std::string& model, const State& point, const KuehnParams& kp = {},
                                        const AircraftParams& ap = {}) {
  auto require_on = [&](double residual) {
    if (!(std::abs(residual) <= 1e-10))
      throw DomainError("point is not on the critical manifold of '" + model + "' (residual " +
                        std::to_string(residual) + ")");
  };
  if (model == "kuehn.original") {
    const double u = point[0], v = point[1];
    require_on(u - std::pow(v, -kp.n));
    return -kp.n * std::pow(v, kp.n - 1) * u;
  }
  if (model == "kuehn.flat") {
    const double x = point[0], y = point[1];
    require_on(x - flat_exp(1.0, y));
    return -flat_exp(1.0, y);
  }
  if (model == "tanh.bary") {
    const double x = point[0], eh = point[1];
    require_on(x + 0.5 * flat_exp(2.0, eh));
    return -2.0 * flat_exp(2.0, eh);
  }
  if (model == "aircraft.model01") {
    const double u = point[0], v = point[1];
    require_on(u - (ap.a - v) * std::exp(v * ap.b));
    return -(1.0 + ap.b * (v - ap.a)) * std::exp(v * ap.b);
  }
  if (model == "aircraft.infty") {
    const double x = point[0], y = point[1];
    require_on(x - ap.lambda(y));
    return -ap.b * flat_exp(ap.b, y) * (1.0 + (ap.a - 1.0 / ap.b) * y);
  }
  throw UsageError("no eigenvalue formula for model '" + model + "'");
}

}  // namespace flatblow
