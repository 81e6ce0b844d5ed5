#pragma once

// Section-to-section transition maps, contraction fits, the entry-exit
// return map of the aircraft scaling chart, canard bisection and
// slow-manifold seeds.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "flatblow/asymptotics.hpp"
#include "flatblow/errors.hpp"
#include "flatblow/odecore.hpp"
#include "flatblow/parallel.hpp"
#include "flatblow/systems.hpp"

namespace flatblow {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct SectionMapResult {
  std::vector<double> inputs;
  std::vector<State> outputs;  // empty state on failure
  std::vector<double> transit_times;
  std::vector<bool> ok;
  std::vector<std::string> failures;
  int exit_coordinate = 0;
  double contraction_estimate = kNaN;
  bool contraction_defined = false;

  std::size_t succeeded() const { return static_cast<std::size_t>(std::count(ok.begin(), ok.end(), true)); }

  /// max - min of the exit coordinate over the successful inputs.
  double exit_spread() const {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t i = 0; i < outputs.size(); ++i) {
      if (!ok[i]) continue;
      lo = std::min(lo, outputs[i][exit_coordinate]);
      hi = std::max(hi, outputs[i][exit_coordinate]);
    }
    return hi >= lo ? hi - lo : kNaN;
  }
};

/// One Newton step along the flow onto {g = 0}; removes the residual left by
/// the event tolerance before exit coordinates are compared.
inline State project_to_section(const OdeSystem& system, const EventSpec& section, const State& s) {
  const State f = system(s);
  const double fn = f.norm();
  if (!(fn > 0.0)) return s;
  const double g0 = section.g(s);
  if (g0 == 0.0) return s;
  const double h = 1e-7 / fn;
  const double dg = (section.g(s + h * f) - section.g(s - h * f)) / (2.0 * h);
  if (!(std::abs(dg) > 0.0) || !std::isfinite(dg)) return s;
  const State p = s - (g0 / dg) * f;
  return system.admissible(p) && std::abs(section.g(p)) <= std::abs(g0) ? p : s;
}

/// Pushes every entry point entry(input) forward to the first crossing of
/// `exit`. Failures are flagged per input.
inline SectionMapResult transition_map(const OdeSystem& system, const std::function<State(double)>& entry,
                                       const EventSpec& exit, int exit_coordinate,
                                       const std::vector<double>& inputs, double t_max,
                                       const IntegratorConfig& cfg = {}) {
  if (exit_coordinate < 0 || exit_coordinate >= system.dim()) throw UsageError("exit coordinate out of range");
  IntegratorConfig c = cfg;
  c.record_steps = false;
  EventSpec ev = exit;
  ev.terminal = true;
  struct One {
    State out;
    double t = kNaN;
    bool ok = false;
    std::string why;
  };
  const auto runs = parallel_map(inputs.size(), [&](std::size_t i) {
    One r;
    try {
      const State x0 = entry(inputs[i]);
      const Trajectory tr = integrate(system, x0, {0.0, t_max}, c, {ev});
      if (tr.status == Status::terminated_by_event) {
        r.out = project_to_section(system, ev, tr.final_state());
        r.t = tr.final_time();
        r.ok = true;
      } else {
        r.why = tr.status == Status::completed ? "exit section not reached before t_max" : tr.message;
      }
    } catch (const Error& e) {
      r.why = e.what();
    }
    return r;
  });
  SectionMapResult res;
  res.inputs = inputs;
  res.exit_coordinate = exit_coordinate;
  for (const auto& r : runs) {
    res.outputs.push_back(r.out);
    res.transit_times.push_back(r.t);
    res.ok.push_back(r.ok);
    res.failures.push_back(r.why);
  }
  // divided difference between the extreme successful inputs
  int lo = -1, hi = -1;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (!res.ok[i]) continue;
    const int ii = static_cast<int>(i);
    if (lo < 0 || inputs[i] < inputs[static_cast<std::size_t>(lo)]) lo = ii;
    if (hi < 0 || inputs[i] > inputs[static_cast<std::size_t>(hi)]) hi = ii;
  }
  if (lo >= 0 && hi >= 0 && inputs[static_cast<std::size_t>(hi)] > inputs[static_cast<std::size_t>(lo)]) {
    const auto l = static_cast<std::size_t>(lo), h = static_cast<std::size_t>(hi);
    res.contraction_estimate =
        (res.outputs[h][exit_coordinate] - res.outputs[l][exit_coordinate]) / (inputs[h] - inputs[l]);
    res.contraction_defined = true;
  }
  return res;
}

struct ScalingFit {
  double slope = kNaN;
  double intercept = kNaN;
  double r2 = kNaN;
  std::vector<std::pair<double, double>> used;  // (eps, spread)
  std::vector<std::string> warnings;
};

/// Least-squares line through (xs, ys) with coefficient of determination.
inline ScalingFit linear_fit(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size() || xs.size() < 2) throw UsageError("linear fit needs at least two points");
  const double n = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (!(sxx > 0.0)) throw UsageError("linear fit needs distinct abscissae");
  ScalingFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r2 = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
  return f;
}

inline constexpr double kSpreadUnderflow = 1e-280;

/// Fits ln(spread) against 1/eps. Spreads below 1e-280 (or non-finite) are
/// dropped with a warning; at least three usable points are required.
inline ScalingFit contraction_scaling(const std::vector<std::pair<double, double>>& eps_spread) {
  std::vector<double> xs, ys;
  std::vector<std::string> warnings;
  std::vector<std::pair<double, double>> used;
  for (const auto& [eps, spread] : eps_spread) {
    if (!(eps > 0.0)) throw UsageError("contraction_scaling needs eps > 0");
    if (!(spread >= kSpreadUnderflow) || !std::isfinite(spread)) {
      warnings.push_back("eps = " + std::to_string(eps) + " dropped: spread below underflow threshold");
      continue;
    }
    xs.push_back(1.0 / eps);
    ys.push_back(std::log(spread));
    used.emplace_back(eps, spread);
  }
  if (xs.size() < 3) throw DomainError("contraction_scaling needs at least three eps values above underflow");
  ScalingFit f = linear_fit(xs, ys);
  f.used = std::move(used);
  f.warnings = std::move(warnings);
  return f;
}

/// Runs `spread_at(eps)` over a ladder (concurrently) and fits the result.
inline ScalingFit contraction_scaling(const std::vector<double>& eps_list,
                                      const std::function<double(double)>& spread_at) {
  const auto spreads = parallel_map(eps_list.size(), [&](std::size_t i) { return spread_at(eps_list[i]); });
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < eps_list.size(); ++i) pts.emplace_back(eps_list[i], spreads[i]);
  return contraction_scaling(pts);
}

// ------------------------------------------------------------ entry-exit --

struct EntryExitResult {
  double x2_plus = kNaN;
  double transit_time = kNaN;
  bool ok = false;
  std::string message;
};

/// First return of (x2_in, y0, 1/mu) to {q2 = 1/mu} with q2 increasing under
/// the aircraft scaling-chart flow.
inline EntryExitResult entry_exit_map(const AircraftParams& params, double y0, double x2_in, double mu_inv = 0.5,
                                      const IntegratorConfig& cfg = {}, double t_max = 1e7) {
  if (!(y0 > 0.0)) throw DomainError("entry_exit_map needs y0 > 0");
  if (!(x2_in < 0.0)) throw DomainError("entry_exit_map needs x2_in < 0");
  if (!(mu_inv > 0.0)) throw DomainError("entry_exit_map needs a positive section level");
  const OdeSystem sys = aircraft_q2(params);
  IntegratorConfig c = cfg;
  c.record_steps = false;
  EventSpec ev = coordinate_event(2, mu_inv, Direction::rising, true, 1e-13);
  const Trajectory tr = integrate(sys, make_state({x2_in, y0, mu_inv}), {0.0, t_max}, c, {ev});
  EntryExitResult r;
  if (tr.status != Status::terminated_by_event) {
    r.message = tr.status == Status::completed ? "no return to the section" : tr.message;
    return r;
  }
  const State s = project_to_section(sys, ev, tr.final_state());
  r.x2_plus = s[0];
  r.transit_time = tr.final_time();
  r.ok = true;
  return r;
}

// ---------------------------------------------------------------- canard --

enum class CanardClass { no_head, head };

inline const char* to_string(CanardClass c) { return c == CanardClass::head ? "head" : "no_head"; }

struct CanardClassifier {
  double delta_v = 5.0;          // escape depth below v_f
  double horizon_factor = 10.0;  // horizon = horizon_factor / eps
  double upstream_dv = 1.0;      // start at v_f + upstream_dv on the critical manifold
  IntegratorConfig integrator = [] {
    IntegratorConfig c;
    c.rel_tol = 1e-12;
    c.abs_tol = 1e-13;
    c.record_steps = false;
    return c;
  }();
};

/// Classifies the forward orbit of the original aircraft model started on the
/// attracting branch upstream of the fold: `head` if v drops below
/// v_f - delta_v before u returns above u_f after the fold passage. The
/// return is armed once u has started to decrease (v below alpha), so the
/// overshoot of u past u_f at the fold itself is not mistaken for a return.
inline CanardClass classify_canard(const AircraftParams& p, const CanardClassifier& cl = {}) {
  if (!(p.eps > 0.0)) throw DomainError("canard classification needs eps > 0");
  const OdeSystem sys = aircraft_model01(p);
  const double vf = p.v_f(), uf = p.u_f();
  const double v0 = vf + cl.upstream_dv;
  const double u0 = (p.a - v0) * std::exp(v0 * p.b);
  const double horizon = cl.horizon_factor / p.eps;
  const EventSpec escape = coordinate_event(1, vf - cl.delta_v, Direction::falling);
  double t = 0.0;
  State x = make_state({u0, v0});
  auto stage = [&](std::vector<EventSpec> evs) -> int {
    const Trajectory tr = integrate(sys, x, {t, horizon}, cl.integrator, evs);
    if (tr.status == Status::completed) return -1;
    if (!tr.ok()) {
      // blow-up towards v = -infinity counts as escape
      if (tr.final_state()[1] < vf) return 0;
      throw OracleFailure("canard classifier: " + tr.message);
    }
    t = tr.final_time();
    x = tr.final_state();
    for (const auto& e : tr.events)
      if (e.index == 0) return 0;
    return static_cast<int>(tr.events.back().index);
  };
  // fold passage, then the turn of u (v below alpha), then escape or return
  int hit = stage({escape, coordinate_event(1, vf, Direction::falling)});
  if (hit < 0) return CanardClass::no_head;
  if (hit == 0) return CanardClass::head;
  hit = stage({escape, coordinate_event(1, std::min(p.alpha, vf), Direction::falling)});
  if (hit < 0) return CanardClass::no_head;
  if (hit == 0) return CanardClass::head;
  hit = stage({escape, coordinate_event(0, uf, Direction::rising)});
  return hit == 0 ? CanardClass::head : CanardClass::no_head;
}

struct CanardResult {
  double alpha_lo = kNaN;
  double alpha_hi = kNaN;
  double alpha_c = kNaN;
  double width = kNaN;
  int iterations = 0;
  CanardClass class_lo = CanardClass::head;
  CanardClass class_hi = CanardClass::no_head;
  std::vector<std::pair<double, CanardClass>> classifier_log;
};

/// Bisects alpha between two ends of different class until the midpoint is
/// no longer representable between them or max_iter is reached. The ends may
/// be given in either order.
inline CanardResult canard_bisect(const AircraftParams& params, double alpha_a, double alpha_b, int max_iter = 200,
                                  const CanardClassifier& cl = {}) {
  if (!(alpha_a != alpha_b)) throw UsageError("canard bracket needs two distinct ends");
  CanardResult res;
  auto classify = [&](double alpha) {
    AircraftParams p = params;
    p.alpha = alpha;
    const CanardClass c = classify_canard(p, cl);
    res.classifier_log.emplace_back(alpha, c);
    return c;
  };
  double a = alpha_a, b = alpha_b;
  const CanardClass ca = classify(a), cb = classify(b);
  if (ca == cb)
    throw BracketError(std::string("both bracket ends classify as ") + to_string(ca));
  for (int it = 0; it < max_iter; ++it) {
    const double mid = 0.5 * (a + b);
    if (mid == a || mid == b) break;
    (classify(mid) == ca ? a : b) = mid;
    res.iterations = it + 1;
  }
  res.alpha_lo = std::min(a, b);
  res.alpha_hi = std::max(a, b);
  res.class_lo = a < b ? ca : cb;
  res.class_hi = a < b ? cb : ca;
  res.alpha_c = 0.5 * (a + b);
  res.width = res.alpha_hi - res.alpha_lo;
  return res;
}

/// Width of the alpha window in which the escape depth of the canard orbit
/// grows from delta_v_shallow to delta_v_deep: the distance between the two
/// bisected transition values, floored at the spacing of doubles near them.
inline double canard_window_width(const AircraftParams& params, double alpha_a, double alpha_b,
                                  double delta_v_shallow = 3.0, double delta_v_deep = 8.0, int max_iter = 200,
                                  CanardClassifier cl = {}) {
  cl.delta_v = delta_v_shallow;
  const CanardResult s = canard_bisect(params, alpha_a, alpha_b, max_iter, cl);
  cl.delta_v = delta_v_deep;
  const CanardResult d = canard_bisect(params, alpha_a, alpha_b, max_iter, cl);
  const double floor = std::max(s.width, d.width);
  return std::max(std::abs(s.alpha_c - d.alpha_c), floor);
}

// ------------------------------------------------------------ seeds --

struct SeedResult {
  State seed;     // first-order slow-manifold point
  State settled;  // after relaxation onto the seed section
  double settle_time = 0.0;
};

namespace detail {
inline IntegratorConfig seed_config() {
  IntegratorConfig c;
  c.rel_tol = 1e-12;
  c.abs_tol = 1e-14;
  c.record_steps = false;
  return c;
}
}  // namespace detail

/// x_xi(eps) = -1/2 e^{-2/xi} + eps/2 e^{2/xi}: first-order slow-manifold
/// abscissa of the tanh regularization on {yhat = 1/xi}.
inline double tanh_seed_x(double xi, double eps) {
  if (!(xi > 0.0)) throw DomainError("tanh seed needs xi > 0");
  return -0.5 * std::exp(-2.0 / xi) + 0.5 * eps * std::exp(2.0 / xi);
}

/// Slow-manifold point of tanh.hat (x, yhat) on {yhat = 1/xi}. The orbit is
/// started on the critical manifold a fixed slow time upstream and relaxed
/// onto the section; for eps = 0 the critical point is returned after
/// checking it is stationary.
inline SeedResult tanh_slow_manifold_seed(double xi, double eps, double settle_time = 2.0) {
  if (!(eps >= 0.0)) throw DomainError("tanh seed needs eps >= 0");
  const double yhat = 1.0 / xi;
  SeedResult r;
  r.seed = make_state({tanh_seed_x(xi, eps), yhat});
  r.settle_time = settle_time;
  const auto cfg = detail::seed_config();
  if (eps == 0.0) {
    const Trajectory tr = integrate(tanh_hat(0.0), r.seed, {0.0, settle_time}, cfg);
    if (!tr.ok()) throw OracleFailure("seed settling failed: " + tr.message);
    r.settled = tr.final_state();
    return r;
  }
  // start below both the seed and the critical point of the section
  const double x_up = std::min(r.seed[0], -0.5 * std::exp(-2.0 * yhat)) - eps * settle_time;
  const State start = make_state({x_up, critical_yhat(PhiKind::tanh, x_up)});
  const Trajectory tr = integrate(tanh_hat(eps), start, {0.0, 10.0 * settle_time}, cfg,
                                  {coordinate_event(1, yhat, Direction::rising, true, 1e-14)});
  if (tr.status != Status::terminated_by_event) throw OracleFailure("seed settling diverged: section not reached");
  r.settled = tr.final_state();
  return r;
}

/// Center-manifold point of the Kuehn entry chart (r1, x1, y, eps1) at eps1,
/// relaxed from eps1 + settle_span downstream to the section {eps1}.
inline SeedResult kuehn_kappa1_seed(double mu, double eps1, double r1 = 1.0, double y = 0.0,
                                    double settle_span = 0.05,
                                    KuehnManifoldForm form = KuehnManifoldForm::invariant) {
  if (!(eps1 > 0.0)) throw DomainError("kappa1 seed needs eps1 > 0");
  if (!(mu > 0.0)) throw DomainError("kappa1 seed needs mu > 0 so that eps1 decreases");
  SeedResult r;
  r.seed = make_state({r1, kuehn_predictions(mu, eps1, 2, form).center_manifold_x1.value, y, eps1});
  const double e_up = eps1 + settle_span;
  const State start = make_state({r1, kuehn_predictions(mu, e_up, 2, form).center_manifold_x1.value, y, e_up});
  KuehnParams kp;
  kp.mu = mu;
  const Trajectory tr = integrate(kuehn_kappa1(kp), start, {0.0, 1e6}, detail::seed_config(),
                                  {coordinate_event(3, eps1, Direction::falling, true, 1e-15)});
  if (tr.status != Status::terminated_by_event) throw OracleFailure("seed settling diverged: section not reached");
  r.settled = tr.final_state();
  r.settle_time = tr.final_time();
  return r;
}

/// x_{y_f}(eps): the slow manifold S_eps of the aircraft model at infinity on
/// {y = y_f}, relaxed from the critical manifold at y = start_fraction * y_f.
inline SeedResult aircraft_slow_manifold_seed(const AircraftParams& p, double start_fraction = 0.6) {
  const double yf = p.y_f();
  SeedResult r;
  r.seed = make_state({p.lambda(yf), yf, p.eps});
  const double y_up = start_fraction * yf;
  const State start = make_state({p.lambda(y_up), y_up, p.eps});
  const Trajectory tr = integrate(aircraft_infty(p), start, {0.0, 1e7}, detail::seed_config(),
                                  {coordinate_event(1, yf, Direction::rising, true, 1e-15)});
  if (tr.status != Status::terminated_by_event) throw OracleFailure("seed settling diverged: section not reached");
  r.settled = tr.final_state();
  r.settle_time = tr.final_time();
  return r;
}

}  // namespace flatblow
