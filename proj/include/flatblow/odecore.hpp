#pragma once

// Adaptive integration of autonomous ODE systems with section (event)
// detection. Two steppers are provided: the Dormand-Prince 5(4) pair for
// non-stiff problems and an L-stable, stiffly accurate SDIRK method of
// order 4 (embedded order 3) for the stiff small-epsilon regimes.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "flatblow/errors.hpp"

namespace flatblow {

using State = Eigen::VectorXd;
using Rhs = std::function<State(const State&)>;
using Guard = std::function<bool(const State&)>;
using ScalarFn = std::function<double(const State&)>;

/// A named autonomous vector field x' = rhs(x).
///
/// `rhs` must be pure: it captures its parameters by value and may be called
/// concurrently from several threads.
struct OdeSystem {
  std::string name;
  std::vector<std::string> vars;
  std::map<std::string, double> params;
  Rhs rhs;
  Guard domain_guard;  // empty means every state is admissible

  int dim() const { return static_cast<int>(vars.size()); }
  State operator()(const State& x) const { return rhs(x); }
  bool admissible(const State& x) const {
    if (x.size() != dim() || !x.allFinite()) return false;
    return !domain_guard || domain_guard(x);
  }
  int index_of(const std::string& var) const {
    const auto it = std::find(vars.begin(), vars.end(), var);
    if (it == vars.end()) throw UsageError("system '" + name + "' has no variable '" + var + "'");
    return static_cast<int>(it - vars.begin());
  }
  double param(const std::string& key) const {
    const auto it = params.find(key);
    if (it == params.end()) throw UsageError("system '" + name + "' has no parameter '" + key + "'");
    return it->second;
  }
};

enum class Method { dopri45, sdirk4 };

inline const char* to_string(Method m) { return m == Method::dopri45 ? "dopri45" : "sdirk4"; }

struct IntegratorConfig {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double max_step = std::numeric_limits<double>::infinity();
  double min_step = 1e-14;
  long max_steps = 2'000'000;
  Method method = Method::dopri45;
  bool record_steps = true;  // false keeps only the first and last sample
  double initial_step = 0.0;  // 0 selects a step automatically

  void validate() const {
    if (!(rel_tol > 0 && rel_tol < 1) || !(abs_tol > 0 && abs_tol < 1))
      throw UsageError("integrator tolerances must lie in (0, 1)");
    if (!(min_step > 0) || !(max_step > 0) || min_step > max_step)
      throw UsageError("integrator step bounds must satisfy 0 < min_step <= max_step");
    if (max_steps <= 0) throw UsageError("max_steps must be positive");
  }
};

enum class Direction { rising, falling, any };

/// A section {g = 0} crossed in the given direction.
struct EventSpec {
  ScalarFn g;
  Direction direction = Direction::any;
  bool terminal = true;
  double tol_event = 1e-12;
  std::string name;
};

struct EventRecord {
  std::size_t index;
  double t;
  State state;
};

enum class Status { completed, terminated_by_event, step_failure, guard_violation };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::completed: return "completed";
    case Status::terminated_by_event: return "terminated_by_event";
    case Status::step_failure: return "step_failure";
    case Status::guard_violation: return "guard_violation";
  }
  return "unknown";
}

struct Trajectory {
  std::vector<double> times;
  std::vector<State> states;
  std::vector<EventRecord> events;
  Status status = Status::completed;
  std::string message;
  long steps = 0;
  long rejected = 0;
  long rhs_evals = 0;

  double final_time() const { return times.back(); }
  const State& final_state() const { return states.back(); }
  bool ok() const { return status == Status::completed || status == Status::terminated_by_event; }
  /// First recorded crossing of event `index`, or nullptr.
  const EventRecord* first_event(std::size_t index) const {
    for (const auto& e : events)
      if (e.index == index) return &e;
    return nullptr;
  }
};

namespace detail {

inline double error_norm(const State& err, const State& y0, const State& y1, const IntegratorConfig& cfg) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < err.size(); ++i) {
    const double sc = cfg.abs_tol + cfg.rel_tol * std::max(std::abs(y0[i]), std::abs(y1[i]));
    const double r = err[i] / sc;
    acc += r * r;
  }
  return std::sqrt(acc / static_cast<double>(std::max<Eigen::Index>(err.size(), 1)));
}

struct StepAttempt {
  State y;
  double err = std::numeric_limits<double>::infinity();
  bool valid = false;  // false: non-finite stage or Newton failure
};

// Counts rhs evaluations; all stepper calls go through here.
struct Evaluator {
  const OdeSystem& sys;
  long count = 0;
  State operator()(const State& x) {
    ++count;
    return sys.rhs(x);
  }
};

class DormandPrince45 {
 public:
  static constexpr int error_order = 5;

  StepAttempt attempt(Evaluator& f, const State& y, const State& k1, double h, const IntegratorConfig& cfg) const {
    static constexpr double a21 = 1.0 / 5.0;
    static constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
    static constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
    static constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                            a54 = -212.0 / 729.0;
    static constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                            a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
    static constexpr double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0, b4 = 125.0 / 192.0,
                            b5 = -2187.0 / 6784.0, b6 = 11.0 / 84.0;
    static constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                            e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;

    StepAttempt out;
    const State k2 = f(y + h * a21 * k1);
    const State k3 = f(y + h * (a31 * k1 + a32 * k2));
    const State k4 = f(y + h * (a41 * k1 + a42 * k2 + a43 * k3));
    const State k5 = f(y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    const State k6 = f(y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    out.y = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    const State k7 = f(out.y);
    if (!out.y.allFinite() || !k7.allFinite()) return out;
    const State err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    out.err = error_norm(err, y, out.y, cfg);
    out.valid = std::isfinite(out.err);
    return out;
  }
};

// Hairer & Wanner's L-stable SDIRK method of order 4, gamma = 1/4, with an
// embedded order-3 solution. Stage equations are solved by simplified Newton
// iteration with a finite-difference Jacobian taken at the step start.
class Sdirk4 {
 public:
  static constexpr int error_order = 4;
  static constexpr int stages = 5;
  static constexpr double gamma = 0.25;

  StepAttempt attempt(Evaluator& f, const State& y, const State& fy, double h, const IntegratorConfig& cfg) const {
    static constexpr double A[stages][stages] = {
        {0.25, 0, 0, 0, 0},
        {0.5, 0.25, 0, 0, 0},
        {17.0 / 50.0, -1.0 / 25.0, 0.25, 0, 0},
        {371.0 / 1360.0, -137.0 / 2720.0, 15.0 / 544.0, 0.25, 0},
        {25.0 / 24.0, -49.0 / 48.0, 125.0 / 16.0, -85.0 / 12.0, 0.25},
    };
    static constexpr double bhat[stages] = {59.0 / 48.0, -17.0 / 96.0, 225.0 / 32.0, -85.0 / 12.0, 0.0};

    StepAttempt out;
    const Eigen::Index n = y.size();
    const Eigen::MatrixXd J = jacobian(f, y, fy);
    const Eigen::MatrixXd M = Eigen::MatrixXd::Identity(n, n) - h * gamma * J;
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(M);

    std::array<State, stages> k;
    State guess_slope = fy;
    for (int i = 0; i < stages; ++i) {
      State base = y;
      for (int j = 0; j < i; ++j) base += h * A[i][j] * k[j];
      State Y = base + h * gamma * guess_slope;
      bool converged = false;
      double prev = std::numeric_limits<double>::infinity();
      State fY;
      for (int it = 0; it < 12; ++it) {
        fY = f(Y);
        if (!fY.allFinite()) return out;
        const State G = Y - base - h * gamma * fY;
        const State delta = lu.solve(G);
        Y -= delta;
        const double dn = error_norm(delta, y, Y, cfg);
        if (!std::isfinite(dn) || (it >= 2 && dn > 2.0 * prev)) return out;
        prev = dn;
        if (dn <= 1e-3) {
          converged = true;
          break;
        }
      }
      if (!converged) return out;
      k[i] = f(Y);
      guess_slope = k[i];
    }
    // Stiffly accurate: the last stage value is the solution.
    out.y = y;
    State err = State::Zero(n);
    for (int j = 0; j < stages; ++j) {
      out.y += h * A[stages - 1][j] * k[j];
      err += h * (A[stages - 1][j] - bhat[j]) * k[j];
    }
    if (!out.y.allFinite()) return out;
    const State filtered = lu.solve(err);  // damps the estimate on stiff components
    out.err = error_norm(filtered, y, out.y, cfg);
    out.valid = std::isfinite(out.err);
    return out;
  }

  static Eigen::MatrixXd jacobian(Evaluator& f, const State& y, const State& fy) {
    const Eigen::Index n = y.size();
    Eigen::MatrixXd J(n, n);
    const double sqrt_eps = std::sqrt(std::numeric_limits<double>::epsilon());
    for (Eigen::Index j = 0; j < n; ++j) {
      State yp = y;
      const double d = sqrt_eps * (1.0 + std::abs(y[j]));
      yp[j] += d;
      J.col(j) = (f(yp) - fy) / d;
    }
    return J;
  }
};

inline bool crosses(double g0, double g1, Direction dir) {
  const bool rising = g0 < 0.0 && g1 >= 0.0;
  const bool falling = g0 > 0.0 && g1 <= 0.0;
  switch (dir) {
    case Direction::rising: return rising;
    case Direction::falling: return falling;
    case Direction::any: return rising || falling;
  }
  return false;
}

// Bisection on the step fraction; `advance(s)` returns the state reached from
// the bracket start after time s.
template <class Advance>
std::pair<double, State> bisect_event(const EventSpec& ev, double span, const State& y0, const State& y1,
                                      Advance&& advance) {
  double lo = 0.0, hi = span;
  double glo = ev.g(y0);
  State best = y1;
  double best_t = span;
  double best_g = std::abs(ev.g(y1));
  for (int it = 0; it < 200; ++it) {
    if (best_g <= ev.tol_event) break;
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    const State ym = advance(mid);
    const double gm = ev.g(ym);
    if (std::abs(gm) < best_g || std::abs(gm) <= ev.tol_event) {
      best = ym;
      best_t = mid;
      best_g = std::abs(gm);
    }
    if ((glo < 0.0) == (gm < 0.0) && gm != 0.0) {
      lo = mid;
      glo = gm;
    } else {
      hi = mid;
    }
  }
  return {best_t, best};
}

template <class Stepper>
Trajectory integrate_with(const Stepper& stepper, const OdeSystem& sys, const State& x0, double t0, double t1,
                          const IntegratorConfig& cfg, const std::vector<EventSpec>& events) {
  Trajectory traj;
  traj.times.push_back(t0);
  traj.states.push_back(x0);
  if (t1 == t0) return traj;

  Evaluator f{sys};
  const double dir = t1 > t0 ? 1.0 : -1.0;
  const double span = std::abs(t1 - t0);
  const double hmax = std::min(cfg.max_step, span);

  double t = t0;
  State y = x0;
  State fy = f(y);
  if (!fy.allFinite()) {
    traj.status = Status::guard_violation;
    traj.message = "right-hand side not finite at the initial state";
    traj.rhs_evals = f.count;
    return traj;
  }

  double h = cfg.initial_step;
  if (h <= 0.0) {
    // Hairer's starting-step heuristic, first stage only.
    State scale = (cfg.abs_tol + cfg.rel_tol * y.array().abs()).matrix();
    const double d0 = std::sqrt((y.array() / scale.array()).square().mean());
    const double d1 = std::sqrt((fy.array() / scale.array()).square().mean());
    h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h = std::min(h, hmax);
  }
  h = std::clamp(h, cfg.min_step, hmax);

  std::vector<double> gprev(events.size());
  for (std::size_t i = 0; i < events.size(); ++i) gprev[i] = events[i].g(y);

  constexpr double beta = 0.04;
  const double expo = 1.0 / Stepper::error_order - 0.75 * beta;
  double err_old = 1e-4;
  bool last_failure_was_guard = false;

  while (traj.steps + traj.rejected < cfg.max_steps) {
    const double remaining = span - std::abs(t - t0);
    if (remaining <= 0.0) break;
    const double ulp_floor = 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t));
    const double hmin = std::max(cfg.min_step, ulp_floor);
    bool final_step = false;
    if (h >= remaining) {
      h = remaining;
      final_step = true;
    }

    StepAttempt a = stepper.attempt(f, y, fy, dir * h, cfg);
    bool guard_bad = a.valid && !sys.admissible(a.y);
    if (!a.valid || guard_bad || a.err > 1.0) {
      ++traj.rejected;
      last_failure_was_guard = guard_bad || !a.valid;
      double shrink = 0.25;
      if (a.valid && !guard_bad) shrink = std::max(0.2, 0.9 * std::pow(a.err, -1.0 / Stepper::error_order));
      h *= shrink;
      if (h < hmin) {
        traj.status = last_failure_was_guard ? Status::guard_violation : Status::step_failure;
        traj.message = last_failure_was_guard ? "step left the admissible domain at t=" + std::to_string(t)
                                              : "step size underflow at t=" + std::to_string(t);
        if (!cfg.record_steps && traj.times.back() != t) {
          traj.times.push_back(t);
          traj.states.push_back(y);
        }
        traj.rhs_evals = f.count;
        return traj;
      }
      continue;
    }

    const double t_new = final_step ? t1 : t + dir * h;
    State f_new = f(a.y);
    ++traj.steps;

    // Section crossings inside the accepted step.
    bool stop = false;
    double t_stop = t_new;
    State y_stop = a.y;
    for (std::size_t i = 0; i < events.size(); ++i) {
      const double gn = events[i].g(a.y);
      if (crosses(gprev[i], gn, events[i].direction)) {
        const double step_len = std::abs(t_new - t);
        auto [s, ye] = bisect_event(events[i], step_len, y, a.y, [&](double s) {
          return stepper.attempt(f, y, fy, dir * s, cfg).y;
        });
        const double te = t + dir * s;
        traj.events.push_back({i, te, ye});
        if (events[i].terminal && (!stop || std::abs(te - t) < std::abs(t_stop - t))) {
          stop = true;
          t_stop = te;
          y_stop = ye;
        }
      }
      gprev[i] = gn;
    }
    if (stop) {
      // Drop crossings that happen after the terminal one.
      std::erase_if(traj.events, [&](const EventRecord& e) { return dir * (e.t - t_stop) > 0.0; });
      traj.times.push_back(t_stop);
      traj.states.push_back(y_stop);
      traj.status = Status::terminated_by_event;
      traj.rhs_evals = f.count;
      return traj;
    }

    t = t_new;
    y = std::move(a.y);
    fy = std::move(f_new);
    if (cfg.record_steps) {
      traj.times.push_back(t);
      traj.states.push_back(y);
    }
    if (final_step) break;

    // PI step-size controller.
    const double e = std::max(a.err, 1e-10);
    double fac = std::pow(e, expo) / std::pow(err_old, beta);
    fac = std::clamp(fac / 0.9, 0.1, 5.0);
    err_old = std::max(e, 1e-4);
    h = std::min(h / fac, hmax);
    h = std::max(h, hmin);
  }

  if (!cfg.record_steps && traj.times.back() != t) {
    traj.times.push_back(t);
    traj.states.push_back(y);
  }
  if (std::abs(t - t0) < span && traj.status == Status::completed) {
    traj.status = Status::step_failure;
    traj.message = "max_steps exhausted at t=" + std::to_string(t);
  }
  traj.rhs_evals = f.count;
  return traj;
}

}  // namespace detail

/// Integrates `system` from x0 over t_span = (t0, t1); t1 < t0 integrates
/// backward. A zero-length span returns a single-sample trajectory.
inline Trajectory integrate(const OdeSystem& system, const State& x0, std::pair<double, double> t_span,
                            const IntegratorConfig& config = {}, const std::vector<EventSpec>& events = {}) {
  config.validate();
  if (x0.size() != system.dim())
    throw UsageError("initial state has dimension " + std::to_string(x0.size()) + ", system '" + system.name +
                     "' expects " + std::to_string(system.dim()));
  if (!system.admissible(x0)) {
    Trajectory t;
    t.times.push_back(t_span.first);
    t.states.push_back(x0);
    t.status = Status::guard_violation;
    t.message = "initial state outside the admissible domain of '" + system.name + "'";
    return t;
  }
  if (config.method == Method::sdirk4)
    return detail::integrate_with(detail::Sdirk4{}, system, x0, t_span.first, t_span.second, config, events);
  return detail::integrate_with(detail::DormandPrince45{}, system, x0, t_span.first, t_span.second, config,
                                events);
}

/// Polishes a section crossing between two states of one orbit. The states
/// between the bracket ends are recovered by integrating from (t0, x0).
inline std::pair<double, State> locate_event(const OdeSystem& system, double t0, const State& x0, double t1,
                                             const State& x1, const EventSpec& event,
                                             const IntegratorConfig& config = {}) {
  const double g0 = event.g(x0), g1 = event.g(x1);
  if (!detail::crosses(g0, g1, event.direction))
    throw BracketError("no sign change of the event function across the bracket");
  IntegratorConfig sub = config;
  sub.record_steps = false;
  auto advance = [&](double s) -> State {
    const double ts = t0 + (t1 > t0 ? s : -s);
    const Trajectory tr = integrate(system, x0, {t0, ts}, sub);
    if (!tr.ok()) throw BracketError("integration failed inside the event bracket: " + tr.message);
    return tr.final_state();
  };
  auto [s, state] = detail::bisect_event(event, std::abs(t1 - t0), x0, x1, advance);
  return {t0 + (t1 > t0 ? s : -s), state};
}

/// Convenience: event on a single coordinate, g = x[index] - level.
inline EventSpec coordinate_event(int index, double level, Direction dir = Direction::any, bool terminal = true,
                                  double tol = 1e-12) {
  EventSpec e;
  e.g = [index, level](const State& x) { return x[index] - level; };
  e.direction = dir;
  e.terminal = terminal;
  e.tol_event = tol;
  e.name = "x[" + std::to_string(index) + "]=" + std::to_string(level);
  return e;
}

inline State make_state(std::initializer_list<double> values) {
  State s(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double v : values) s[i++] = v;
  return s;
}

}  // namespace flatblow
