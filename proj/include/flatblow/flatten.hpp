#pragma once

// q-augmentation of flat slow manifolds: the flat eigenvalue function lambda
// becomes a dynamic variable q, the exponential is eliminated from the
// vector field, and the graph Q = {q = lambda} is an invariant set of the
// extended system.

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "flatblow/odecore.hpp"
#include "flatblow/systems.hpp"

namespace flatblow {

struct FlatAugmentation {
  OdeSystem base;
  OdeSystem extended;
  std::string lambda_name;
  std::string lambda_var;  // argument of lambda, shared by base and extended
  std::function<double(double)> lambda;
  std::function<double(double)> lambda_prime;
  ScalarFn time_factor;  // relates extended to base time on Q; empty means 1

  int q_index() const { return extended.index_of("q"); }
  int arg_index() const { return extended.index_of(lambda_var); }

  /// q - lambda(arg) at an extended state.
  double q_constraint(const State& s) const { return s[q_index()] - lambda(s[arg_index()]); }

  /// d/dt (q - lambda) along the extended field, by the chain rule.
  double q_constraint_rate(const State& s) const {
    const State f = extended(s);
    return f[q_index()] - lambda_prime(s[arg_index()]) * f[arg_index()];
  }

  /// Extended state on Q above a base state.
  State lift(const State& base_state) const {
    State out(extended.dim());
    for (int i = 0; i < extended.dim(); ++i) {
      const auto& v = extended.vars[static_cast<std::size_t>(i)];
      out[i] = v == "q" ? 0.0 : base_state[base.index_of(v)];
    }
    out[q_index()] = lambda(out[arg_index()]);
    return out;
  }

  /// Base state obtained by forgetting q.
  State project(const State& ext_state) const {
    State out(base.dim());
    for (int i = 0; i < base.dim(); ++i) out[i] = ext_state[extended.index_of(base.vars[static_cast<std::size_t>(i)])];
    return out;
  }
};

namespace detail {

inline FlatAugmentation build_augmentation(OdeSystem base, OdeSystem extended, std::string lambda_name,
                                           std::string lambda_var, std::function<double(double)> lambda,
                                           std::function<double(double)> lambda_prime) {
  if (extended.dim() != base.dim() + 1) throw UsageError("extended system must add exactly one variable");
  FlatAugmentation aug;
  aug.base = std::move(base);
  aug.extended = std::move(extended);
  aug.lambda_name = std::move(lambda_name);
  aug.lambda_var = std::move(lambda_var);
  aug.lambda = std::move(lambda);
  aug.lambda_prime = std::move(lambda_prime);
  aug.extended.index_of("q");
  aug.extended.index_of(aug.lambda_var);
  return aug;
}

}  // namespace detail

/// Kuehn flat model with q = e^{-1/y}: x' = eps mu q, y' = y^2 (x - q), q' = q (x - q), eps' = 0.
inline FlatAugmentation extend_kuehn(double mu) {
  KuehnParams kp;
  kp.mu = mu;
  OdeSystem ext{"kuehn.extended", {"x", "y", "q", "eps"}, {{"mu", mu}},
                [mu](const State& s) {
                  const double x = s[0], y = s[1], q = s[2], eps = s[3];
                  return make_state({eps * mu * q, y * y * (x - q), q * (x - q), 0.0});
                },
                [](const State& s) { return s[1] >= 0.0 && s[2] >= 0.0 && s[3] >= 0.0; }};
  return detail::build_augmentation(
      kuehn_flat(kp), std::move(ext), "exp(-1/y)", "y", [](double y) { return flat_exp(1.0, y); },
      [](double y) { return flat_exp_scaled(1.0, y, 2); });
}

/// tanh regularization with q = e^{-2/eps_hat}: x' = eps, eps_hat' = -eps_hat^2 (2x + q),
/// q' = -2 q (2x + q), eps' = 0.
inline FlatAugmentation extend_tanh() {
  OdeSystem base{"tanh.base", {"x", "eps_hat", "eps"}, {},
                 [](const State& s) {
                   const double eh = s[1];
                   return make_state({s[2], -eh * eh * (2.0 * s[0] + flat_exp(2.0, eh)), 0.0});
                 },
                 [](const State& s) { return s[1] >= 0.0 && s[2] >= 0.0; }};
  OdeSystem ext{"tanh.extended", {"x", "eps_hat", "q", "eps"}, {},
                [](const State& s) {
                  const double x = s[0], eh = s[1], q = s[2], eps = s[3];
                  const double w = 2.0 * x + q;
                  return make_state({eps, -eh * eh * w, -2.0 * q * w, 0.0});
                },
                [](const State& s) { return s[1] >= 0.0 && s[2] >= 0.0 && s[3] >= 0.0; }};
  return detail::build_augmentation(
      std::move(base), std::move(ext), "exp(-2/eps_hat)", "eps_hat", [](double e) { return flat_exp(2.0, e); },
      [](double e) { return 2.0 * flat_exp_scaled(2.0, e, 2); });
}

/// Aircraft model at infinity with q = (1 + a y) e^{-b/y}.
inline FlatAugmentation extend_aircraft(double a, double b, double alpha) {
  AircraftParams p;
  p.a = a;
  p.b = b;
  p.alpha = alpha;
  p.validate();
  return detail::build_augmentation(
      aircraft_infty(p), aircraft_q(p), "(1+a y) exp(-b/y)", "y", [p](double y) { return p.lambda(y); },
      [a, b](double y) { return a * flat_exp(b, y) + (1.0 + a * y) * b * flat_exp_scaled(b, y, 2); });
}

/// y = eps / eps_hat, the physical coordinate of the tanh extension.
inline double tanh_reconstruct_y(const State& ext_state) {
  const double eh = ext_state[1];
  if (!(eh > 0.0)) throw DomainError("y = eps/eps_hat needs eps_hat > 0");
  return ext_state[3] / eh;
}

/// Largest relative violation |q - lambda| / (|q| + 1e-300) along a trajectory.
inline double q_drift(const FlatAugmentation& aug, const Trajectory& trajectory) {
  double worst = 0.0;
  const int qi = aug.q_index();
  for (const auto& s : trajectory.states)
    worst = std::max(worst, std::abs(aug.q_constraint(s)) / (std::abs(s[qi]) + 1e-300));
  return worst;
}

}  // namespace flatblow
