#pragma once

// Blowups and directional charts of the shipped models, paired with their
// desingularized chart fields and ambient parents.

#include <functional>
#include <random>
#include <string>
#include <vector>

#include "flatblow/charts.hpp"
#include "flatblow/flatten.hpp"
#include "flatblow/systems.hpp"

namespace flatblow {

// x = r xbar, q = r qbar, eps = r epsbar; y untouched.
inline BlowupSpec kuehn_blowup() { return {{"x", "y", "q", "eps"}, {{"x", 1}, {"q", 1}, {"eps", 1}}, {"y"}}; }

inline Chart kuehn_chart_kappa1() {
  return {"kuehn.kappa1", kuehn_blowup(), "q", 1,
          {radial("r1"), barred("x1", "x"), passthrough("y"), barred("eps1", "eps")}};
}

// x = r xbar, eps = r^2 epsbar, q = r qbar; eps_hat untouched.
inline BlowupSpec tanh_blowup() {
  return {{"x", "eps_hat", "q", "eps"}, {{"x", 1}, {"eps", 2}, {"q", 1}}, {"eps_hat"}};
}

inline Chart tanh_chart_kappa1() {
  return {"tanh.kappa1", tanh_blowup(), "q", 1,
          {radial("r1"), barred("x1", "x"), passthrough("eps_hat"), barred("eps1", "eps")}};
}

inline Chart tanh_chart_kappa2() {
  return {"tanh.kappa2", tanh_blowup(), "eps", 1,
          {barred("x2", "x"), passthrough("eps_hat"), barred("q2", "q"), radial("r2")}};
}

inline Chart tanh_chart_kappa3() {
  return {"tanh.kappa3", tanh_blowup(), "x", 1,
          {radial("r3"), passthrough("eps_hat"), barred("q3", "q"), barred("eps3", "eps")}};
}

// q = r qbar, x = r xbar, eps = r^2 epsbar; y untouched.
inline BlowupSpec aircraft_blowup() {
  return {{"x", "y", "q", "eps"}, {{"x", 1}, {"q", 1}, {"eps", 2}}, {"y"}};
}

inline Chart aircraft_chart_scaling() {
  return {"aircraft.q2", aircraft_blowup(), "eps", 1,
          {barred("x2", "x"), passthrough("y"), barred("q2", "q"), radial("r2")}};
}

// Second blowup of (x, y, q) = 0 in the scaling chart: x = rho xbar, y = rho^2 ybar, q = rho qbar.
inline BlowupSpec aircraft_final_blowup() { return {{"x", "y", "q"}, {{"x", 1}, {"y", 2}, {"q", 1}}, {}}; }

inline Chart aircraft_chart_kappa1() {
  return {"aircraft.kappa1", aircraft_final_blowup(), "q", 1, {radial("rho1"), barred("x1", "x"), barred("y1", "y")}};
}
inline Chart aircraft_chart_kappa2() {
  return {"aircraft.kappa2", aircraft_final_blowup(), "x", -1,
          {radial("rho2"), barred("y2", "y"), barred("q2", "q")}};
}
inline Chart aircraft_chart_kappa3() {
  return {"aircraft.kappa3", aircraft_final_blowup(), "y", 1, {radial("rho3"), barred("x3", "x"), barred("q3", "q")}};
}
inline Chart aircraft_chart_kappa4() {
  return {"aircraft.kappa4", aircraft_final_blowup(), "x", 1, {radial("rho4"), barred("y4", "y"), barred("q4", "q")}};
}

/// The scaling-chart system in the unscripted names (x, y, q) used by the second blowup.
inline OdeSystem aircraft_xyq(const AircraftParams& p) {
  OdeSystem s = aircraft_q2(p);
  s.name = "aircraft.xyq";
  s.vars = {"x", "y", "q"};
  return s;
}

using LocalSampler = std::function<State(std::mt19937_64&)>;

struct ChartPair {
  std::string name;
  DesingularizedField field;
  OdeSystem ambient;
  LocalSampler sample;  // admissible chart-local point with radial coordinate in [1e-3, 1]
};

namespace detail {
inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}
}  // namespace detail

/// Every (model, chart) pair shipped in the catalog.
inline std::vector<ChartPair> shipped_chart_pairs(double mu = 1.0, const AircraftParams& ap = {}) {
  using detail::uniform;
  std::vector<ChartPair> out;
  KuehnParams kp;
  kp.mu = mu;
  out.push_back({"kuehn.kappa1", {kuehn_chart_kappa1(), kuehn_kappa1(kp), 1, {}}, extend_kuehn(mu).extended,
                 [](std::mt19937_64& g) {
                   return make_state({uniform(g, 1e-3, 1.0), uniform(g, -2.0, 2.0), uniform(g, 0.0, 1.0),
                                      uniform(g, 0.0, 1.0)});
                 }});
  const OdeSystem tanh_ext = extend_tanh().extended;
  out.push_back({"tanh.kappa1", {tanh_chart_kappa1(), tanh_kappa1(), 1, {}}, tanh_ext, [](std::mt19937_64& g) {
                   return make_state({uniform(g, 1e-3, 1.0), uniform(g, -2.0, 2.0), uniform(g, 0.0, 1.0),
                                      uniform(g, 0.0, 1.0)});
                 }});
  out.push_back({"tanh.kappa2", {tanh_chart_kappa2(), tanh_kappa2(), 1, {}}, tanh_ext, [](std::mt19937_64& g) {
                   return make_state({uniform(g, -3.0, 3.0), uniform(g, 0.0, 1.0), uniform(g, 0.0, 3.0),
                                      uniform(g, 1e-3, 1.0)});
                 }});
  out.push_back({"tanh.kappa3", {tanh_chart_kappa3(), tanh_kappa3(), 1, {}}, tanh_ext, [](std::mt19937_64& g) {
                   return make_state({uniform(g, 1e-3, 1.0), uniform(g, 0.0, 1.0), uniform(g, 0.0, 3.0),
                                      uniform(g, 0.0, 1.0)});
                 }});
  const double a = ap.a;
  out.push_back({"aircraft.q2", {aircraft_chart_scaling(), aircraft_q2_with_radius(ap), 1, {}}, aircraft_q(ap),
                 [a](std::mt19937_64& g) {
                   const double ymax = a < 0.0 ? std::min(1.0, -0.5 / a) : 1.0;
                   return make_state({uniform(g, -2.0, 2.0), uniform(g, 0.0, ymax), uniform(g, 0.0, 2.0),
                                      uniform(g, 1e-3, 1.0)});
                 }});
  const OdeSystem xyq = aircraft_xyq(ap);
  auto box = [](std::mt19937_64& g) {
    return make_state({uniform(g, 1e-3, 1.0), uniform(g, -2.0, 2.0), uniform(g, 0.0, 2.0)});
  };
  auto box_nonneg_first = [](std::mt19937_64& g) {
    return make_state({uniform(g, 1e-3, 1.0), uniform(g, 0.0, 1.0), uniform(g, -1.0, 2.0)});
  };
  out.push_back({"aircraft.kappa1", {aircraft_chart_kappa1(), aircraft_kappa1(ap), 1, {}}, xyq,
                 [](std::mt19937_64& g) {
                   return make_state({uniform(g, 1e-3, 1.0), uniform(g, -2.0, 2.0), uniform(g, 0.0, 1.0)});
                 }});
  out.push_back({"aircraft.kappa2", {aircraft_chart_kappa2(), aircraft_kappa2(ap), 1, {}}, xyq, box_nonneg_first});
  out.push_back({"aircraft.kappa3", {aircraft_chart_kappa3(), aircraft_kappa3(ap), 1, {}}, xyq, box});
  out.push_back({"aircraft.kappa4", {aircraft_chart_kappa4(), aircraft_kappa4(ap), 1, {}}, xyq, box_nonneg_first});
  if (a < 0.0) {
    // keep 1 + a y > 0 in the second blowup charts
    for (auto& pr : out) {
      if (pr.name.rfind("aircraft.kappa", 0) != 0) continue;
      pr.sample = [inner = pr.sample, a, f = pr.field](std::mt19937_64& g) {
        for (;;) {
          State s = inner(g);
          if (f.rhs.admissible(s) && 1.0 + a * f.chart.to_ambient(s)[1] > 0.0) return s;
        }
      };
    }
  }
  return out;
}

/// Worst desingularization residual of one pair over n random admissible points.
inline double check_chart_pair(const ChartPair& pair, int n = 100, std::uint64_t seed = 12345) {
  std::mt19937_64 rng(seed);
  std::vector<State> pts;
  pts.reserve(static_cast<std::size_t>(n));
  while (static_cast<int>(pts.size()) < n) {
    State s = pair.sample(rng);
    if (pair.field.rhs.admissible(s) && pair.ambient.admissible(pair.field.chart.to_ambient(s))) pts.push_back(s);
  }
  return desingularization_check(pair.field, pair.ambient, pts);
}

}  // namespace flatblow
