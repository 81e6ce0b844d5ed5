#pragma once

// Parameter sweeps: one trajectory CSV per grid point plus an index file.
// Grid points are integrated concurrently and written in grid order.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "flatblow/errors.hpp"
#include "flatblow/io.hpp"
#include "flatblow/odecore.hpp"
#include "flatblow/parallel.hpp"
#include "flatblow/systems.hpp"

namespace flatblow {

using ParamSet = std::map<std::string, double>;

struct SweepModel {
  std::string id;
  std::string description;
  ParamSet defaults;
  std::function<OdeSystem(const ParamSet&)> build;
  std::function<State(const ParamSet&)> start;
};

namespace detail {
inline AircraftParams aircraft_from(const ParamSet& p) {
  return {p.at("a"), p.at("b"), p.at("alpha"), p.at("eps")};
}
inline PwsParams pws_from(const ParamSet& p, PhiKind k) {
  PwsParams q;
  q.phi_kind = k;
  q.eps = p.at("eps");
  return q;
}
}  // namespace detail

inline const std::vector<SweepModel>& sweep_models() {
  using namespace detail;
  static const std::vector<SweepModel> models{
      {"aircraft-uv", "aircraft model in (u, v); starts on the attracting branch at v = v_f + 1",
       {{"a", 1.0}, {"b", 1.0}, {"alpha", 0.0}, {"eps", 1e-3}},
       [](const ParamSet& p) { return aircraft_model01(aircraft_from(p)); },
       [](const ParamSet& p) {
         const AircraftParams q = aircraft_from(p);
         const double v0 = q.v_f() + 1.0;
         return make_state({(q.a - v0) * std::exp(v0 * q.b), v0});
       }},
      {"aircraft-infty", "aircraft model at infinity in (x, y, eps); starts on the critical manifold at 0.6 y_f",
       {{"a", 1.0}, {"b", 0.5}, {"alpha", -1.0}, {"eps", 0.05}},
       [](const ParamSet& p) { return aircraft_infty(aircraft_from(p)); },
       [](const ParamSet& p) {
         const AircraftParams q = aircraft_from(p);
         const double y = 0.6 * q.y_f();
         return make_state({q.lambda(y), y, q.eps});
       }},
      {"kuehn-original", "u' = eps mu, v' = 1 - v^n u; starts at (u, v) = (-1, 0)",
       {{"mu", 1.0}, {"n", 2.0}, {"eps", 0.01}},
       [](const ParamSet& p) {
         KuehnParams k;
         k.mu = p.at("mu");
         k.n = static_cast<int>(p.at("n"));
         k.eps = p.at("eps");
         return kuehn_original(k);
       },
       [](const ParamSet&) { return make_state({-1.0, 0.0}); }},
      {"kuehn-flat", "flat compactified Kuehn model in (x, y, eps); starts on the critical manifold at y = 0.5",
       {{"mu", 1.0}, {"eps", 0.01}},
       [](const ParamSet& p) {
         KuehnParams k;
         k.mu = p.at("mu");
         return kuehn_flat(k);
       },
       [](const ParamSet& p) { return make_state({flat_exp(1.0, 0.5), 0.5, p.at("eps")}); }},
      {"tanh-xy", "tanh regularization in (x, y); starts on the critical manifold at x = -1",
       {{"eps", 0.01}},
       [](const ParamSet& p) { return regularized_xy(pws_from(p, PhiKind::tanh)); },
       [](const ParamSet& p) { return make_state({-1.0, p.at("eps") * critical_yhat(PhiKind::tanh, -1.0)}); }},
      {"cst-xy", "cubic regularization in (x, y); starts on the critical manifold at x = -1",
       {{"eps", 0.01}},
       [](const ParamSet& p) { return regularized_xy(pws_from(p, PhiKind::cst_cubic)); },
       [](const ParamSet& p) { return make_state({-1.0, p.at("eps") * critical_yhat(PhiKind::cst_cubic, -1.0)}); }},
  };
  return models;
}

inline const SweepModel& find_sweep_model(const std::string& id) {
  for (const auto& m : sweep_models())
    if (m.id == id) return m;
  throw UsageError("unknown sweep model '" + id + "'");
}

/// Terminal section {var = level} crossed in `direction`.
struct SweepSection {
  std::string var;
  double level = 0.0;
  Direction direction = Direction::any;
};

/// Parses "var=level[:rising|falling|any]".
inline SweepSection parse_section(const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos || eq == 0) throw UsageError("section must look like var=level[:direction]");
  SweepSection s;
  s.var = spec.substr(0, eq);
  std::string rest = spec.substr(eq + 1);
  const auto colon = rest.find(':');
  std::string dir = "any";
  if (colon != std::string::npos) {
    dir = rest.substr(colon + 1);
    rest = rest.substr(0, colon);
  }
  try {
    std::size_t used = 0;
    s.level = std::stod(rest, &used);
    if (used != rest.size()) throw std::invalid_argument(rest);
  } catch (const std::exception&) {
    throw UsageError("section level '" + rest + "' is not a number");
  }
  if (dir == "rising")
    s.direction = Direction::rising;
  else if (dir == "falling")
    s.direction = Direction::falling;
  else if (dir != "any")
    throw UsageError("section direction must be rising, falling or any");
  return s;
}

struct SweepSpec {
  std::string model;
  std::map<std::string, std::vector<double>> grid;  // parameter -> values
  double t_max = 1.0;
  std::optional<SweepSection> until;
  std::optional<State> x0;
  IntegratorConfig integrator;
};

struct SweepPoint {
  ParamSet params;
  std::string file;
  Trajectory trajectory;
  std::string error;  // set when the integration could not be started
};

/// Cartesian product in lexicographic parameter-name order, last name fastest.
inline std::vector<ParamSet> expand_grid(const SweepModel& model, const std::map<std::string, std::vector<double>>& grid) {
  if (grid.empty()) throw UsageError("sweep grid is empty");
  for (const auto& [k, v] : grid) {
    if (!model.defaults.count(k)) throw UsageError("model '" + model.id + "' has no parameter '" + k + "'");
    if (v.empty()) throw UsageError("sweep grid for '" + k + "' is empty");
  }
  std::vector<ParamSet> out{model.defaults};
  for (const auto& [k, values] : grid) {
    std::vector<ParamSet> next;
    for (const auto& base : out)
      for (double v : values) {
        ParamSet p = base;
        p[k] = v;
        next.push_back(p);
      }
    out = std::move(next);
  }
  return out;
}

/// Integrates every grid point. Per-point failures are recorded, not thrown.
inline std::vector<SweepPoint> run_sweep(const SweepSpec& spec) {
  const SweepModel& model = find_sweep_model(spec.model);
  if (!(spec.t_max > 0.0)) throw UsageError("sweep needs t_max > 0");
  spec.integrator.validate();
  const auto sets = expand_grid(model, spec.grid);
  IntegratorConfig cfg = spec.integrator;
  cfg.record_steps = true;
  return parallel_map(sets.size(), [&](std::size_t i) {
    SweepPoint pt;
    pt.params = sets[i];
    char name[32];
    std::snprintf(name, sizeof name, "point_%04zu.csv", i);
    pt.file = name;
    try {
      const OdeSystem sys = model.build(pt.params);
      const State x0 = spec.x0 ? *spec.x0 : model.start(pt.params);
      if (x0.size() != sys.dim())
        throw UsageError("initial state has " + std::to_string(x0.size()) + " entries, model needs " +
                         std::to_string(sys.dim()));
      std::vector<EventSpec> evs;
      if (spec.until)
        evs.push_back(coordinate_event(sys.index_of(spec.until->var), spec.until->level, spec.until->direction, true));
      pt.trajectory = integrate(sys, x0, {0.0, spec.t_max}, cfg, evs);
    } catch (const UsageError&) {
      throw;
    } catch (const std::exception& e) {
      pt.error = e.what();
    }
    return pt;
  });
}

inline std::string trajectory_csv(const OdeSystem& sys, const Trajectory& tr) {
  std::vector<std::string> header{"t"};
  header.insert(header.end(), sys.vars.begin(), sys.vars.end());
  io::CsvTable t(header);
  for (std::size_t k = 0; k < tr.times.size(); ++k) {
    auto& row = t.row() << tr.times[k];
    for (Eigen::Index j = 0; j < tr.states[k].size(); ++j) row << tr.states[k][j];
  }
  return t.str();
}

/// Writes point_NNNN.csv files and index.csv into `dir`; returns the number of failed points.
inline std::size_t write_sweep(const SweepSpec& spec, const std::vector<SweepPoint>& points,
                               const std::filesystem::path& dir) {
  const SweepModel& model = find_sweep_model(spec.model);
  std::vector<std::string> header{"point", "file"};
  for (const auto& [k, v] : model.defaults) header.push_back(k);
  for (const char* h : {"status", "final_time", "steps", "message"}) header.push_back(h);
  io::CsvTable index(header);
  std::size_t failed = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& pt = points[i];
    auto& row = index.row() << i << pt.file;
    for (const auto& [k, v] : pt.params) row << v;
    if (!pt.error.empty()) {
      ++failed;
      row << "setup_failure" << std::numeric_limits<double>::quiet_NaN() << 0L << pt.error;
      continue;
    }
    const Trajectory& tr = pt.trajectory;
    if (!tr.ok()) ++failed;
    row << to_string(tr.status) << tr.final_time() << tr.steps << tr.message;
    io::write_atomic(dir / pt.file, trajectory_csv(model.build(pt.params), tr));
  }
  io::write_atomic(dir / "index.csv", index.str());
  return failed;
}

}  // namespace flatblow
