// flatblow command-line front end: verify, sweep, canard, print-config, list.

#include <chrono>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "flatblow/experiments.hpp"
#include "flatblow/sweep.hpp"

#ifndef FLATBLOW_VERSION
#define FLATBLOW_VERSION "dev"
#endif

namespace fs = std::filesystem;
using namespace flatblow;

namespace {

constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::vector<double> parse_list(const std::string& s, const char* what) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError(std::string(what) + ": '" + item + "' is not a number");
    }
  }
  return out;
}

ExperimentConfig load_config(const std::string& path) {
  if (path.empty()) return {};
  json j;
  try {
    j = json::parse(io::read_file(path));
  } catch (const json::exception& e) {
    throw UsageError("cannot parse config '" + path + "': " + e.what());
  }
  return config_from_json(j);
}

json manifest_for(const ExperimentConfig& cfg, const ExperimentResult& r, const std::string& started) {
  json cases = json::array();
  for (const auto& c : r.rows) cases.push_back({{"case", c.name}, {"eps", c.eps}, {"tol", c.tol}, {"pass", c.pass}});
  return {{"artifact", "flatblow"},
          {"version", FLATBLOW_VERSION},
          {"started_utc", started},
          {"wall_clock_seconds", r.seconds},
          {"threads", worker_count()},
          {"experiment", r.id},
          {"config", config_to_json(cfg)},
          {"cases", cases},
          {"passed", r.passed()}};
}

void write_result(const fs::path& dir, const ExperimentConfig& cfg, const ExperimentResult& r, const std::string& started) {
  io::write_atomic(dir / "results.csv", results_table(r).str());
  io::write_atomic(dir / "summary.json", summary_json(r).dump(2) + "\n");
  io::write_atomic(dir / "manifest.json", manifest_for(cfg, r, started).dump(2) + "\n");
}

void print_result(const ExperimentResult& r) {
  std::cout << (r.passed() ? "PASS " : "FAIL ") << r.id << " (criterion " << r.criterion << ", "
            << io::format_double(r.seconds) << " s): " << r.summary << "\n";
  for (const auto& name : r.failing_cases()) std::cout << "  failing case: " << name << "\n";
}

int cmd_verify(const std::string& id, const std::string& config_path, const std::string& model,
               const std::string& eps, const std::string& out) {
  ExperimentConfig cfg = load_config(config_path);
  if (!model.empty()) cfg.model = model;
  if (!eps.empty()) cfg.eps_list = parse_list(eps, "--eps");
  if (!out.empty()) cfg.output_dir = out;
  cfg.experiment = id;
  cfg.validate();
  std::vector<std::string> ids;
  if (id == "all") {
    for (const auto& e : registry()) ids.push_back(e.id);
  } else {
    ids.push_back(find_experiment(id).id);
  }
  bool ok = true;
  json overall = json::array();
  for (const auto& one : ids) {
    const std::string started = utc_now();
    const ExperimentResult r = run_experiment(one, cfg);
    const fs::path dir = ids.size() == 1 ? fs::path(cfg.output_dir) : fs::path(cfg.output_dir) / one;
    write_result(dir, cfg, r, started);
    print_result(r);
    ok = ok && r.passed();
    overall.push_back({{"id", r.id}, {"criterion", r.criterion}, {"passed", r.passed()}});
  }
  if (ids.size() > 1) io::write_atomic(fs::path(cfg.output_dir) / "summary.json", overall.dump(2) + "\n");
  return ok ? 0 : kExitFail;
}

int cmd_sweep(const std::string& model, const std::vector<std::string>& params, double t_max, const std::string& until,
              const std::string& x0, const std::string& out, double rtol, double atol) {
  SweepSpec spec;
  spec.model = model;
  spec.t_max = t_max;
  spec.integrator.rel_tol = rtol;
  spec.integrator.abs_tol = atol;
  for (const auto& p : params) {
    const auto eq = p.find('=');
    if (eq == std::string::npos || eq == 0) throw UsageError("--param must look like name=v1,v2,...");
    spec.grid[p.substr(0, eq)] = parse_list(p.substr(eq + 1), "--param");
  }
  if (!until.empty()) spec.until = parse_section(until);
  if (!x0.empty()) {
    const auto v = parse_list(x0, "--x0");
    spec.x0 = State::Map(v.data(), static_cast<Eigen::Index>(v.size()));
  }
  const std::string started = utc_now();
  const auto t0 = std::chrono::steady_clock::now();
  const auto points = run_sweep(spec);
  const std::size_t failed = write_sweep(spec, points, out);
  json grid = json::object();
  for (const auto& [k, v] : spec.grid) grid[k] = v;
  const json manifest{{"artifact", "flatblow"},
                      {"version", FLATBLOW_VERSION},
                      {"started_utc", started},
                      {"wall_clock_seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()},
                      {"model", model},
                      {"grid", grid},
                      {"t_max", t_max},
                      {"until", until},
                      {"integrator", integrator_to_json(spec.integrator)},
                      {"points", points.size()},
                      {"failed_points", failed}};
  io::write_atomic(fs::path(out) / "manifest.json", manifest.dump(2) + "\n");
  std::cout << points.size() << " trajectories written to " << out << " (" << failed << " failed)\n";
  return 0;
}

int cmd_canard(const CanardSettings& k, const std::vector<double>& ladder, const std::string& out) {
  CanardClassifier cl;
  cl.delta_v = k.delta_v;
  json doc;
  if (ladder.empty()) {
    AircraftParams p{k.a, k.b, 0.0, k.eps};
    try {
      doc = canard_json(canard_bisect(p, k.bracket.first, k.bracket.second, k.max_iter, cl));
    } catch (const BracketError& e) {
      std::cerr << "flatblow canard: " << e.what() << "\n";
      return kExitFail;
    }
    doc["params"] = {{"a", k.a}, {"b", k.b}, {"eps", k.eps}, {"delta_v", k.delta_v}};
  } else {
    std::vector<double> widths;
    try {
      widths = parallel_map(ladder.size(), [&](std::size_t i) {
        AircraftParams p{k.a, k.b, 0.0, ladder[i]};
        return canard_window_width(p, k.bracket.first, k.bracket.second, k.window_depths.first, k.window_depths.second,
                                   k.max_iter, cl);
      });
    } catch (const BracketError& e) {
      std::cerr << "flatblow canard: " << e.what() << "\n";
      return kExitFail;
    }
    json pts = json::array();
    std::vector<std::pair<double, double>> fit_in;
    for (std::size_t i = 0; i < ladder.size(); ++i) {
      pts.push_back({{"eps", ladder[i]}, {"window_width", widths[i]}});
      fit_in.emplace_back(ladder[i], widths[i]);
    }
    doc = {{"params", {{"a", k.a}, {"b", k.b}, {"window_depths", {k.window_depths.first, k.window_depths.second}}}},
           {"ladder", pts}};
    if (fit_in.size() >= 3) {
      const ScalingFit f = contraction_scaling(fit_in);
      doc["fit"] = {{"slope", f.slope}, {"intercept", f.intercept}, {"r_squared", f.r2}, {"warnings", f.warnings}};
    }
  }
  const std::string text = doc.dump(2) + "\n";
  if (out.empty())
    std::cout << text;
  else
    io::write_atomic(out, text);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"flatblow: flat slow manifolds, blowup charts and verification experiments"};
  app.require_subcommand(1);
  app.set_version_flag("--version", FLATBLOW_VERSION);

  auto* verify = app.add_subcommand("verify", "run a registry experiment (or 'all') and write results");
  std::string v_id, v_config, v_model, v_eps, v_out;
  verify->add_option("id", v_id, "experiment id, see 'list'")->required();
  verify->add_option("--config", v_config, "JSON config overlaid on the defaults");
  verify->add_option("--model", v_model, "model filter for q-invariance: kuehn, tanh, aircraft, all");
  verify->add_option("--eps", v_eps, "comma-separated eps ladder overriding the experiment default");
  verify->add_option("--out", v_out, "output directory");

  auto* sweep = app.add_subcommand("sweep", "integrate a model over a parameter grid");
  std::string s_model, s_until, s_x0, s_out = "flatblow-sweep";
  std::vector<std::string> s_params;
  double s_tmax = 1.0, s_rtol = 1e-10, s_atol = 1e-12;
  sweep->add_option("--model", s_model, "sweep model id, see 'list'")->required();
  sweep->add_option("--param", s_params, "grid axis name=v1,v2,... (repeatable)");
  sweep->add_option("--t-max", s_tmax, "integration horizon");
  sweep->add_option("--until", s_until, "terminal section var=level[:rising|falling|any]");
  sweep->add_option("--x0", s_x0, "comma-separated initial state overriding the model default");
  sweep->add_option("--rtol", s_rtol, "relative tolerance");
  sweep->add_option("--atol", s_atol, "absolute tolerance");
  sweep->add_option("--out", s_out, "output directory");

  auto* canard = app.add_subcommand("canard", "locate the canard parameter by bisection");
  CanardSettings k;
  std::vector<double> c_bracket{k.bracket.first, k.bracket.second};
  std::string c_ladder, c_out;
  std::vector<double> c_depths{k.window_depths.first, k.window_depths.second};
  canard->add_option("--a", k.a, "parameter a");
  canard->add_option("--b", k.b, "parameter b");
  canard->add_option("--eps", k.eps, "eps (single run)");
  canard->add_option("--bracket", c_bracket, "two alpha values of different class")->expected(2);
  canard->add_option("--delta-v", k.delta_v, "escape depth below v_f");
  canard->add_option("--max-iter", k.max_iter, "bisection iteration cap");
  canard->add_option("--ladder", c_ladder, "comma-separated eps ladder: emit (eps, window width) pairs");
  canard->add_option("--depths", c_depths, "shallow and deep escape depths for the window width")->expected(2);
  canard->add_option("--out", c_out, "write JSON here instead of stdout");

  auto* print_config = app.add_subcommand("print-config", "print the default configuration as JSON");
  std::string p_config;
  print_config->add_option("--config", p_config, "show this config merged over the defaults");

  auto* list = app.add_subcommand("list", "list experiments and sweep models");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*verify) return cmd_verify(v_id, v_config, v_model, v_eps, v_out);
    if (*sweep) return cmd_sweep(s_model, s_params, s_tmax, s_until, s_x0, s_out, s_rtol, s_atol);
    if (*canard) {
      k.bracket = {c_bracket[0], c_bracket[1]};
      k.window_depths = {c_depths[0], c_depths[1]};
      const auto ladder = c_ladder.empty() ? std::vector<double>{} : parse_list(c_ladder, "--ladder");
      if (ladder.empty() && !canard->count("--bracket")) k.bracket = CanardSettings{}.bracket;
      if (!ladder.empty() && !canard->count("--bracket")) k.bracket = CanardSettings{}.ladder_bracket;
      return cmd_canard(k, ladder, c_out);
    }
    if (*print_config) {
      std::cout << config_to_json(load_config(p_config)).dump(2) << "\n";
      return 0;
    }
    if (*list) {
      std::cout << "experiments:\n";
      for (const auto& e : registry()) std::cout << "  " << e.id << "  [criterion " << e.criterion << "] " << e.title << "\n";
      std::cout << "  all\nsweep models:\n";
      for (const auto& m : sweep_models()) std::cout << "  " << m.id << "  " << m.description << "\n";
      return 0;
    }
  } catch (const UsageError& e) {
    std::cerr << "flatblow: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "flatblow: " << e.what() << "\n";
    return kExitFail;
  }
  return kExitUsage;
}
