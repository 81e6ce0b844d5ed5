#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "flatblow/experiments.hpp"
#include "flatblow/sweep.hpp"

using namespace flatblow;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("flatblow_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) { return io::read_file(p); }

std::size_t line_count(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST(Registry, EveryCriterionHasOneExperiment) {
  std::set<int> seen;
  for (const auto& e : registry()) EXPECT_TRUE(seen.insert(e.criterion).second) << e.id;
  for (int n = 1; n <= 12; ++n) EXPECT_EQ(experiment_for_criterion(n).criterion, n);
  EXPECT_THROW(find_experiment("no-such-id"), UsageError);
}

TEST(Config, DefaultsRoundTripThroughJson) {
  const ExperimentConfig d;
  const ExperimentConfig back = config_from_json(config_to_json(d));
  EXPECT_EQ(config_to_json(back), config_to_json(d));
  EXPECT_DOUBLE_EQ(back.sections.nu, 0.1);
  EXPECT_DOUBLE_EQ(back.sections.xi, 0.4);
  EXPECT_DOUBLE_EQ(back.sections.mu_inv, 0.5);
  EXPECT_DOUBLE_EQ(back.sections.chi, 0.1);
}

TEST(Config, OverlayAndValidation) {
  const auto c = config_from_json(json::parse(R"({"eps_list":[0.1,0.05],"kuehn":{"mu":2},"integrator":{"rel_tol":1e-9}})"));
  EXPECT_EQ(c.eps_list.size(), 2u);
  EXPECT_DOUBLE_EQ(c.kuehn_mu, 2.0);
  ASSERT_TRUE(c.integrator.has_value());
  EXPECT_DOUBLE_EQ(c.integrator->rel_tol, 1e-9);
  EXPECT_THROW(config_from_json(json::parse(R"({"bogus":1})")), UsageError);
  EXPECT_THROW(config_from_json(json::parse(R"({"eps_list":[-1]})")), UsageError);
  EXPECT_THROW(config_from_json(json::parse(R"({"integrator":{"method":"euler"}})")), UsageError);
  EXPECT_THROW(config_from_json(json::parse(R"({"canard":{"bracket":[1]}})")), UsageError);
}

TEST(Verify, TanhTheoremOneRowPerThetaEps) {
  const auto r = run_experiment("tanh-theorem", {});
  EXPECT_TRUE(r.passed());
  EXPECT_EQ(r.rows.size(), 9u);
  const std::string csv = results_table(r).str();
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "case,eps,predicted,measured,error,tol,pass");
  EXPECT_EQ(line_count(csv), 10u);
}

TEST(Verify, QInvarianceKuehnOnly) {
  ExperimentConfig c;
  c.model = "kuehn";
  const auto r = run_experiment("q-invariance", c);
  EXPECT_TRUE(r.passed());
  EXPECT_EQ(r.rows.size(), 20u);
  for (const auto& row : r.rows) {
    EXPECT_EQ(row.name.rfind("kuehn/", 0), 0u);
    EXPECT_LE(row.measured, row.tol);
  }
  c.model = "nope";
  EXPECT_THROW(run_experiment("q-invariance", c), UsageError);
}

TEST(Verify, NumericalFailureBecomesFailingRow) {
  ExperimentConfig c;
  c.eps_list = {0.5, 0.4};  // too few points for a scaling fit
  const auto r = run_experiment("tanh-contraction", c);
  EXPECT_FALSE(r.passed());
  ASSERT_EQ(r.rows.size(), 1u);
  EXPECT_EQ(r.rows[0].name, "numerical_failure");
}

TEST(Verify, SummaryJsonListsFailingCases) {
  const auto r = run_experiment("kuehn-scaling", {});
  const json s = summary_json(r);
  EXPECT_EQ(s["passed"], r.passed());
  EXPECT_EQ(s["failing_cases"].size(), r.failing_cases().size());
}

TEST(Sweep, AircraftAlphaGrid) {
  SweepSpec spec;
  spec.model = "aircraft-uv";
  spec.grid = {{"alpha", {-2e-3, -1e-3, 0.0}}, {"eps", {1e-3}}};
  spec.t_max = 200.0;
  const fs::path dir = scratch("sweep_a");
  const auto pts = run_sweep(spec);
  ASSERT_EQ(pts.size(), 3u);
  EXPECT_EQ(write_sweep(spec, pts, dir), 0u);
  for (const char* f : {"point_0000.csv", "point_0001.csv", "point_0002.csv", "index.csv"})
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  EXPECT_EQ(line_count(slurp(dir / "index.csv")), 4u);
  fs::remove_all(dir);
}

TEST(Sweep, DeterministicOutput) {
  SweepSpec spec;
  spec.model = "tanh-xy";
  spec.grid = {{"eps", {0.05, 0.02}}};
  spec.t_max = 200.0;
  spec.until = parse_section("x=1:rising");
  const fs::path a = scratch("sweep_b1"), b = scratch("sweep_b2");
  write_sweep(spec, run_sweep(spec), a);
  write_sweep(spec, run_sweep(spec), b);
  for (const char* f : {"point_0000.csv", "point_0001.csv", "index.csv"}) EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  EXPECT_NE(slurp(a / "index.csv").find("terminated_by_event"), std::string::npos);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Sweep, UsageErrors) {
  SweepSpec spec;
  spec.model = "aircraft-uv";
  EXPECT_THROW(run_sweep(spec), UsageError);
  spec.grid = {{"nope", {1.0}}};
  EXPECT_THROW(run_sweep(spec), UsageError);
  spec.model = "no-model";
  EXPECT_THROW(run_sweep(spec), UsageError);
  EXPECT_THROW(parse_section("x"), UsageError);
  EXPECT_THROW(parse_section("x=abc"), UsageError);
  EXPECT_THROW(parse_section("x=1:sideways"), UsageError);
}

TEST(Sweep, PointFailuresAreRecorded) {
  SweepSpec spec;
  spec.model = "aircraft-infty";
  spec.grid = {{"a", {1.0, 3.0}}};  // a = 3 puts the fold out of view
  spec.t_max = 1.0;
  const auto pts = run_sweep(spec);
  ASSERT_EQ(pts.size(), 2u);
  EXPECT_TRUE(pts[0].error.empty());
  EXPECT_FALSE(pts[1].error.empty());
  const fs::path dir = scratch("sweep_c");
  EXPECT_EQ(write_sweep(spec, pts, dir), 1u);
  EXPECT_NE(slurp(dir / "index.csv").find("setup_failure"), std::string::npos);
  fs::remove_all(dir);
}

TEST(Io, FormatAndEscape) {
  EXPECT_EQ(io::format_double(0.1), "0.10000000000000001");
  EXPECT_EQ(io::csv_escape("a,b"), "\"a,b\"");
  io::CsvTable t({"a", "b"});
  t.row() << 1.0;
  EXPECT_THROW(t.str(), UsageError);
}

TEST(Io, AtomicWriteCreatesDirectories) {
  const fs::path dir = scratch("io");
  io::write_atomic(dir / "x" / "y.txt", "hello\n");
  EXPECT_EQ(slurp(dir / "x" / "y.txt"), "hello\n");
  fs::remove_all(dir);
}
