// Acceptance runner: one PASS/FAIL line per criterion, followed by indented
// case details for failures.
//
//   acceptance                  all criteria, exit 1 if any fails
//   acceptance --criterion N    a single criterion
//   acceptance --report         all criteria, exit 0 once every one has run

#include <cstdlib>
#include <cstring>
#include <iostream>
#include <string>
#include <vector>

#include "flatblow/experiments.hpp"

using namespace flatblow;

namespace {

void print_case(const CaseRow& c) {
  std::cout << "    " << (c.pass ? "ok   " : "FAIL ") << c.name << "  eps=" << io::format_double(c.eps)
            << "  predicted=" << io::format_double(c.predicted) << "  measured=" << io::format_double(c.measured)
            << "  error=" << io::format_double(c.error) << "  tol=" << io::format_double(c.tol) << "\n";
}

bool run_criterion(int n, const ExperimentConfig& cfg) {
  const auto& info = experiment_for_criterion(n);
  const ExperimentResult r = run_experiment(info.id, cfg);
  std::cout << "criterion " << n << " [" << r.id << "]: " << (r.passed() ? "PASS" : "FAIL") << "  (" << r.summary
            << ", " << io::format_double(r.seconds) << " s)\n";
  if (!r.passed()) {
    for (const auto& c : r.rows)
      if (!c.pass) print_case(c);
    std::cout << "    diagnostics: " << r.diagnostics.dump() << "\n";
  }
  return r.passed();
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> which;
  bool report = false;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
      which.push_back(std::atoi(argv[++i]));
    } else if (std::strcmp(argv[i], "--report") == 0) {
      report = true;
    } else {
      std::cerr << "usage: acceptance [--criterion N]... [--report]\n";
      return 2;
    }
  }
  if (which.empty())
    for (int n = 1; n <= 12; ++n) which.push_back(n);

  const ExperimentConfig cfg;
  int failed = 0;
  try {
    for (int n : which)
      if (!run_criterion(n, cfg)) ++failed;
  } catch (const std::exception& e) {
    std::cout << "acceptance aborted: " << e.what() << "\n";
    return 2;
  }
  std::cout << (which.size() - static_cast<std::size_t>(failed)) << "/" << which.size() << " criteria passed\n";
  if (report) return 0;
  return failed == 0 ? 0 : 1;
}
