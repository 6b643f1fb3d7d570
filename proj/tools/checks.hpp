#pragma once

// Named verification suites shared by the CLI and the acceptance binary.
// Every suite builds its own fixture from closed-form oracles; none of them
// read the run configuration.

#include <cstdint>
#include <string>
#include <vector>

namespace relqm::checks {

enum class Relation { at_most, at_least, greater_than, within };

struct CheckResult {
  std::string suite;
  std::string name;
  double measured = 0.0;
  double bound = 0.0;   // tolerance (within) or threshold (the others)
  double target = 0.0;  // only used by Relation::within
  Relation relation = Relation::at_most;
  bool passed = false;
  double seconds = 0.0;
  std::string note;
};

CheckResult make_check(std::string suite, std::string name, double measured, Relation rel, double bound,
                       double target = 0.0);

const char* relation_symbol(Relation r);

struct Suite {
  int criterion;
  const char* name;
  double budget_seconds;
};

const std::vector<Suite>& suites();

/// One row of a refinement study.
struct Level {
  double h;
  double density;
  double continuity;
};

struct ConvergenceStudy {
  std::vector<Level> rows;
  double density_slope = 0.0;
  double continuity_slope = 0.0;
};

/// Packet evolution refined `levels` times; residuals of the evolved field.
ConvergenceStudy packet_convergence(int levels);

std::vector<CheckResult> mass_shell();
/// `study` (optional) receives the packet refinement table.
std::vector<CheckResult> derivation_closure(int levels, ConvergenceStudy* study = nullptr);
std::vector<CheckResult> transform_positivity(std::uint64_t seed);
std::vector<CheckResult> operator_correspondence();
std::vector<CheckResult> nonrelativistic_limit();
std::vector<CheckResult> branch_normalization();
std::vector<CheckResult> expansion_order();
std::vector<CheckResult> trajectories();
std::vector<CheckResult> gravity_coupling();

/// Runs suite `criterion` (1-9), appends a runtime check against its budget,
/// and converts library exceptions into a failed check.
std::vector<CheckResult> run_suite(int criterion, int levels, std::uint64_t seed, ConvergenceStudy* study = nullptr);

}  // namespace relqm::checks
