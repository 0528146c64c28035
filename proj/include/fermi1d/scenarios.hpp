#pragma once

// Named verification scenarios: each runs a small family of computations and
// compares measured quantities with fixed tolerances. Shared by the
// `verify` command and the acceptance runner.

#include <cstdint>
#include <string>
#include <vector>

namespace fermi1d {

struct Check {
  std::string label;
  double value = 0.0;
  std::string relation;  // "<=", ">=" or "in"
  double lower = 0.0;    // used by ">=" and "in"
  double upper = 0.0;    // used by "<=" and "in"
  bool pass = false;
};

Check at_most(std::string label, double value, double upper);
Check at_least(std::string label, double value, double lower);
Check within(std::string label, double value, double lower, double upper);
/// Boolean fact recorded as value 1 / 0 that must be 1.
Check holds(std::string label, bool fact);

struct ScenarioReport {
  std::string name;
  std::string summary;
  std::vector<Check> checks;
  std::vector<std::string> notes;  // reported constants, instance descriptions
  double seconds = 0.0;
  bool pass() const;
};

struct ScenarioOptions {
  std::uint64_t seed = 20240601;
  int threads = 0;
};

/// Available scenario names in a fixed order.
const std::vector<std::string>& scenario_names();

/// Throws ValidationError (listing the names) for an unknown scenario.
/// Numerical failures inside a scenario are caught and recorded as failed
/// checks, never thrown.
ScenarioReport run_scenario(const std::string& name, const ScenarioOptions& opt = {});

}  // namespace fermi1d
