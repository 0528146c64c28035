#pragma once

// Run configuration: a single JSON document, validated before any
// computation. Errors name the file, line and key they refer to.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fermi1d/grid.hpp"
#include "fermi1d/many_body.hpp"

namespace fermi1d {

/// ValidationError tied to a place in the configuration text (line 0 when
/// the place is unknown).
class ConfigError : public ValidationError {
 public:
  ConfigError(const std::string& what, int line) : ValidationError(what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

/// amplitude * cos(2 pi k x) or amplitude * sin(2 pi k x).
struct TrigTerm {
  std::string type;  // "cos" or "sin"
  int k = 0;
  double amplitude = 0.0;
};

struct PotentialSpec {
  std::vector<TrigTerm> terms;
  std::vector<double> nodal;  // empty, or n + 1 values added to the terms
  std::vector<DeltaTerm> deltas;
  double constant = 0.0;
};

struct InteractionSpec {
  // zero | cosine | gaussian | soft_coulomb | convolution | general
  std::string type = "zero";
  double strength = 1.0;
  double width = 0.1;
  int k = 1;
  std::vector<double> samples;               // convolution
  std::vector<std::vector<double>> values;   // general, (n+1) x (n+1)
};

struct DensitySpec {
  // potential: ground density of the configured v and w
  // nodal: given values; shape: base + terms, rescaled to integrate to N
  std::string source = "potential";
  std::vector<double> values;
  std::vector<TrigTerm> terms;
  double base = 1.0;
};

struct Tolerances {
  double grad_tol = 1e-7;    // inversion residual
  int max_iters = 200;       // inversion iterations
  double inner_tol = 1e-8;   // inversions inside xc quantities
  double scf_tol = 1e-6;
  int scf_max_iters = 100;
  double mixing = 0.5;
};

struct RunConfig {
  int n = 400;
  int K = 10;
  int N = 1;
  BoundaryCondition bc = BoundaryCondition::Neumann;
  PotentialSpec potential;
  InteractionSpec interaction;
  DensitySpec density;
  Tolerances tol;
  std::uint64_t seed = 20240601;
  bool allow_parity_violation = false;
  std::string csv;  // optional CSV output path

  std::string source = "config";   // file name for messages
  std::map<std::string, int> lines;  // key path -> line

  /// ConfigError at the line of `path` (or its closest recorded parent).
  ConfigError error(const std::string& path, const std::string& msg) const;
};

RunConfig parse_config(const std::string& text, const std::string& source = "config");
RunConfig load_config(const std::string& path);

/// The parity rule for commands that rely on it: an error unless
/// allow_parity_violation is set, then a warning (returned).
std::vector<std::string> check_parity(const RunConfig& cfg);

Grid make_grid(const RunConfig& cfg);
ExternalPotential make_potential(const RunConfig& cfg, const Grid& g);
Interaction make_interaction(const RunConfig& cfg, const Grid& g);
BasisPtr make_basis(const RunConfig& cfg, const Grid& g);
/// Target density per cfg.density. The "potential" source uses the grid
/// model for w = Zero and the K-mode model otherwise.
Density make_density(const RunConfig& cfg, const Grid& g);

}  // namespace fermi1d
