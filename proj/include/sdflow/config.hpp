#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sdflow/parameters.hpp"
#include "sdflow/solver.hpp"
#include "sdflow/state.hpp"

namespace sdflow {

enum class InitialKind { uniform, trig_perturbation, seeded_random };

// Initial data recipe.  b0 = 0 is shorthand for the equilibrium value of the
// configured elastic law.
struct InitialCondition {
  InitialKind kind = InitialKind::uniform;
  double rho0 = 1.0;
  double b0 = 0.0;
  double rho_amplitude = 0.0;
  double u_amplitude = 0.0;
  double b_amplitude = 0.0;
  int support = 4;          // largest excited mode, seeded-random only
  std::uint64_t seed = 1;

  bool operator==(const InitialCondition&) const = default;
};

struct DiagnosticsConfig {
  bool energy = true;
  bool norms = true;
  int evf_window = 0;       // snapshots per flux-identity window; 0 = off
  bool renormalized = false;
  bool rho_b_pair = false;

  bool operator==(const DiagnosticsConfig&) const = default;
};

// Convergence-study ladder for the mms subcommand.  dts must have length 1
// (shared by every rung) or match points.
struct MmsConfig {
  std::vector<int> points{16, 32, 64};
  std::vector<double> dts{1e-5};
  double t_end = 1e-3;

  bool operator==(const MmsConfig&) const = default;
};

// Everything a run needs, round-trippable through the text form.
struct RunConfig {
  GridSpec grid;
  Parameters params;
  InitialCondition initial;
  double t_end = 0.1;
  long snapshot_every = 0;  // steps between stored snapshots; 0 = none
  std::string out_dir = "out";
  SolverOptions solver;
  DiagnosticsConfig diagnostics;
  MmsConfig mms;

  bool operator==(const RunConfig&) const = default;
};

// Parse the INI-style text form (sections in brackets, key = value lines,
// # or ; comments).  Unknown sections or keys fail fast with the offending
// line and column; semantic violations are collected and reported together.
// The empty string parses to the all-defaults config.
RunConfig parse_config(const std::string& text);

// Every violated invariant, empty when the config is valid.
std::vector<std::string> config_violations(const RunConfig& cfg);
void validate_config(const RunConfig& cfg);  // throws ValidationError with the full list

// Canonical text form: every key in a fixed order, 17 significant digits.
// parse_config(serialize_config(c)) == c.
std::string serialize_config(const RunConfig& cfg);

// Realize the initial condition on the configured grid.  Throws
// ValidationError when the recipe produces non-positive density or b.
State build_initial_state(const RunConfig& cfg);

}  // namespace sdflow
