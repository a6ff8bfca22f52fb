#pragma once

#include <functional>
#include <string>
#include <utility>

#include "sdflow/diagnostics.hpp"
#include "sdflow/parameters.hpp"
#include "sdflow/state.hpp"

namespace sdflow {

struct SolverOptions {
  double picard_tol = 1e-10;   // relative sup-norm change ending the coupling loop
  int max_picard = 20;
  int max_halvings = 12;       // dt halvings before StepFailure
  double cfl = 0.4;            // dt <= cfl h / (max|u| + c_max)
  double dt_max = 1e-2;
  double dt_fixed = 0.0;       // > 0 pins dt (convergence studies)
  double b_floor = 1e-6;       // reject step when min(b) <= b_floor
  double vacuum_floor = 1e-10; // reject step when min(rho) < vacuum_floor
  double rho_tol = 1e-12;      // tolerated negative-rho roundoff
  double scheme_tolerance_rel = 1e-8;  // energy non-increase slack, times E0
  long max_steps = 100000000;
  bool track_energy = true;    // fill StepReport ledgers (costs a few transforms)

  bool operator==(const SolverOptions&) const = default;
};

// Optional source terms, evaluated at the end-of-step time (the implicit
// scheme's collocation point).  Null members mean unforced.
struct Forcing {
  std::function<ScalarField(double)> rho;
  std::function<VectorField(double)> momentum;
  std::function<ScalarField(double)> b;
  bool any() const { return static_cast<bool>(rho) || static_cast<bool>(momentum) ||
                            static_cast<bool>(b); }
};

struct StepReport {
  double dt_used = 0.0;
  int picard_iterations = 0;
  int halvings = 0;            // rejections absorbed inside this step
  std::string reject_reason;   // last rejection cause, empty if none
  EnergyLedger energy_before;
  EnergyLedger energy_after;
};

struct RunCallbacks {
  std::function<void(const State&, const StepReport&)> on_step;
};

struct RunResult {
  State final_state;
  long steps = 0;
  long rejections = 0;
};

// Instantaneous right sides of the three evolved equations, with every
// pointwise product dealiased.  advance() is consistent with these: a
// Picard-converged step satisfies X^{n+1} = X^n + dt (rhs(X^{n+1}) + forcing).
ScalarField rhs_continuity(const State& state, const Parameters& p);
VectorField rhs_momentum(const State& state, const Parameters& p);
ScalarField rhs_b(const State& state, const Parameters& p);

// Pointwise w / rho, masked to the retained band; throws DegenerateDensity
// when min(rho) < floor.
VectorField recover_velocity(const VectorField& w, const ScalarField& rho, double floor);

// Acoustic CFL proposal: cfl h / (max|u| + sqrt(gamma a0 max(rho)^{gamma-1})),
// clamped to dt_max (or pinned to dt_fixed).
double propose_dt(const State& state, const Parameters& p, const SolverOptions& opts);

// One IMEX step: the three stiff Laplacians (eps lap rho, eps lap w plus the
// constant-coefficient viscous operator on w, and (sigma/nu) lap b) are
// implicit and diagonal in spectral space; transport and the nonlinear
// constitutive terms iterate in a Picard loop that converges to the backward
// Euler step.  Rejects and halves dt on positivity violations.
std::pair<State, StepReport> advance(const State& state, const Parameters& p, double dt,
                                     const Forcing& forcing = {},
                                     const SolverOptions& opts = {});

RunResult run(const State& initial, const Parameters& p, double t_end,
              const SolverOptions& opts = {}, const Forcing& forcing = {},
              const RunCallbacks& callbacks = {});

}  // namespace sdflow
