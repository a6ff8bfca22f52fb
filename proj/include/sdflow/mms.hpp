#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "sdflow/parameters.hpp"
#include "sdflow/solver.hpp"
#include "sdflow/state.hpp"

namespace sdflow {

// One separable trig monomial with a cosine time envelope:
//   amplitude * cos(omega t + tphase) * prod_a cos(pi mode_a x_a + phase_a).
// omega = 0, tphase = 0 gives a steady term; tphase = -pi/2 turns the
// envelope into sin(omega t).
struct TrigTerm {
  double amplitude = 0.0;
  std::array<int, 3> mode{0, 0, 0};
  std::array<double, 3> phase{0.0, 0.0, 0.0};
  double omega = 0.0;
  double tphase = 0.0;
};

struct TrigSeries {
  double offset = 0.0;
  std::vector<TrigTerm> terms;

  double value(double t, const std::array<double, 3>& x, int dim) const;
  double time_derivative(double t, const std::array<double, 3>& x, int dim) const;
  int max_mode() const;
};

// Closed-form (rho*, u*, b*).  Presets keep rho* and b* bounded away from
// zero and give every time-dependent rho* term a nonzero spatial mode, so the
// manufactured mass is constant and forced runs still conserve it.
struct ManufacturedSolution {
  int dim = 1;
  TrigSeries rho;
  std::array<TrigSeries, 3> u;
  TrigSeries b;

  int max_mode() const;
};

// Single-mode time-periodic perturbations around (1, 0, b_eq(p)).
ManufacturedSolution default_manufactured(int dim, const Parameters& p);

// ms shifted in space: translate(ms, d)(x) = ms(x - d).
ManufacturedSolution translate(ManufacturedSolution ms, const std::array<double, 3>& shift);

State sample_state(const ManufacturedSolution& ms, const GridSpec& g, double t);

struct ForcingSet {
  ScalarField rho;
  VectorField momentum;
  ScalarField b;
};

// Source fields that make ms an exact solution at time t, assembled
// spectrally on a twice-oversampled grid and restricted to g.  Includes the
// epsilon-regularization contributions, which vanish at epsilon = 0.
ForcingSet forcing_fields(const ManufacturedSolution& ms, const Parameters& p, const GridSpec& g,
                          double t);

// Solver-ready callbacks around forcing_fields, with a one-entry time cache
// shared by the three components.
Forcing solver_forcing(const ManufacturedSolution& ms, const Parameters& p, const GridSpec& g);

// Work done by the forcing against the energy functional:
//   int u . f_u + int (Psi'(rho) - |u|^2/2) f_rho + int (e'(b) - sigma lap b) f_b.
double forcing_work(const State& state, const ForcingSet& f, const Parameters& p);

struct RungSpec {
  int points_per_axis = 16;
  double dt = 1e-4;
  int dealias_num = 2;
  int dealias_den = 3;
};

struct RungResult {
  RungSpec rung;
  double err_linf_rho = 0.0, err_l2_rho = 0.0;
  double err_linf_u = 0.0, err_l2_u = 0.0;
  double err_linf_b = 0.0, err_l2_b = 0.0;
};

struct StudyResult {
  std::vector<RungResult> rungs;
  // Observed orders (rho, u, b) between consecutive rungs from the sup-norm
  // errors; the refinement ratio is the dt ratio when dt varies, the grid
  // ratio otherwise.
  std::vector<std::array<double, 3>> observed_orders;
};

StudyResult convergence_study(const ManufacturedSolution& ms, const Parameters& p,
                              const std::vector<RungSpec>& ladder, double t_end,
                              const SolverOptions& base_opts = {});

}  // namespace sdflow
