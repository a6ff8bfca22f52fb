#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "sdflow/parameters.hpp"
#include "sdflow/state.hpp"

namespace sdflow {

// Dense 3x3 matrix, row major. Just enough algebra for the kinematic checks.
struct Mat3 {
  std::array<double, 9> m{};

  static Mat3 identity();
  static Mat3 zero() { return Mat3{}; }

  double& at(int i, int j) { return m[static_cast<std::size_t>(3 * i + j)]; }
  double at(int i, int j) const { return m[static_cast<std::size_t>(3 * i + j)]; }

  Mat3 operator+(const Mat3& o) const;
  Mat3 operator-(const Mat3& o) const;
  Mat3 operator*(const Mat3& o) const;
  Mat3 scaled(double s) const;
  Mat3 transpose() const;
  Mat3 sym() const;  // (A + A^T)/2
  double trace() const;
  double det() const;
  Mat3 inverse() const;  // throws std::domain_error when singular
  double frobenius() const;
  double dot(const Mat3& o) const;  // A : B
};

// Smooth deformation pair (total F, relaxing part G) sampled on uniformly
// spaced times. Derived quantities: elastic part F G^{-1}, its left and right
// Cauchy-Green tensors, velocity gradient dF/dt F^{-1}, relaxation rate
// dG/dt G^{-1}. Closed forms keep the finite-difference checks clean.
struct DeformationTrajectory {
  std::vector<double> sample_times;
  std::function<Mat3(double)> total;     // F(t), det > 0 on the window
  std::function<Mat3(double)> relaxing;  // G(t), det > 0 on the window
};

// Seeded matrix-polynomial trajectories (cubic in t, coefficients scaled down
// until both determinants stay positive on the window).
DeformationTrajectory random_trajectory(std::uint64_t seed, int samples, double spacing);
// G = I: purely elastic motion.
DeformationTrajectory elastic_trajectory(std::uint64_t seed, int samples, double spacing);
// F = G: fully relaxed, the elastic part is the identity.
DeformationTrajectory relaxed_trajectory(std::uint64_t seed, int samples, double spacing);
// Elastic part sqrt(b(t)) Q(t) with Q(t) orthogonal (Cayley of a skew
// polynomial): the left Cauchy-Green tensor is exactly spherical, b(t) I.
DeformationTrajectory spherical_trajectory(std::uint64_t seed, int samples, double spacing);

// Evolution of the elastic left Cauchy-Green tensor
//   dB/dt = (grad v) B + B (grad v)^T - 2 F_e sym(dG/dt G^{-1}) F_e^T.
// Central differences in t; returns the max Frobenius residual, O(h^2).
double check_bp_evolution(const DeformationTrajectory& traj);

// Its trace: d(tr B)/dt = 2 D : B - 2 C : D_relax.
double check_trace_identity(const DeformationTrajectory& traj);

// Spherical reduction: with B = b I the trace law collapses to
//   db/dt = (2/3) b Div v - (2/3) b tr D_relax.
// Requires a spherical trajectory (throws std::invalid_argument otherwise).
double check_spherical_reduction(const DeformationTrajectory& traj);

// Pointwise free-energy rate identity on a window of uniformly spaced states
// from an unregularized run:
//   rho d(psi)/dt = Div(sigma db/dt grad b)
//                 - (p_fl + p_el - (sigma/2)|grad b|^2 + (2/3) sigma b lap b) Div v
//                 - sigma (grad b x grad b) : D
//                 - (2/3) (b e'(b) - sigma b lap b) tr D_relax,
// where the isotropic composite matches the momentum flux term by term,
// psi = Psi(rho)/rho + (e(b) + (sigma/2)|grad b|^2)/rho, and the relaxation
// trace is reconstructed as (3/(2 nu)) (e'(b) - sigma lap b)/b (the form the
// evolved b equation satisfies). Material derivatives use centered time
// differences plus spectral transport; the residual decreases at the
// stepper's order on solver windows.
double check_free_energy_rate(const std::vector<State>& window, const Parameters& p);

// Stress-power bookkeeping on the same window: the total stress contracted
// with D minus the free-energy rate must equal the dissipation rate minus
// the capillary flux divergence. Algebraically a regrouping of the rate
// identity; asserted separately because it exercises the assembled stress.
double check_stress_power(const std::vector<State>& window, const Parameters& p);

struct EnergyIdentityReport {
  // max_n |(E^{n+1} - E^n) + dt avg(D_n, D_{n+1})| over the window
  double max_residual = 0.0;
  // worst disagreement between this assembly and the diagnostics ledger
  double max_ledger_mismatch = 0.0;
};

// Discrete isothermal energy identity d/dt E + D = 0 on an unforced window
// with epsilon = 0, assembled independently of diagnostics::energy_ledger
// (deviatoric closed form instead of the stress contraction).
EnergyIdentityReport check_energy_identity(const std::vector<State>& window, const Parameters& p);

}  // namespace sdflow
