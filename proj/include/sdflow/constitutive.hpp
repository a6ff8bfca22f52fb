#pragma once

#include "sdflow/field.hpp"
#include "sdflow/parameters.hpp"

namespace sdflow {

// Pointwise scalar laws.  All b-laws throw NonPositiveB at b <= 0.
double elastic_energy(double b, const Parameters& p);
double elastic_energy_prime(double b, const Parameters& p);
double elastic_energy_second(double b, const Parameters& p);

// p_el(b) = -e(b) - (2/3) b e'(b)
double elastic_pressure(double b, const Parameters& p);

// p_fl(rho) = a0 rho^gamma and its potential Psi(rho) = a0 rho^gamma/(gamma-1),
// satisfying rho Psi'(rho) - Psi(rho) = p_fl(rho).
double fluid_pressure(double rho, const Parameters& p);
double pressure_potential(double rho, const Parameters& p);

// Root of e'(b) = 0 in closed form (power_log: (a2/(a1 alpha))^(1/alpha),
// linear_log: a2/a1).
double equilibrium_b(const Parameters& p);

// Field wrappers, evaluated pointwise on grid values.
ScalarField elastic_energy(const ScalarField& b, const Parameters& p);
ScalarField elastic_energy_prime(const ScalarField& b, const Parameters& p);
ScalarField elastic_pressure(const ScalarField& b, const Parameters& p);
ScalarField fluid_pressure(const ScalarField& rho, const Parameters& p);
ScalarField pressure_potential(const ScalarField& rho, const Parameters& p);

// S(grad u) = mu (G + G^T - (2/3) tr G I) + lambda tr G I, pointwise.
TensorField viscous_stress(const TensorField& grad_u, const Parameters& p);

// sigma (grad b x grad b - |grad b|^2/2 I), pointwise.
TensorField korteweg_tensor(const VectorField& grad_b, const Parameters& p);

// xi = 2 mu |D_delta|^2 + lambda (div u)^2 + (1/nu)(e'(b) - sigma lap b)^2 b^(2-s).
// |D_delta|^2 uses the 3x3 embedding of the reduced-dimension velocity
// gradient so S : grad u == 2 mu |D_delta|^2 + lambda (div u)^2 holds in every
// run dimension.
ScalarField rate_of_dissipation(const TensorField& grad_u, const ScalarField& b,
                                const ScalarField& lap_b, const Parameters& p);

}  // namespace sdflow
