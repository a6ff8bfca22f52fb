#pragma once

#include "sdflow/field.hpp"
#include "sdflow/spectral.hpp"

namespace sdflow {

// Full solver state at one instant.  Invariants enforced at step boundaries:
// min(rho) >= 0 and min(b) > 0 on the grid, mean(rho) conserved over time.
struct State {
  double time = 0.0;
  ScalarField rho;
  VectorField u;
  ScalarField b;

  const GridSpec& grid() const { return rho.grid(); }
};

}  // namespace sdflow
