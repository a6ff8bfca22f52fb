#pragma once

#include <cmath>
#include <functional>

#include "sdflow/field.hpp"

namespace sdflow {

// Spectral calculus on the periodic grid.  Conventions:
//  * first-derivative multipliers zero the unmatched mode at index -M/2 so
//    derivatives of real fields stay real;
//  * laplacian / inverse_laplacian use the full (real) -|k|^2 multiplier and
//    are exact two-sided inverses on mean-zero fields;
//  * galerkin_project(f, m) zeroes every mode with any axis |index| > m and is
//    idempotent and self-adjoint in the L2 pairing.
ScalarField derivative(const ScalarField& f, int axis);
VectorField gradient(const ScalarField& f);
ScalarField divergence(const VectorField& v);
VectorField divergence(const TensorField& t);  // (Div T)_i = sum_j d_j T_ij
ScalarField laplacian(const ScalarField& f);
ScalarField inverse_laplacian(const ScalarField& f);  // throws NonZeroMean
ScalarField galerkin_project(const ScalarField& f, int m);
VectorField galerkin_project(const VectorField& v, int m);

// Projection onto the retained band |mode| <= grid.m_max() per axis.
ScalarField dealias(const ScalarField& f);
VectorField dealias(const VectorField& v);

// Pointwise product computed alias-free on the retained band: on the native
// grid when 3*m_max < M (the 2/3-rule case), otherwise on a zero-padded grid.
// Exact to roundoff whenever the combined input bandwidth fits the band.
ScalarField dealiased_product(const ScalarField& f, const ScalarField& g);

// d_i d_j lap^{-1} applied to f - mean(f); mode-wise multiplier +k_i k_j/|k|^2.
ScalarField riesz_second(const ScalarField& f, int i, int j);

double integral(const ScalarField& f);  // cell_volume * sum of values
double mean(const ScalarField& f);
double inner_product(const ScalarField& f, const ScalarField& g);
double l2_norm(const ScalarField& f);
double l2_norm_spectral(const ScalarField& f);  // via Parseval, for cross-checks
double lp_norm(const ScalarField& f, double p); // (integral |f|^p)^(1/p)
double max_abs(const ScalarField& f);
double min_value(const ScalarField& f);
double max_value(const ScalarField& f);

ScalarField add(const ScalarField& a, const ScalarField& b);
ScalarField sub(const ScalarField& a, const ScalarField& b);
ScalarField scaled(const ScalarField& a, double c);

template <class F>
ScalarField map_values(const ScalarField& a, F&& fn) {
  std::vector<double> out(a.values());
  for (auto& v : out) v = fn(v);
  return ScalarField::from_values(a.grid(), std::move(out));
}

template <class F>
ScalarField map_values(const ScalarField& a, const ScalarField& b, F&& fn) {
  const auto& va = a.values();
  const auto& vb = b.values();
  std::vector<double> out(va.size());
  for (std::size_t i = 0; i < va.size(); ++i) out[i] = fn(va[i], vb[i]);
  return ScalarField::from_values(a.grid(), std::move(out));
}

// Visit every mode: fn(linear_index, mode_triple).
template <class F>
void for_each_mode(const GridSpec& g, F&& fn) {
  const int n = g.points_per_axis;
  const int n1 = g.dim > 1 ? n : 1;
  const int n2 = g.dim > 2 ? n : 1;
  std::size_t lin = 0;
  for (int i0 = 0; i0 < n; ++i0)
    for (int i1 = 0; i1 < n1; ++i1)
      for (int i2 = 0; i2 < n2; ++i2, ++lin) {
        std::array<int, 3> m{g.mode_of(i0), g.dim > 1 ? g.mode_of(i1) : 0,
                             g.dim > 2 ? g.mode_of(i2) : 0};
        fn(lin, m);
      }
}

}  // namespace sdflow
