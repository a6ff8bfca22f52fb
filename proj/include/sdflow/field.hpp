#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

#include "sdflow/fft.hpp"
#include "sdflow/grid.hpp"

namespace sdflow {

using cplx = std::complex<double>;

// Real scalar field with a lazily maintained dual representation: grid values
// and Fourier coefficients.  At least one representation is always present;
// when both are, the values are the exact inverse transform of the spectrum.
// Asking for the missing side transforms on demand and caches the result.
class ScalarField {
 public:
  ScalarField() = default;

  static ScalarField zeros(const GridSpec& g) {
    ScalarField f;
    f.grid_ = g;
    f.values_.assign(g.num_points(), 0.0);
    f.has_values_ = true;
    return f;
  }

  static ScalarField constant(const GridSpec& g, double c) {
    ScalarField f = zeros(g);
    for (auto& v : f.values_) v = c;
    return f;
  }

  static ScalarField from_values(const GridSpec& g, std::vector<double> v) {
    if (v.size() != g.num_points()) throw std::invalid_argument("field: value size mismatch");
    ScalarField f;
    f.grid_ = g;
    f.values_ = std::move(v);
    f.has_values_ = true;
    return f;
  }

  static ScalarField from_spectrum(const GridSpec& g, std::vector<cplx> s) {
    if (s.size() != g.num_points()) throw std::invalid_argument("field: spectrum size mismatch");
    ScalarField f;
    f.grid_ = g;
    f.spectrum_ = std::move(s);
    f.has_spectrum_ = true;
    return f;
  }

  const GridSpec& grid() const { return grid_; }
  bool has_values() const { return has_values_; }
  bool has_spectrum() const { return has_spectrum_; }

  const std::vector<double>& values() const {
    if (!has_values_) {
      values_ = fft::inverse(grid_.dim, grid_.points_per_axis, spectrum_);
      has_values_ = true;
    }
    return values_;
  }

  const std::vector<cplx>& spectrum() const {
    if (!has_spectrum_) {
      spectrum_ = fft::forward(grid_.dim, grid_.points_per_axis, values_);
      has_spectrum_ = true;
    }
    return spectrum_;
  }

  // Mutation drops the other representation.
  std::vector<double>& mutable_values() {
    values();
    spectrum_.clear();
    has_spectrum_ = false;
    return values_;
  }

  std::vector<cplx>& mutable_spectrum() {
    spectrum();
    values_.clear();
    has_values_ = false;
    return spectrum_;
  }

 private:
  GridSpec grid_;
  mutable std::vector<double> values_;
  mutable std::vector<cplx> spectrum_;
  mutable bool has_values_ = false;
  mutable bool has_spectrum_ = false;
};

struct VectorField {
  std::vector<ScalarField> comp;  // size == grid().dim

  VectorField() = default;
  explicit VectorField(std::vector<ScalarField> c) : comp(std::move(c)) {}

  static VectorField zeros(const GridSpec& g) {
    VectorField v;
    for (int a = 0; a < g.dim; ++a) v.comp.push_back(ScalarField::zeros(g));
    return v;
  }

  const GridSpec& grid() const { return comp.at(0).grid(); }
  int dim() const { return static_cast<int>(comp.size()); }
  ScalarField& operator[](int a) { return comp[static_cast<std::size_t>(a)]; }
  const ScalarField& operator[](int a) const { return comp[static_cast<std::size_t>(a)]; }
};

// dim x dim tensor, components row-major: at(i,j) = comp[i*dim + j].
struct TensorField {
  int dim = 0;
  std::vector<ScalarField> comp;

  static TensorField zeros(const GridSpec& g) {
    TensorField t;
    t.dim = g.dim;
    for (int i = 0; i < g.dim * g.dim; ++i) t.comp.push_back(ScalarField::zeros(g));
    return t;
  }

  const GridSpec& grid() const { return comp.at(0).grid(); }
  ScalarField& at(int i, int j) { return comp[static_cast<std::size_t>(i * dim + j)]; }
  const ScalarField& at(int i, int j) const { return comp[static_cast<std::size_t>(i * dim + j)]; }
};

}  // namespace sdflow
