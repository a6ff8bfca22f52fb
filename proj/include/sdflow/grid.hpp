#pragma once

#include <array>
#include <cstddef>
#include <numbers>

#include "sdflow/errors.hpp"

namespace sdflow {

inline constexpr double kPi = std::numbers::pi;

// Uniform collocation grid on the flat torus [-1,1]^dim, period 2 per axis.
// The per-axis wavenumber set is {-M/2, ..., M/2-1} scaled by pi; the retained
// (dealiased) band keeps |mode| <= m_max() on every axis.  Storage is
// row-major with axis 0 slowest.
struct GridSpec {
  int dim = 1;
  int points_per_axis = 16;  // M, even and positive
  int dealias_num = 2;       // dealias fraction as an exact rational in (0,1]
  int dealias_den = 3;

  bool operator==(const GridSpec&) const = default;

  void validate() const {
    if (dim < 1 || dim > 3)
      throw ValidationError("grid: dim must be 1, 2 or 3");
    if (points_per_axis < 4 || points_per_axis % 2 != 0)
      throw ValidationError("grid: points_per_axis must be even and >= 4");
    if (dealias_num <= 0 || dealias_den <= 0 || dealias_num > dealias_den)
      throw ValidationError("grid: dealias fraction must lie in (0,1]");
  }

  std::size_t num_points() const {
    std::size_t n = 1;
    for (int a = 0; a < dim; ++a) n *= static_cast<std::size_t>(points_per_axis);
    return n;
  }

  double spacing() const { return 2.0 / points_per_axis; }
  double cell_volume() const {
    double v = 1.0;
    for (int a = 0; a < dim; ++a) v *= spacing();
    return v;
  }
  double volume() const {
    double v = 1.0;
    for (int a = 0; a < dim; ++a) v *= 2.0;
    return v;
  }

  // Largest retained mode per axis: floor(dealias_fraction * M/2), computed in
  // exact integer arithmetic so 2/3 at M=48 gives 16, not 15.
  int m_max() const { return (points_per_axis / 2) * dealias_num / dealias_den; }

  int mode_of(int index) const {
    return index < points_per_axis / 2 ? index : index - points_per_axis;
  }
  double coordinate(int index) const { return -1.0 + spacing() * index; }
};

// Per-axis grid indices of a row-major linear index (axis 0 slowest).
inline std::array<int, 3> axis_indices(const GridSpec& g, std::size_t lin) {
  std::array<int, 3> idx{0, 0, 0};
  const auto m = static_cast<std::size_t>(g.points_per_axis);
  for (int a = g.dim - 1; a >= 0; --a) {
    idx[a] = static_cast<int>(lin % m);
    lin /= m;
  }
  return idx;
}

}  // namespace sdflow
