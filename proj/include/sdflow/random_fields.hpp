#pragma once

#include <cstdint>

#include "sdflow/field.hpp"

namespace sdflow {

// Real random field with spectral support |m_a| <= support on every axis,
// zero mean, rescaled so max |f| == amplitude.  Deterministic in (grid,
// support, amplitude, seed) across platforms: the generator consumes raw
// mt19937_64 output, never distribution adapters.
ScalarField random_band_limited(const GridSpec& g, int support, double amplitude,
                                std::uint64_t seed);

// Convenience: d independent components, seeds seed, seed+1, ...
VectorField random_band_limited_vector(const GridSpec& g, int support, double amplitude,
                                       std::uint64_t seed);

}  // namespace sdflow
