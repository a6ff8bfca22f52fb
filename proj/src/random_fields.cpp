#include "sdflow/random_fields.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "sdflow/spectral.hpp"

namespace sdflow {
namespace {

// Uniform in [0,1) from raw engine words: bit-identical on every platform,
// unlike std::uniform_real_distribution.
double unit_uniform(std::mt19937_64& eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

double gaussian(std::mt19937_64& eng) {
  double u1 = unit_uniform(eng);
  while (u1 <= 0.0) u1 = unit_uniform(eng);
  const double u2 = unit_uniform(eng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

}  // namespace

ScalarField random_band_limited(const GridSpec& g, int support, double amplitude,
                                std::uint64_t seed) {
  g.validate();
  const int half = g.points_per_axis / 2;
  if (support < 1 || support >= half)
    throw std::invalid_argument("random field support must lie in [1, M/2)");
  if (support > g.m_max())
    throw std::invalid_argument("random field support exceeds the retained band");

  std::mt19937_64 eng(seed);
  ScalarField f = ScalarField::zeros(g);
  auto& s = f.mutable_spectrum();

  // Independent complex gaussians on every in-band mode, visited in linear
  // index order so the draw sequence is reproducible.
  for_each_mode(g, [&](std::size_t lin, const std::array<int, 3>& m) {
    bool in_band = true;
    for (int a = 0; a < g.dim; ++a)
      if (std::abs(m[a]) > support) in_band = false;
    if (!in_band) return;
    bool zero = true;
    for (int a = 0; a < g.dim; ++a)
      if (m[a] != 0) zero = false;
    if (zero) return;  // keep the mean at exactly zero
    s[lin] = cplx(gaussian(eng), gaussian(eng));
  });

  // Symmetrize: f_hat(m) := (f_hat(m) + conj(f_hat(-m)))/2 makes the field
  // real without touching the support.
  const int n = g.points_per_axis;
  std::vector<cplx> sym(s.size());
  for_each_mode(g, [&](std::size_t lin, const std::array<int, 3>& m) {
    std::size_t partner = 0;
    for (int a = 0; a < g.dim; ++a) {
      const int neg = (n - ((m[a] % n + n) % n)) % n;
      partner = partner * static_cast<std::size_t>(n) + static_cast<std::size_t>(neg);
    }
    sym[lin] = 0.5 * (s[lin] + std::conj(s[partner]));
  });
  s = sym;

  // Rescale on the spectrum so the support stays exact.
  const double peak = max_abs(f);
  if (peak == 0.0) return f;  // amplitude 0 or degenerate draw
  const double scale = amplitude / peak;
  std::vector<cplx> rescaled = f.spectrum();
  for (auto& c : rescaled) c *= scale;
  return ScalarField::from_spectrum(g, std::move(rescaled));
}

VectorField random_band_limited_vector(const GridSpec& g, int support, double amplitude,
                                       std::uint64_t seed) {
  VectorField v = VectorField::zeros(g);
  for (int a = 0; a < g.dim; ++a)
    v[a] = random_band_limited(g, support, amplitude, seed + static_cast<std::uint64_t>(a));
  return v;
}

}  // namespace sdflow
