#include "sdflow/fft.hpp"

#include <fftw3.h>

#include <cstring>
#include <map>
#include <stdexcept>

namespace sdflow::fft {
namespace {

// One cached plan pair per (dim, n).  Plans are created with FFTW_ESTIMATE on
// dedicated scratch buffers and executed by copying through them, which keeps
// alignment requirements away from caller memory and makes results
// deterministic run to run.
struct PlanSet {
  fftw_complex* in = nullptr;
  fftw_complex* out = nullptr;
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
  std::size_t total = 0;
};

PlanSet& plans_for(int dim, int n) {
  static std::map<std::pair<int, int>, PlanSet> cache;
  auto key = std::make_pair(dim, n);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;

  PlanSet p;
  p.total = 1;
  for (int a = 0; a < dim; ++a) p.total *= static_cast<std::size_t>(n);
  p.in = fftw_alloc_complex(p.total);
  p.out = fftw_alloc_complex(p.total);
  if (!p.in || !p.out) throw std::bad_alloc();
  int extents[3] = {n, n, n};
  p.fwd = fftw_plan_dft(dim, extents, p.in, p.out, FFTW_FORWARD, FFTW_ESTIMATE);
  p.bwd = fftw_plan_dft(dim, extents, p.in, p.out, FFTW_BACKWARD, FFTW_ESTIMATE);
  if (!p.fwd || !p.bwd) throw std::runtime_error("fftw plan creation failed");
  return cache.emplace(key, p).first->second;
}

}  // namespace

std::vector<std::complex<double>> forward(int dim, int n, const std::vector<double>& values) {
  PlanSet& p = plans_for(dim, n);
  if (values.size() != p.total) throw std::invalid_argument("fft: size mismatch");
  for (std::size_t i = 0; i < p.total; ++i) {
    p.in[i][0] = values[i];
    p.in[i][1] = 0.0;
  }
  fftw_execute(p.fwd);
  std::vector<std::complex<double>> spec(p.total);
  const double scale = 1.0 / static_cast<double>(p.total);
  for (std::size_t i = 0; i < p.total; ++i)
    spec[i] = std::complex<double>(p.out[i][0] * scale, p.out[i][1] * scale);
  return spec;
}

std::vector<double> inverse(int dim, int n, const std::vector<std::complex<double>>& spectrum) {
  PlanSet& p = plans_for(dim, n);
  if (spectrum.size() != p.total) throw std::invalid_argument("fft: size mismatch");
  for (std::size_t i = 0; i < p.total; ++i) {
    p.in[i][0] = spectrum[i].real();
    p.in[i][1] = spectrum[i].imag();
  }
  fftw_execute(p.bwd);
  std::vector<double> values(p.total);
  for (std::size_t i = 0; i < p.total; ++i) values[i] = p.out[i][0];
  return values;
}

}  // namespace sdflow::fft
