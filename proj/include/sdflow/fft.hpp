#pragma once

#include <complex>
#include <vector>

namespace sdflow::fft {

// Complex-to-complex FFTW transforms on an n^dim grid, plans cached per
// (dim, n).  forward() divides by n^dim, so forward(values)[0] is the mean and
// inverse(forward(v)) == v to roundoff.  Not thread safe; the whole library
// exposes a sequential contract.
std::vector<std::complex<double>> forward(int dim, int n, const std::vector<double>& values);
std::vector<double> inverse(int dim, int n, const std::vector<std::complex<double>>& spectrum);

}  // namespace sdflow::fft
