#include "sdflow/constitutive.hpp"

#include <cmath>

#include "sdflow/errors.hpp"
#include "sdflow/spectral.hpp"

namespace sdflow {
namespace {

void check_b(double b) {
  if (!(b > 0.0)) throw NonPositiveB("elastic law evaluated at b = " + std::to_string(b));
}

}  // namespace

double elastic_energy(double b, const Parameters& p) {
  check_b(b);
  if (p.elastic == ElasticModel::power_log) return p.a1 * std::pow(b, p.alpha) - p.a2 * std::log(b);
  return p.a1 * (b - 1.0) - p.a2 * std::log(b);
}

double elastic_energy_prime(double b, const Parameters& p) {
  check_b(b);
  if (p.elastic == ElasticModel::power_log)
    return p.a1 * p.alpha * std::pow(b, p.alpha - 1.0) - p.a2 / b;
  return p.a1 - p.a2 / b;
}

double elastic_energy_second(double b, const Parameters& p) {
  check_b(b);
  if (p.elastic == ElasticModel::power_log)
    return p.a1 * p.alpha * (p.alpha - 1.0) * std::pow(b, p.alpha - 2.0) + p.a2 / (b * b);
  return p.a2 / (b * b);
}

double elastic_pressure(double b, const Parameters& p) {
  return -elastic_energy(b, p) - (2.0 / 3.0) * b * elastic_energy_prime(b, p);
}

double fluid_pressure(double rho, const Parameters& p) { return p.a0 * std::pow(rho, p.gamma); }

double pressure_potential(double rho, const Parameters& p) {
  return p.a0 * std::pow(rho, p.gamma) / (p.gamma - 1.0);
}

double equilibrium_b(const Parameters& p) {
  if (p.elastic == ElasticModel::power_log)
    return std::pow(p.a2 / (p.a1 * p.alpha), 1.0 / p.alpha);
  return p.a2 / p.a1;
}

ScalarField elastic_energy(const ScalarField& b, const Parameters& p) {
  return map_values(b, [&](double v) { return elastic_energy(v, p); });
}
ScalarField elastic_energy_prime(const ScalarField& b, const Parameters& p) {
  return map_values(b, [&](double v) { return elastic_energy_prime(v, p); });
}
ScalarField elastic_pressure(const ScalarField& b, const Parameters& p) {
  return map_values(b, [&](double v) { return elastic_pressure(v, p); });
}
ScalarField fluid_pressure(const ScalarField& rho, const Parameters& p) {
  return map_values(rho, [&](double v) { return fluid_pressure(v, p); });
}
ScalarField pressure_potential(const ScalarField& rho, const Parameters& p) {
  return map_values(rho, [&](double v) { return pressure_potential(v, p); });
}

TensorField viscous_stress(const TensorField& grad_u, const Parameters& p) {
  const GridSpec& g = grad_u.grid();
  const int d = grad_u.dim;
  TensorField s = TensorField::zeros(g);
  s.dim = d;

  std::vector<const std::vector<double>*> gv(static_cast<std::size_t>(d * d));
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) gv[static_cast<std::size_t>(i * d + j)] = &grad_u.at(i, j).values();

  const std::size_t npts = g.num_points();
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      std::vector<double> out(npts);
      for (std::size_t q = 0; q < npts; ++q) {
        double div = 0.0;
        for (int a = 0; a < d; ++a) div += (*gv[static_cast<std::size_t>(a * d + a)])[q];
        double val = p.mu * ((*gv[static_cast<std::size_t>(i * d + j)])[q] +
                             (*gv[static_cast<std::size_t>(j * d + i)])[q]);
        if (i == j) val += (p.lambda - 2.0 * p.mu / 3.0) * div;
        out[q] = val;
      }
      s.at(i, j) = ScalarField::from_values(g, std::move(out));
    }
  }
  return s;
}

TensorField korteweg_tensor(const VectorField& grad_b, const Parameters& p) {
  const GridSpec& g = grad_b.grid();
  const int d = grad_b.dim();
  TensorField t = TensorField::zeros(g);
  t.dim = d;
  const std::size_t npts = g.num_points();

  std::vector<const std::vector<double>*> gb(static_cast<std::size_t>(d));
  for (int a = 0; a < d; ++a) gb[static_cast<std::size_t>(a)] = &grad_b[a].values();

  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      std::vector<double> out(npts);
      for (std::size_t q = 0; q < npts; ++q) {
        double mag2 = 0.0;
        for (int a = 0; a < d; ++a) {
          const double ga = (*gb[static_cast<std::size_t>(a)])[q];
          mag2 += ga * ga;
        }
        double val = (*gb[static_cast<std::size_t>(i)])[q] * (*gb[static_cast<std::size_t>(j)])[q];
        if (i == j) val -= 0.5 * mag2;
        out[q] = p.sigma * val;
      }
      t.at(i, j) = ScalarField::from_values(g, std::move(out));
    }
  }
  return t;
}

ScalarField rate_of_dissipation(const TensorField& grad_u, const ScalarField& b,
                                const ScalarField& lap_b, const Parameters& p) {
  const GridSpec& g = grad_u.grid();
  const int d = grad_u.dim;
  const std::size_t npts = g.num_points();

  std::vector<const std::vector<double>*> gv(static_cast<std::size_t>(d * d));
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) gv[static_cast<std::size_t>(i * d + j)] = &grad_u.at(i, j).values();
  const auto& bv = b.values();
  const auto& lb = lap_b.values();

  std::vector<double> out(npts);
  for (std::size_t q = 0; q < npts; ++q) {
    double div = 0.0;
    for (int a = 0; a < d; ++a) div += (*gv[static_cast<std::size_t>(a * d + a)])[q];
    // |D - (div/3) I|^2 over the 3x3 embedding: the d x d block plus (3-d)
    // diagonal entries equal to -div/3 each.
    double dd = 0.0;
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        double dij = 0.5 * ((*gv[static_cast<std::size_t>(i * d + j)])[q] +
                            (*gv[static_cast<std::size_t>(j * d + i)])[q]);
        if (i == j) dij -= div / 3.0;
        dd += dij * dij;
      }
    dd += (3 - d) * (div / 3.0) * (div / 3.0);

    check_b(bv[q]);
    const double relax = elastic_energy_prime(bv[q], p) - p.sigma * lb[q];
    out[q] = 2.0 * p.mu * dd + p.lambda * div * div +
             relax * relax * std::pow(bv[q], 2.0 - p.s) / p.nu;
  }
  return ScalarField::from_values(g, std::move(out));
}

}  // namespace sdflow
