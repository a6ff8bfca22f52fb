#include "sdflow/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "sdflow/constitutive.hpp"
#include "sdflow/errors.hpp"
#include "sdflow/spectral.hpp"

namespace sdflow {
namespace {

// Quadrature of a pointwise product of already-computed value arrays.  The
// trapezoid rule on the periodic grid integrates any resolved trig polynomial
// exactly, so these contractions are spectrally accurate for smooth fields.
double integral_values(const GridSpec& g, const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s * g.cell_volume();
}

void check_window(const std::vector<State>& window, std::size_t min_size) {
  if (window.size() < min_size)
    throw WindowTooShort("diagnostic window needs at least " + std::to_string(min_size) +
                         " snapshots, got " + std::to_string(window.size()));
  const double dt0 = window.size() > 1 ? window[1].time - window[0].time : 0.0;
  if (window.size() > 1 && !(dt0 > 0.0))
    throw std::invalid_argument("diagnostic window times must increase");
  for (std::size_t i = 2; i < window.size(); ++i) {
    const double dt = window[i].time - window[i - 1].time;
    if (std::abs(dt - dt0) > 1e-9 * dt0)
      throw std::invalid_argument("diagnostic window must be uniformly spaced");
  }
}

// Trapezoid over the window of per-snapshot rates.
double time_trapezoid(const std::vector<State>& window, const std::vector<double>& rates) {
  double acc = 0.0;
  for (std::size_t i = 1; i < window.size(); ++i)
    acc += 0.5 * (rates[i] + rates[i - 1]) * (window[i].time - window[i - 1].time);
  return acc;
}

}  // namespace

EnergyLedger energy_ledger(const State& state, const Parameters& p) {
  const GridSpec& g = state.grid();
  const int d = g.dim;
  EnergyLedger led;

  const auto& rv = state.rho.values();
  std::vector<double> kin(rv.size(), 0.0);
  for (int a = 0; a < d; ++a) {
    const auto& uv = state.u[a].values();
    for (std::size_t q = 0; q < rv.size(); ++q) kin[q] += 0.5 * rv[q] * uv[q] * uv[q];
  }
  led.kinetic = integral_values(g, kin);

  led.pressure_potential = integral(pressure_potential(state.rho, p));
  led.elastic = integral(elastic_energy(state.b, p));

  auto gb = gradient(state.b);
  std::vector<double> gb2(rv.size(), 0.0);
  for (int a = 0; a < d; ++a) {
    const auto& gv = gb[a].values();
    for (std::size_t q = 0; q < gb2.size(); ++q) gb2[q] += gv[q] * gv[q];
  }
  led.gradient_b = 0.5 * p.sigma * integral_values(g, gb2);

  led.total = led.kinetic + led.pressure_potential + led.gradient_b + led.elastic;

  TensorField gu = TensorField::zeros(g);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) gu.at(i, j) = derivative(state.u[i], j);
  auto s = viscous_stress(gu, p);
  std::vector<double> power(rv.size(), 0.0);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      const auto& sv = s.at(i, j).values();
      const auto& gv = gu.at(i, j).values();
      for (std::size_t q = 0; q < power.size(); ++q) power[q] += sv[q] * gv[q];
    }
  led.viscous_dissipation = integral_values(g, power);

  auto relax = sub(elastic_energy_prime(state.b, p), scaled(laplacian(state.b), p.sigma));
  const auto& relv = relax.values();
  std::vector<double> rel2(relv.size());
  for (std::size_t q = 0; q < relv.size(); ++q) rel2[q] = relv[q] * relv[q];
  led.relaxation_dissipation = integral_values(g, rel2) / p.nu;

  return led;
}

const NormSample& NormTracker::append(const State& state) {
  const GridSpec& g = state.grid();
  const int d = g.dim;
  NormSample s;
  s.time = state.time;

  s.rho_Lgamma = lp_norm(state.rho, p_.gamma);
  s.b_Lalpha = lp_norm(state.b, p_.alpha);

  const auto& rv = state.rho.values();
  std::vector<double> mom(rv.size(), 0.0);
  for (int a = 0; a < d; ++a) {
    const auto& uv = state.u[a].values();
    for (std::size_t q = 0; q < mom.size(); ++q) mom[q] += rv[q] * rv[q] * uv[q] * uv[q];
  }
  const double q_exp = 2.0 * p_.gamma / (p_.gamma + 1.0);
  double acc = 0.0;
  for (std::size_t q = 0; q < mom.size(); ++q) acc += std::pow(std::sqrt(mom[q]), q_exp);
  s.momentum_Lq = std::pow(acc * g.cell_volume(), 1.0 / q_exp);

  auto gb = gradient(state.b);
  std::vector<double> gb2(rv.size(), 0.0);
  for (int a = 0; a < d; ++a) {
    const auto& gv = gb[a].values();
    for (std::size_t q = 0; q < gb2.size(); ++q) gb2[q] += gv[q] * gv[q];
  }
  s.grad_b_L2 = std::sqrt(integral_values(g, gb2));

  const auto& bv = state.b.values();
  double logacc = 0.0;
  for (double v : bv) logacc += std::abs(std::log(v));
  s.log_b_L1 = logacc * g.cell_volume();

  // Rates feeding the cumulative (time-integrated) entries.
  std::array<double, 5> rates{};
  std::vector<double> gu2(rv.size(), 0.0);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      auto dij = derivative(state.u[i], j);
      const auto& dv = dij.values();
      for (std::size_t q = 0; q < gu2.size(); ++q) gu2[q] += dv[q] * dv[q];
    }
  rates[0] = integral_values(g, gu2);

  auto relax = sub(elastic_energy_prime(state.b, p_), scaled(laplacian(state.b), p_.sigma));
  const auto& relv = relax.values();
  double racc = 0.0;
  for (double v : relv) racc += v * v;
  rates[1] = racc * g.cell_volume();

  double pacc = 0.0;
  for (double v : rv) pacc += std::pow(v, p_.gamma + 1.0);
  rates[2] = pacc * g.cell_volume();

  double bacc = 0.0;
  for (double v : bv) bacc += std::pow(v, 20.0);
  rates[3] = bacc * g.cell_volume();

  double gacc = 0.0;
  for (double v : gb2) gacc += std::pow(std::sqrt(v), 10.0 / 3.0);
  rates[4] = gacc * g.cell_volume();

  if (samples_.empty()) {
    s.cum_grad_u_L2 = s.cum_relax_L2 = s.cum_rho_gamma_plus_1 = s.cum_b_L20 =
        s.cum_grad_b_L103 = 0.0;
  } else {
    const NormSample& prev = samples_.back();
    const double h = s.time - prev.time;
    s.cum_grad_u_L2 = prev.cum_grad_u_L2 + 0.5 * h * (rates[0] + last_rates_[0]);
    s.cum_relax_L2 = prev.cum_relax_L2 + 0.5 * h * (rates[1] + last_rates_[1]);
    s.cum_rho_gamma_plus_1 = prev.cum_rho_gamma_plus_1 + 0.5 * h * (rates[2] + last_rates_[2]);
    s.cum_b_L20 = prev.cum_b_L20 + 0.5 * h * (rates[3] + last_rates_[3]);
    s.cum_grad_b_L103 = prev.cum_grad_b_L103 + 0.5 * h * (rates[4] + last_rates_[4]);
  }
  last_rates_ = rates;
  samples_.push_back(s);
  return samples_.back();
}

ScalarField combined_coefficient(const State& state, const Parameters& p) {
  return map_values(state.b, [&](double b) {
    return 4.0 * p.sigma * b * b / (9.0 * p.nu) + 4.0 * p.mu / 3.0 + p.lambda;
  });
}

EvfReport evf_identity(const std::vector<State>& window, const Parameters& p) {
  check_window(window, 3);
  const GridSpec& g = window.front().grid();
  const int d = g.dim;
  const std::size_t n = window.size();

  std::vector<double> lhs_r(n), i2_r(n), i3_r(n), i4_r(n), i5_r(n), i6_r(n), i7_r(n);
  double boundary_first = 0.0, boundary_last = 0.0;
  EvfReport rep;
  rep.combined_min = std::numeric_limits<double>::infinity();

  for (std::size_t t = 0; t < n; ++t) {
    const State& st = window[t];
    const auto& rv = st.rho.values();
    // eta = rho - <rho> built on the spectrum: the zero mode is exactly zero,
    // which the inverse laplacian requires.
    std::vector<cplx> eta_hat = st.rho.spectrum();
    eta_hat[0] = 0.0;
    ScalarField eta = ScalarField::from_spectrum(g, std::move(eta_hat));
    auto phi = gradient(inverse_laplacian(eta));

    // [I1] boundary term integrand: rho u . grad lap^{-1} eta.
    {
      std::vector<double> acc(rv.size(), 0.0);
      for (int a = 0; a < d; ++a) {
        const auto& uv = st.u[a].values();
        const auto& pv = phi[a].values();
        for (std::size_t q = 0; q < acc.size(); ++q) acc[q] += rv[q] * uv[q] * pv[q];
      }
      const double val = integral_values(g, acc);
      if (t == 0) boundary_first = val;
      if (t + 1 == n) boundary_last = val;
    }

    const auto& ev = eta.values();
    {
      std::vector<double> acc(rv.size());
      for (std::size_t q = 0; q < acc.size(); ++q)
        acc[q] = p.a0 * std::pow(rv[q], p.gamma) * ev[q];
      lhs_r[t] = integral_values(g, acc);
    }

    // [I2] rho u . grad lap^{-1} Div(rho u), the flux as in the solver.
    {
      VectorField flux = VectorField::zeros(g);
      for (int a = 0; a < d; ++a) flux[a] = dealiased_product(st.rho, st.u[a]);
      auto psi = gradient(inverse_laplacian(divergence(flux)));
      std::vector<double> acc(rv.size(), 0.0);
      for (int a = 0; a < d; ++a) {
        const auto& uv = st.u[a].values();
        const auto& pv = psi[a].values();
        for (std::size_t q = 0; q < acc.size(); ++q) acc[q] += rv[q] * uv[q] * pv[q];
      }
      i2_r[t] = integral_values(g, acc);
    }

    // [I3] -(rho u x u) : grad grad lap^{-1} rho.
    {
      double total = 0.0;
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
          auto rij = riesz_second(st.rho, i, j);
          const auto& rijv = rij.values();
          const auto& ui = st.u[i].values();
          const auto& uj = st.u[j].values();
          std::vector<double> acc(rv.size());
          for (std::size_t q = 0; q < acc.size(); ++q)
            acc[q] = rv[q] * ui[q] * uj[q] * rijv[q];
          total += integral_values(g, acc);
        }
      i3_r[t] = -total;
    }

    // [I4] -p_el(b) eta.
    {
      auto pel = elastic_pressure(st.b, p);
      const auto& pv = pel.values();
      std::vector<double> acc(rv.size());
      for (std::size_t q = 0; q < acc.size(); ++q) acc[q] = pv[q] * ev[q];
      i4_r[t] = -integral_values(g, acc);
    }

    // [I5] -(2/3) sigma b lap(b) eta.
    {
      auto lb = laplacian(st.b);
      const auto& lv = lb.values();
      const auto& bv = st.b.values();
      std::vector<double> acc(rv.size());
      for (std::size_t q = 0; q < acc.size(); ++q) acc[q] = bv[q] * lv[q] * ev[q];
      i5_r[t] = -(2.0 / 3.0) * p.sigma * integral_values(g, acc);
    }

    // [I6] (4 mu/3 + lambda) rho Div u.
    {
      auto divu = divergence(st.u);
      const auto& dv = divu.values();
      std::vector<double> acc(rv.size());
      for (std::size_t q = 0; q < acc.size(); ++q) acc[q] = rv[q] * dv[q];
      i6_r[t] = (4.0 * p.mu / 3.0 + p.lambda) * integral_values(g, acc);
    }

    // [I7] -K(grad b) : grad grad lap^{-1} rho (K carries its sigma).
    {
      auto k = korteweg_tensor(gradient(st.b), p);
      double total = 0.0;
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
          auto rij = riesz_second(st.rho, i, j);
          const auto& rijv = rij.values();
          const auto& kv = k.at(i, j).values();
          std::vector<double> acc(rv.size());
          for (std::size_t q = 0; q < acc.size(); ++q) acc[q] = kv[q] * rijv[q];
          total += integral_values(g, acc);
        }
      i7_r[t] = -total;
    }

    const double cmin = min_value(combined_coefficient(st, p));
    if (cmin < rep.combined_min) rep.combined_min = cmin;
  }

  rep.lhs = time_trapezoid(window, lhs_r);
  rep.terms[0] = boundary_last - boundary_first;
  rep.terms[1] = time_trapezoid(window, i2_r);
  rep.terms[2] = time_trapezoid(window, i3_r);
  rep.terms[3] = time_trapezoid(window, i4_r);
  rep.terms[4] = time_trapezoid(window, i5_r);
  rep.terms[5] = time_trapezoid(window, i6_r);
  rep.terms[6] = time_trapezoid(window, i7_r);

  double sum = 0.0;
  for (double v : rep.terms) sum += v;
  rep.residual = rep.lhs - sum;
  return rep;
}

RenormalizedReport renormalized_residual(const std::vector<State>& window, const Parameters& p,
                                         const std::function<double(double)>& beta,
                                         const std::function<double(double)>& beta_prime,
                                         const std::function<double(double)>& beta_second) {
  check_window(window, 2);
  const GridSpec& g = window.front().grid();
  const std::size_t n = window.size();

  RenormalizedReport rep;
  std::vector<double> work_r(n), eps_r(n);
  double boundary_first = 0.0, boundary_last = 0.0;

  for (std::size_t t = 0; t < n; ++t) {
    const State& st = window[t];
    const auto& rv = st.rho.values();
    double minr = rv.empty() ? 0.0 : rv[0];
    for (double v : rv) minr = std::min(minr, v);
    if (minr < 1e-8) rep.positivity_warning = true;

    double bnd = 0.0;
    for (double v : rv) {
      if (v < 1e-14) {
        ++rep.dropped_cells;
        continue;
      }
      bnd += beta(v);
    }
    bnd *= g.cell_volume();
    if (t == 0) boundary_first = bnd;
    if (t + 1 == n) boundary_last = bnd;

    auto divu = divergence(st.u);
    const auto& dv = divu.values();
    double work = 0.0;
    for (std::size_t q = 0; q < rv.size(); ++q) {
      if (rv[q] < 1e-14) continue;
      work += (beta_prime(rv[q]) * rv[q] - beta(rv[q])) * dv[q];
    }
    work_r[t] = work * g.cell_volume();

    if (p.epsilon > 0.0) {
      auto gr = gradient(st.rho);
      std::vector<double> gr2(rv.size(), 0.0);
      for (int a = 0; a < g.dim; ++a) {
        const auto& gv = gr[a].values();
        for (std::size_t q = 0; q < gr2.size(); ++q) gr2[q] += gv[q] * gv[q];
      }
      double acc = 0.0;
      for (std::size_t q = 0; q < rv.size(); ++q) {
        if (rv[q] < 1e-14) continue;
        acc += beta_second(rv[q]) * gr2[q];
      }
      eps_r[t] = acc * g.cell_volume();
    }
  }

  rep.residual = (boundary_last - boundary_first) + time_trapezoid(window, work_r) +
                 p.epsilon * time_trapezoid(window, eps_r);
  return rep;
}

RenormalizedReport renormalized_residual(const std::vector<State>& window, const Parameters& p) {
  return renormalized_residual(
      window, p, [](double r) { return r * std::log(r); },
      [](double r) { return std::log(r) + 1.0; }, [](double r) { return 1.0 / r; });
}

RhoBPairReport rho_b_pair_residual(const std::vector<State>& window, const Parameters& p) {
  check_window(window, 2);
  const GridSpec& g = window.front().grid();
  const std::size_t n = window.size();

  std::vector<double> core_r(n), eps_r(n);
  double boundary_first = 0.0, boundary_last = 0.0;

  for (std::size_t t = 0; t < n; ++t) {
    const State& st = window[t];
    const auto& rv = st.rho.values();
    const auto& bv = st.b.values();

    double bnd = 0.0;
    for (std::size_t q = 0; q < rv.size(); ++q) bnd += rv[q] * bv[q];
    bnd *= g.cell_volume();
    if (t == 0) boundary_first = bnd;
    if (t + 1 == n) boundary_last = bnd;

    auto relax = sub(elastic_energy_prime(st.b, p), scaled(laplacian(st.b), p.sigma));
    const auto& relv = relax.values();
    auto divu = divergence(st.u);
    const auto& dv = divu.values();
    double acc = 0.0;
    for (std::size_t q = 0; q < rv.size(); ++q)
      acc += rv[q] * relv[q] / p.nu - (2.0 / 3.0) * rv[q] * bv[q] * dv[q];
    core_r[t] = acc * g.cell_volume();

    if (p.epsilon > 0.0) {
      auto lr = laplacian(st.rho);
      const auto& lv = lr.values();
      double e = 0.0;
      for (std::size_t q = 0; q < rv.size(); ++q) e += bv[q] * lv[q];
      eps_r[t] = e * g.cell_volume();
    }
  }

  RhoBPairReport rep;
  const double bnd = boundary_last - boundary_first;
  rep.without_correction = bnd + time_trapezoid(window, core_r);
  rep.with_correction = rep.without_correction - p.epsilon * time_trapezoid(window, eps_r);
  return rep;
}

}  // namespace sdflow
