#include "sdflow/mms.hpp"

#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>

#include "sdflow/constitutive.hpp"
#include "sdflow/errors.hpp"
#include "sdflow/spectral.hpp"

namespace sdflow {

double TrigSeries::value(double t, const std::array<double, 3>& x, int dim) const {
  double acc = offset;
  for (const auto& term : terms) {
    double v = term.amplitude * std::cos(term.omega * t + term.tphase);
    for (int a = 0; a < dim; ++a)
      v *= std::cos(kPi * term.mode[static_cast<std::size_t>(a)] * x[static_cast<std::size_t>(a)] +
                    term.phase[static_cast<std::size_t>(a)]);
    acc += v;
  }
  return acc;
}

double TrigSeries::time_derivative(double t, const std::array<double, 3>& x, int dim) const {
  double acc = 0.0;
  for (const auto& term : terms) {
    double v = -term.amplitude * term.omega * std::sin(term.omega * t + term.tphase);
    for (int a = 0; a < dim; ++a)
      v *= std::cos(kPi * term.mode[static_cast<std::size_t>(a)] * x[static_cast<std::size_t>(a)] +
                    term.phase[static_cast<std::size_t>(a)]);
    acc += v;
  }
  return acc;
}

int TrigSeries::max_mode() const {
  int m = 0;
  for (const auto& term : terms)
    for (int a = 0; a < 3; ++a) m = std::max(m, std::abs(term.mode[static_cast<std::size_t>(a)]));
  return m;
}

int ManufacturedSolution::max_mode() const {
  int m = std::max(rho.max_mode(), b.max_mode());
  for (const auto& comp : u) m = std::max(m, comp.max_mode());
  return m;
}

ManufacturedSolution default_manufactured(int dim, const Parameters& p) {
  ManufacturedSolution ms;
  ms.dim = dim;
  const double beq = equilibrium_b(p);

  ms.rho.offset = 1.0;
  ms.rho.terms.push_back({0.1, {1, 0, 0}, {0.0, 0.0, 0.0}, 1.0, 0.3});
  ms.b.offset = beq;
  ms.b.terms.push_back({0.08, {1, 0, 0}, {0.4, 0.0, 0.0}, 1.0, -kPi / 2.0});
  ms.u[0].terms.push_back({0.07, {1, 0, 0}, {-kPi / 2.0, 0.0, 0.0}, 1.0, 0.0});
  if (dim >= 2) {
    ms.rho.terms.push_back({0.05, {0, 1, 0}, {0.0, 0.7, 0.0}, 1.3, 0.0});
    ms.rho.terms.push_back({0.04, {1, 1, 0}, {0.2, -0.3, 0.0}, 0.9, 0.5});
    ms.b.terms.push_back({0.06, {0, 1, 0}, {0.0, -0.2, 0.0}, 1.1, 0.2});
    ms.u[0].terms.push_back({0.05, {0, 1, 0}, {0.0, 0.8, 0.0}, 1.2, 0.4});
    ms.u[1].terms.push_back({0.06, {1, 0, 0}, {0.5, 0.0, 0.0}, 0.8, -0.2});
    ms.u[1].terms.push_back({0.04, {1, 1, 0}, {-0.4, 0.1, 0.0}, 1.4, 0.0});
  }
  if (dim >= 3) {
    ms.rho.terms.push_back({0.03, {0, 0, 1}, {0.0, 0.0, 0.3}, 1.1, -0.4});
    ms.b.terms.push_back({0.04, {0, 0, 1}, {0.0, 0.0, 0.6}, 0.7, 0.1});
    ms.u[2].terms.push_back({0.05, {0, 1, 1}, {0.0, 0.2, -0.5}, 1.0, 0.6});
  }
  return ms;
}

ManufacturedSolution translate(ManufacturedSolution ms, const std::array<double, 3>& shift) {
  auto apply = [&](TrigSeries& s) {
    for (auto& term : s.terms)
      for (std::size_t a = 0; a < 3; ++a)
        term.phase[a] -= kPi * term.mode[a] * shift[a];
  };
  apply(ms.rho);
  apply(ms.b);
  for (auto& comp : ms.u) apply(comp);
  return ms;
}

namespace {

std::array<double, 3> point(const GridSpec& g, std::size_t lin) {
  auto idx = axis_indices(g, lin);
  std::array<double, 3> x{0.0, 0.0, 0.0};
  for (int a = 0; a < g.dim; ++a)
    x[static_cast<std::size_t>(a)] = g.coordinate(idx[static_cast<std::size_t>(a)]);
  return x;
}

ScalarField sample_series(const TrigSeries& s, const GridSpec& g, double t, bool time_deriv) {
  std::vector<double> v(g.num_points());
  for (std::size_t lin = 0; lin < v.size(); ++lin) {
    auto x = point(g, lin);
    v[lin] = time_deriv ? s.time_derivative(t, x, g.dim) : s.value(t, x, g.dim);
  }
  return ScalarField::from_values(g, std::move(v));
}

// Spectral restriction: copy every coarse-representable mode, zero the
// coarse Nyquist band.
ScalarField restrict_to(const ScalarField& fine, const GridSpec& coarse) {
  const GridSpec& gf = fine.grid();
  const auto& fs = fine.spectrum();
  std::vector<cplx> cs(coarse.num_points(), 0.0);
  const int mf = gf.points_per_axis;
  const int half = coarse.points_per_axis / 2;
  for_each_mode(coarse, [&](std::size_t lin, const std::array<int, 3>& m) {
    std::size_t flin = 0;
    for (int a = 0; a < coarse.dim; ++a) {
      const int ma = m[static_cast<std::size_t>(a)];
      if (std::abs(ma) >= half) return;
      const int fi = ma >= 0 ? ma : ma + mf;
      flin = flin * static_cast<std::size_t>(mf) + static_cast<std::size_t>(fi);
    }
    cs[lin] = fs[flin];
  });
  return ScalarField::from_spectrum(coarse, std::move(cs));
}

ScalarField pointwise_product(const ScalarField& a, const ScalarField& b) {
  return map_values(a, b, [](double x, double y) { return x * y; });
}

}  // namespace

State sample_state(const ManufacturedSolution& ms, const GridSpec& g, double t) {
  if (ms.dim != g.dim) throw std::invalid_argument("manufactured solution dimension mismatch");
  State s;
  s.time = t;
  s.rho = sample_series(ms.rho, g, t, false);
  s.u = VectorField::zeros(g);
  for (int a = 0; a < g.dim; ++a)
    s.u[a] = sample_series(ms.u[static_cast<std::size_t>(a)], g, t, false);
  s.b = sample_series(ms.b, g, t, false);
  return s;
}

ForcingSet forcing_fields(const ManufacturedSolution& ms, const Parameters& p, const GridSpec& g,
                          double t) {
  if (ms.dim != g.dim) throw std::invalid_argument("manufactured solution dimension mismatch");
  GridSpec fine{g.dim, 2 * g.points_per_axis, g.dealias_num, g.dealias_den};
  const int d = g.dim;

  ScalarField rho = sample_series(ms.rho, fine, t, false);
  ScalarField rho_t = sample_series(ms.rho, fine, t, true);
  ScalarField b = sample_series(ms.b, fine, t, false);
  ScalarField b_t = sample_series(ms.b, fine, t, true);
  VectorField u = VectorField::zeros(fine);
  VectorField u_t = VectorField::zeros(fine);
  for (int a = 0; a < d; ++a) {
    u[a] = sample_series(ms.u[static_cast<std::size_t>(a)], fine, t, false);
    u_t[a] = sample_series(ms.u[static_cast<std::size_t>(a)], fine, t, true);
  }

  VectorField flux = VectorField::zeros(fine);
  for (int a = 0; a < d; ++a) flux[a] = pointwise_product(rho, u[a]);

  // Continuity: f_rho = d_t rho + Div(rho u) - eps lap rho.
  ScalarField f_rho = add(rho_t, divergence(flux));
  if (p.epsilon > 0.0) f_rho = sub(f_rho, scaled(laplacian(rho), p.epsilon));

  // Momentum: f_u = d_t(rho u) + Div(rho u x u) + grad(p_fl + p_el +
  // (2/3) sigma b lap b) - Div S(grad u) + Div K(grad b) - eps lap(rho u).
  ScalarField lap_b = laplacian(b);
  ScalarField press = add(fluid_pressure(rho, p), elastic_pressure(b, p));
  press = add(press, scaled(pointwise_product(b, lap_b), 2.0 / 3.0 * p.sigma));
  VectorField grad_press = gradient(press);

  TensorField adv = TensorField::zeros(fine);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) adv.at(i, j) = pointwise_product(flux[i], u[j]);
  VectorField div_adv = divergence(adv);

  TensorField gu = TensorField::zeros(fine);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) gu.at(i, j) = derivative(u[i], j);
  VectorField div_s = divergence(viscous_stress(gu, p));
  VectorField div_k = divergence(korteweg_tensor(gradient(b), p));

  VectorField f_u = VectorField::zeros(fine);
  for (int a = 0; a < d; ++a) {
    ScalarField m_t = add(pointwise_product(rho_t, u[a]), pointwise_product(rho, u_t[a]));
    ScalarField acc = add(m_t, div_adv[a]);
    acc = add(acc, grad_press[a]);
    acc = sub(acc, div_s[a]);
    acc = add(acc, div_k[a]);
    if (p.epsilon > 0.0) acc = sub(acc, scaled(laplacian(flux[a]), p.epsilon));
    f_u[a] = acc;
  }

  // b: f_b = d_t b + u . grad b + (1/nu)(e'(b) - sigma lap b) - (2/3) b Div u.
  ScalarField f_b = b_t;
  auto grad_b = gradient(b);
  for (int a = 0; a < d; ++a) f_b = add(f_b, pointwise_product(u[a], grad_b[a]));
  f_b = add(f_b, scaled(sub(elastic_energy_prime(b, p), scaled(lap_b, p.sigma)), 1.0 / p.nu));
  f_b = sub(f_b, scaled(pointwise_product(b, divergence(u)), 2.0 / 3.0));

  ForcingSet out;
  out.rho = restrict_to(f_rho, g);
  out.momentum = VectorField::zeros(g);
  for (int a = 0; a < d; ++a) out.momentum[a] = restrict_to(f_u[a], g);
  out.b = restrict_to(f_b, g);
  return out;
}

Forcing solver_forcing(const ManufacturedSolution& ms, const Parameters& p, const GridSpec& g) {
  struct Cache {
    bool valid = false;
    double t = 0.0;
    ForcingSet set;
  };
  auto cache = std::make_shared<Cache>();
  auto fetch = [ms, p, g, cache](double t) -> const ForcingSet& {
    if (!cache->valid || cache->t != t) {
      cache->set = forcing_fields(ms, p, g, t);
      cache->t = t;
      cache->valid = true;
    }
    return cache->set;
  };
  Forcing f;
  f.rho = [fetch](double t) { return fetch(t).rho; };
  f.momentum = [fetch](double t) { return fetch(t).momentum; };
  f.b = [fetch](double t) { return fetch(t).b; };
  return f;
}

double forcing_work(const State& state, const ForcingSet& f, const Parameters& p) {
  const GridSpec& g = state.grid();
  const int d = g.dim;
  const auto& rv = state.rho.values();
  std::vector<double> acc(rv.size(), 0.0);

  for (int a = 0; a < d; ++a) {
    const auto& uv = state.u[a].values();
    const auto& fv = f.momentum[a].values();
    for (std::size_t q = 0; q < acc.size(); ++q) acc[q] += uv[q] * fv[q];
  }
  {
    const auto& fv = f.rho.values();
    std::vector<double> u2(rv.size(), 0.0);
    for (int a = 0; a < d; ++a) {
      const auto& uv = state.u[a].values();
      for (std::size_t q = 0; q < u2.size(); ++q) u2[q] += uv[q] * uv[q];
    }
    for (std::size_t q = 0; q < acc.size(); ++q) {
      const double psi_prime = p.a0 * p.gamma / (p.gamma - 1.0) * std::pow(rv[q], p.gamma - 1.0);
      acc[q] += (psi_prime - 0.5 * u2[q]) * fv[q];
    }
  }
  {
    auto relax = sub(elastic_energy_prime(state.b, p), scaled(laplacian(state.b), p.sigma));
    const auto& mv = relax.values();
    const auto& fv = f.b.values();
    for (std::size_t q = 0; q < acc.size(); ++q) acc[q] += mv[q] * fv[q];
  }
  double total = 0.0;
  for (double v : acc) total += v;
  return total * g.cell_volume();
}

StudyResult convergence_study(const ManufacturedSolution& ms, const Parameters& p,
                              const std::vector<RungSpec>& ladder, double t_end,
                              const SolverOptions& base_opts) {
  if (ladder.size() < 3) throw std::invalid_argument("convergence study needs >= 3 rungs");
  StudyResult result;

  for (const auto& rung : ladder) {
    GridSpec g{ms.dim, rung.points_per_axis, rung.dealias_num, rung.dealias_den};
    g.validate();
    SolverOptions opts = base_opts;
    opts.dt_fixed = rung.dt;
    opts.track_energy = false;

    State initial = sample_state(ms, g, 0.0);
    Forcing f = solver_forcing(ms, p, g);
    State final_state = initial;
    try {
      if (t_end > 0.0) final_state = run(initial, p, t_end, opts, f).final_state;
    } catch (const Error& e) {
      throw StepFailure("rung M=" + std::to_string(rung.points_per_axis) +
                        " dt=" + std::to_string(rung.dt) + ": " + e.what());
    }
    State exact = sample_state(ms, g, final_state.time);

    RungResult r;
    r.rung = rung;
    auto d_rho = map_values(final_state.rho, exact.rho, [](double a, double b) { return a - b; });
    r.err_linf_rho = max_abs(d_rho);
    r.err_l2_rho = l2_norm(d_rho);
    auto d_b = map_values(final_state.b, exact.b, [](double a, double b) { return a - b; });
    r.err_linf_b = max_abs(d_b);
    r.err_l2_b = l2_norm(d_b);
    double l2u_sq = 0.0;
    for (int a = 0; a < g.dim; ++a) {
      auto d_u = map_values(final_state.u[a], exact.u[a], [](double x, double y) { return x - y; });
      r.err_linf_u = std::max(r.err_linf_u, max_abs(d_u));
      const double n = l2_norm(d_u);
      l2u_sq += n * n;
    }
    r.err_l2_u = std::sqrt(l2u_sq);
    result.rungs.push_back(r);
  }

  for (std::size_t i = 0; i + 1 < result.rungs.size(); ++i) {
    const auto& lo = result.rungs[i];
    const auto& hi = result.rungs[i + 1];
    double ratio = lo.rung.dt != hi.rung.dt
                       ? lo.rung.dt / hi.rung.dt
                       : static_cast<double>(hi.rung.points_per_axis) / lo.rung.points_per_axis;
    auto order = [&](double e0, double e1) {
      if (e0 <= 0.0 || e1 <= 0.0) return std::numeric_limits<double>::quiet_NaN();
      return std::log(e0 / e1) / std::log(ratio);
    };
    result.observed_orders.push_back({order(lo.err_linf_rho, hi.err_linf_rho),
                                      order(lo.err_linf_u, hi.err_linf_u),
                                      order(lo.err_linf_b, hi.err_linf_b)});
  }
  return result;
}

}  // namespace sdflow
