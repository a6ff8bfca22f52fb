#include "sdflow/solver.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "sdflow/constitutive.hpp"
#include "sdflow/errors.hpp"
#include "sdflow/spectral.hpp"

namespace sdflow {
namespace {

// Internal control flow: a rejected attempt unwinds to the halving loop.
struct Reject {
  std::string reason;
};

bool finite_field(const ScalarField& f) {
  for (double v : f.values())
    if (!std::isfinite(v)) return false;
  return true;
}

// (rho u)_a as the solver sees it: exact in-band product.
VectorField mass_flux(const ScalarField& rho, const VectorField& u) {
  const GridSpec& g = rho.grid();
  VectorField flux = VectorField::zeros(g);
  for (int a = 0; a < g.dim; ++a) flux[a] = dealiased_product(rho, u[a]);
  return flux;
}

// -Div(flux), the conservative transport term of the continuity equation.
ScalarField continuity_transport(const VectorField& flux) {
  return scaled(divergence(flux), -1.0);
}

// Every explicit (non-stiff) momentum term, projected to the evolved band:
//   -Div(flux x u) - grad(p_fl + p_el + (2/3) sigma b lap b) - Div K(grad b).
// Pressure laws are evaluated pointwise then masked; quadratic products go
// through the exact dealiased product.  rho_p is the density fed to the fluid
// pressure (the Picard loop passes its freshest iterate there).
VectorField momentum_explicit_terms(const ScalarField& rho_p, const ScalarField& b,
                                    const VectorField& u, const VectorField& flux,
                                    const Parameters& p, int cutoff) {
  const GridSpec& g = rho_p.grid();
  const int d = g.dim;

  TensorField adv = TensorField::zeros(g);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) adv.at(i, j) = dealiased_product(flux[i], u[j]);
  VectorField out = divergence(adv);
  for (int a = 0; a < d; ++a) out[a] = scaled(out[a], -1.0);

  ScalarField pressure = add(dealias(fluid_pressure(rho_p, p)), dealias(elastic_pressure(b, p)));
  pressure = add(pressure,
                 scaled(dealiased_product(b, laplacian(b)), 2.0 / 3.0 * p.sigma));
  auto grad_p = gradient(pressure);

  // Korteweg part with dealiased entries; sigma lives on the tensor.
  auto gb = gradient(b);
  TensorField k = TensorField::zeros(g);
  ScalarField gb2 = ScalarField::zeros(g);
  for (int a = 0; a < d; ++a) gb2 = add(gb2, dealiased_product(gb[a], gb[a]));
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) {
      ScalarField e = dealiased_product(gb[i], gb[j]);
      if (i == j) e = sub(e, scaled(gb2, 0.5));
      k.at(i, j) = scaled(e, p.sigma);
      if (j != i) k.at(j, i) = k.at(i, j);
    }
  auto div_k = divergence(k);

  for (int a = 0; a < d; ++a)
    out[a] = galerkin_project(sub(sub(out[a], grad_p[a]), div_k[a]), cutoff);
  return out;
}

// mu lap v + (mu/3 + lambda) grad Div v, exact in spectral space.
VectorField viscous_operator(const VectorField& v, double mu, double lambda) {
  const GridSpec& g = v.grid();
  const int d = g.dim;
  auto grad_div = gradient(divergence(v));
  VectorField out = VectorField::zeros(g);
  for (int a = 0; a < d; ++a)
    out[a] = add(scaled(laplacian(v[a]), mu), scaled(grad_div[a], mu / 3.0 + lambda));
  return out;
}

// Explicit part of the b equation:
//   -u . grad b - (1/nu) e'(b) + (2/3) b Div u   (each product dealiased).
ScalarField b_explicit_terms(const ScalarField& b, const VectorField& u, const Parameters& p) {
  const GridSpec& g = b.grid();
  ScalarField adv = ScalarField::zeros(g);
  for (int a = 0; a < g.dim; ++a)
    adv = add(adv, dealiased_product(u[a], derivative(b, a)));
  ScalarField out = scaled(adv, -1.0);
  out = sub(out, scaled(dealias(elastic_energy_prime(b, p)), 1.0 / p.nu));
  out = add(out, scaled(dealiased_product(b, divergence(u)), 2.0 / 3.0));
  return out;
}

double rel_change(const ScalarField& now, const ScalarField& prev, double base) {
  auto diff = map_values(now, prev, [](double a, double b) { return a - b; });
  return max_abs(diff) / std::max(1.0, base);
}

struct ForcingSample {
  bool has_rho = false, has_w = false, has_b = false;
  ScalarField rho, b;
  VectorField w;
};

ForcingSample sample_forcing(const Forcing& forcing, double t, const GridSpec& g, int cutoff) {
  ForcingSample f;
  if (forcing.rho) {
    f.rho = forcing.rho(t);
    f.has_rho = true;
  }
  if (forcing.b) {
    f.b = forcing.b(t);
    f.has_b = true;
  }
  if (forcing.momentum) {
    f.w = forcing.momentum(t);
    for (int a = 0; a < g.dim; ++a) f.w[a] = galerkin_project(f.w[a], cutoff);
    f.has_w = true;
  }
  return f;
}

// One backward-Euler attempt at a fixed dt.  Throws Reject on positivity
// violations and NaNDetected on non-finite iterates.
State attempt_step(const State& sn, const Parameters& p, double dt, const ForcingSample& f,
                   const SolverOptions& opts, int& iterations_out) {
  const GridSpec& g = sn.grid();
  const int d = g.dim;
  const int cutoff = p.effective_cutoff(g);
  const std::size_t nmodes = g.num_points();

  const double rho_bar = mean(sn.rho);
  if (!(rho_bar > 0.0)) throw Reject{"nonpositive mean density"};

  // Evolved momentum: band-projected mass flux of the current state.
  VectorField w_n = mass_flux(sn.rho, sn.u);
  for (int a = 0; a < d; ++a) w_n[a] = galerkin_project(w_n[a], cutoff);

  const auto rho_n_hat = sn.rho.spectrum();
  const auto b_n_hat = sn.b.spectrum();
  std::vector<std::vector<cplx>> w_n_hat(static_cast<std::size_t>(d));
  for (int a = 0; a < d; ++a) w_n_hat[static_cast<std::size_t>(a)] = w_n[a].spectrum();

  // Per-mode implicit factors.
  std::vector<double> k2(nmodes, 0.0);
  std::vector<std::array<double, 3>> kvec(nmodes);
  for_each_mode(g, [&](std::size_t lin, const std::array<int, 3>& m) {
    double acc = 0.0;
    for (int a = 0; a < d; ++a) {
      const double ka = kPi * m[a];
      kvec[lin][static_cast<std::size_t>(a)] = ka;
      acc += ka * ka;
    }
    k2[lin] = acc;
  });

  const double visc_coeff = p.mu / rho_bar;
  const double comp_coeff = (p.mu / 3.0 + p.lambda) / rho_bar;

  const double base_rho = max_abs(sn.rho);
  const double base_b = max_abs(sn.b);
  std::vector<double> base_u(static_cast<std::size_t>(d));
  for (int a = 0; a < d; ++a) base_u[static_cast<std::size_t>(a)] = max_abs(sn.u[a]);

  ScalarField rho_i = sn.rho;
  ScalarField b_i = sn.b;
  VectorField u_i = sn.u;
  VectorField w_i = w_n;

  iterations_out = 0;
  for (int j = 0; j < opts.max_picard; ++j) {
    ++iterations_out;

    // Continuity: implicit eps lap, explicit transport from the last iterate.
    VectorField flux = mass_flux(rho_i, u_i);
    ScalarField transport = continuity_transport(flux);
    const auto& tr_hat = transport.spectrum();
    std::vector<cplx> rho_hat(nmodes);
    {
      const std::vector<cplx>* fr = f.has_rho ? &f.rho.spectrum() : nullptr;
      for (std::size_t q = 0; q < nmodes; ++q) {
        cplx r = rho_n_hat[q] + dt * tr_hat[q];
        if (fr) r += dt * (*fr)[q];
        rho_hat[q] = r / (1.0 + dt * p.epsilon * k2[q]);
      }
    }
    ScalarField rho_next = ScalarField::from_spectrum(g, std::move(rho_hat));
    if (!finite_field(rho_next)) throw NaNDetected("density iterate is not finite");
    if (min_value(rho_next) < -opts.rho_tol) throw Reject{"negative density"};

    // b: implicit (sigma/nu) lap, explicit transport and relaxation.
    ScalarField b_expl = b_explicit_terms(b_i, u_i, p);
    const auto& be_hat = b_expl.spectrum();
    std::vector<cplx> b_hat(nmodes);
    {
      const std::vector<cplx>* fb = f.has_b ? &f.b.spectrum() : nullptr;
      for (std::size_t q = 0; q < nmodes; ++q) {
        cplx r = b_n_hat[q] + dt * be_hat[q];
        if (fb) r += dt * (*fb)[q];
        b_hat[q] = r / (1.0 + dt * (p.sigma / p.nu) * k2[q]);
      }
    }
    ScalarField b_next = ScalarField::from_spectrum(g, std::move(b_hat));
    if (!finite_field(b_next)) throw NaNDetected("b iterate is not finite");
    if (min_value(b_next) <= opts.b_floor) throw Reject{"b at or under floor"};

    // Momentum: the stiff constant-coefficient viscous operator and eps lap
    // are implicit on w; their action on the last iterate is subtracted so
    // the converged step solves the true backward-Euler relation.
    VectorField expl = momentum_explicit_terms(rho_next, b_i, u_i, flux, p, cutoff);
    VectorField visc_u = viscous_operator(u_i, p.mu, p.lambda);
    VectorField l_w = viscous_operator(w_i, visc_coeff, p.lambda / rho_bar);

    std::vector<std::vector<cplx>> rhs(static_cast<std::size_t>(d),
                                       std::vector<cplx>(nmodes));
    for (int a = 0; a < d; ++a) {
      ScalarField total = galerkin_project(sub(add(expl[a], visc_u[a]), l_w[a]), cutoff);
      const auto& th = total.spectrum();
      const std::vector<cplx>* fw = f.has_w ? &f.w[a].spectrum() : nullptr;
      auto& r = rhs[static_cast<std::size_t>(a)];
      const auto& wn = w_n_hat[static_cast<std::size_t>(a)];
      for (std::size_t q = 0; q < nmodes; ++q) {
        r[q] = wn[q] + dt * th[q];
        if (fw) r[q] += dt * (*fw)[q];
      }
    }

    // Solve (a I + c k k^T) w = r per mode via the rank-one inversion
    // A^{-1} = (1/a)(I - c/(a + c |k|^2) k k^T).
    std::vector<std::vector<cplx>> w_hat(static_cast<std::size_t>(d),
                                         std::vector<cplx>(nmodes));
    const double c = dt * comp_coeff;
    for (std::size_t q = 0; q < nmodes; ++q) {
      const double a_diag = 1.0 + dt * (p.epsilon + visc_coeff) * k2[q];
      cplx k_dot_r = 0.0;
      for (int a = 0; a < d; ++a)
        k_dot_r += kvec[q][static_cast<std::size_t>(a)] * rhs[static_cast<std::size_t>(a)][q];
      const cplx correction = (c / (a_diag + c * k2[q])) * k_dot_r;
      for (int a = 0; a < d; ++a)
        w_hat[static_cast<std::size_t>(a)][q] =
            (rhs[static_cast<std::size_t>(a)][q] -
             correction * kvec[q][static_cast<std::size_t>(a)]) /
            a_diag;
    }
    VectorField w_next = VectorField::zeros(g);
    for (int a = 0; a < d; ++a)
      w_next[a] = ScalarField::from_spectrum(g, std::move(w_hat[static_cast<std::size_t>(a)]));
    for (int a = 0; a < d; ++a)
      if (!finite_field(w_next[a])) throw NaNDetected("momentum iterate is not finite");

    VectorField u_next = VectorField::zeros(g);
    try {
      u_next = recover_velocity(w_next, rho_next, opts.vacuum_floor);
    } catch (const DegenerateDensity& e) {
      throw Reject{e.what()};
    }

    double delta = rel_change(rho_next, rho_i, base_rho);
    delta = std::max(delta, rel_change(b_next, b_i, base_b));
    for (int a = 0; a < d; ++a)
      delta = std::max(delta, rel_change(u_next[a], u_i[a], base_u[static_cast<std::size_t>(a)]));

    rho_i = std::move(rho_next);
    b_i = std::move(b_next);
    u_i = std::move(u_next);
    w_i = std::move(w_next);

    if (delta < opts.picard_tol) break;
  }

  State out;
  out.time = sn.time + dt;
  out.rho = std::move(rho_i);
  out.u = std::move(u_i);
  out.b = std::move(b_i);
  return out;
}

std::pair<State, StepReport> advance_impl(const State& state, const Parameters& p, double dt0,
                                          const Forcing& forcing, const SolverOptions& opts,
                                          const EnergyLedger* cached_before) {
  if (!(dt0 > 0.0)) throw std::invalid_argument("advance needs dt > 0");
  p.validate();
  state.grid().validate();

  StepReport rep;
  if (opts.track_energy)
    rep.energy_before = cached_before ? *cached_before : energy_ledger(state, p);

  double dt = dt0;
  const int cutoff = p.effective_cutoff(state.grid());
  for (int halved = 0;; ++halved) {
    try {
      ForcingSample f = sample_forcing(forcing, state.time + dt, state.grid(), cutoff);
      int iters = 0;
      State next = attempt_step(state, p, dt, f, opts, iters);
      rep.picard_iterations = iters;
      rep.dt_used = dt;
      rep.halvings = halved;
      if (opts.track_energy) rep.energy_after = energy_ledger(next, p);
      return {std::move(next), rep};
    } catch (const Reject& r) {
      rep.reject_reason = r.reason;
      if (halved >= opts.max_halvings)
        throw StepFailure("step failed after " + std::to_string(halved) +
                          " dt halvings: " + r.reason);
      dt *= 0.5;
    }
  }
}

}  // namespace

ScalarField rhs_continuity(const State& state, const Parameters& p) {
  ScalarField out = continuity_transport(mass_flux(state.rho, state.u));
  if (p.epsilon > 0.0) out = add(out, scaled(laplacian(state.rho), p.epsilon));
  return out;
}

VectorField rhs_momentum(const State& state, const Parameters& p) {
  const GridSpec& g = state.grid();
  const int d = g.dim;
  const int cutoff = p.effective_cutoff(g);
  VectorField flux = mass_flux(state.rho, state.u);
  VectorField out = momentum_explicit_terms(state.rho, state.b, state.u, flux, p, cutoff);
  VectorField visc = viscous_operator(state.u, p.mu, p.lambda);
  for (int a = 0; a < d; ++a) {
    ScalarField extra = visc[a];
    if (p.epsilon > 0.0) extra = add(extra, scaled(laplacian(flux[a]), p.epsilon));
    out[a] = add(out[a], galerkin_project(extra, cutoff));
  }
  return out;
}

ScalarField rhs_b(const State& state, const Parameters& p) {
  return add(b_explicit_terms(state.b, state.u, p),
             scaled(laplacian(state.b), p.sigma / p.nu));
}

VectorField recover_velocity(const VectorField& w, const ScalarField& rho, double floor) {
  const GridSpec& g = rho.grid();
  if (min_value(rho) < floor)
    throw DegenerateDensity("velocity recovery: min density " +
                            std::to_string(min_value(rho)) + " under floor " +
                            std::to_string(floor));
  VectorField u = VectorField::zeros(g);
  for (int a = 0; a < g.dim; ++a)
    u[a] = dealias(map_values(w[a], rho, [](double wv, double rv) { return wv / rv; }));
  return u;
}

double propose_dt(const State& state, const Parameters& p, const SolverOptions& opts) {
  if (opts.dt_fixed > 0.0) return opts.dt_fixed;
  const GridSpec& g = state.grid();
  const int d = g.dim;
  const auto& rv = state.rho.values();
  std::vector<double> speed2(rv.size(), 0.0);
  for (int a = 0; a < d; ++a) {
    const auto& uv = state.u[a].values();
    for (std::size_t q = 0; q < speed2.size(); ++q) speed2[q] += uv[q] * uv[q];
  }
  double umax = 0.0;
  for (double v : speed2) umax = std::max(umax, v);
  umax = std::sqrt(umax);
  const double rho_max = max_value(state.rho);
  const double c_max =
      rho_max > 0.0 ? std::sqrt(p.gamma * p.a0 * std::pow(rho_max, p.gamma - 1.0)) : 0.0;
  const double wave = umax + c_max;
  if (!(wave > 0.0)) return opts.dt_max;
  return std::min(opts.cfl * g.spacing() / wave, opts.dt_max);
}

std::pair<State, StepReport> advance(const State& state, const Parameters& p, double dt,
                                     const Forcing& forcing, const SolverOptions& opts) {
  return advance_impl(state, p, dt, forcing, opts, nullptr);
}

RunResult run(const State& initial, const Parameters& p, double t_end,
              const SolverOptions& opts, const Forcing& forcing,
              const RunCallbacks& callbacks) {
  RunResult res;
  res.final_state = initial;
  bool have_cache = false;
  EnergyLedger cache;
  const double t_tol = 1e-12 * std::max(1.0, std::abs(t_end));
  while (res.final_state.time < t_end - t_tol) {
    if (res.steps >= opts.max_steps)
      throw StepFailure("run exceeded max_steps = " + std::to_string(opts.max_steps));
    double dt = propose_dt(res.final_state, p, opts);
    dt = std::min(dt, t_end - res.final_state.time);
    auto [next, rep] =
        advance_impl(res.final_state, p, dt, forcing, opts, have_cache ? &cache : nullptr);
    res.final_state = std::move(next);
    ++res.steps;
    res.rejections += rep.halvings;
    if (opts.track_energy) {
      cache = rep.energy_after;
      have_cache = true;
    }
    if (callbacks.on_step) callbacks.on_step(res.final_state, rep);
  }
  return res;
}

}  // namespace sdflow
