// End-to-end acceptance harness. Nine checks, one verdict line each, exit
// code equals the number of failures. Expected values were frozen from
// instrumented reference runs; tolerances are stated inline next to each
// check. Runtime of the full suite is a few minutes on one core.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <string>
#include <vector>

#include "fd_oracle.hpp"
#include "sdflow/config.hpp"
#include "sdflow/constitutive.hpp"
#include "sdflow/derivation.hpp"
#include "sdflow/diagnostics.hpp"
#include "sdflow/mms.hpp"
#include "sdflow/random_fields.hpp"
#include "sdflow/solver.hpp"
#include "sdflow/spectral.hpp"

using namespace sdflow;

namespace {

int failures = 0;

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

void verdict(bool pass, int idx, const char* name, const std::string& detail) {
  std::printf("%s %d %-24s %s\n", pass ? "PASS" : "FAIL", idx, name, detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

State trig_initial(const GridSpec& g, const Parameters& p, double ar, double au, double ab) {
  RunConfig cfg;
  cfg.grid = g;
  cfg.params = p;
  cfg.initial.kind = InitialKind::trig_perturbation;
  cfg.initial.rho_amplitude = ar;
  cfg.initial.u_amplitude = au;
  cfg.initial.b_amplitude = ab;
  return build_initial_state(cfg);
}

// Least-squares line fit; returns R^2 over [first, last).
double fit_r_squared(const std::vector<double>& x, const std::vector<double>& y,
                     std::size_t first) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0, n = 0;
  for (std::size_t i = first; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
    n += 1;
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const double icept = (sy - slope * sx) / n;
  double ssr = 0, sst = 0;
  const double ym = sy / n;
  for (std::size_t i = first; i < x.size(); ++i) {
    const double f = icept + slope * x[i];
    ssr += (y[i] - f) * (y[i] - f);
    sst += (y[i] - ym) * (y[i] - ym);
  }
  return 1.0 - ssr / sst;
}

// Shared long run: 2D, 64 points per axis, 1000 fixed steps from seeded
// random smooth data. Feeds the mass, energy-monotonicity, coefficient-bound
// and norm-ledger checks.
struct SharedRun {
  double e0 = 0.0;
  double max_drift = 0.0;
  double max_rise = 0.0;
  double min_combined = 0.0;
  long steps = 0;
  long rejections = 0;
  double secs = 0.0;
  std::vector<NormSample> norms;
};

SharedRun shared_long_run(const Parameters& p) {
  const auto t0 = std::chrono::steady_clock::now();
  GridSpec g{2, 64, 2, 3};
  RunConfig cfg;
  cfg.grid = g;
  cfg.params = p;
  cfg.initial.kind = InitialKind::seeded_random;
  cfg.initial.rho_amplitude = 0.05;
  cfg.initial.u_amplitude = 0.05;
  cfg.initial.b_amplitude = 0.05;
  cfg.initial.support = 4;
  cfg.initial.seed = 7;
  State init = build_initial_state(cfg);

  SolverOptions opts;
  opts.dt_fixed = 2e-4;
  opts.track_energy = true;

  SharedRun out;
  const double m0 = integral(init.rho);
  EnergyLedger led0 = energy_ledger(init, p);
  out.e0 = led0.total;
  NormTracker tracker(p);
  tracker.append(init);
  out.min_combined = min_value(combined_coefficient(init, p));
  double prev_total = led0.total;
  RunCallbacks cb;
  cb.on_step = [&](const State& s, const StepReport& rep) {
    out.max_drift = std::max(out.max_drift, std::abs(integral(s.rho) - m0) / std::abs(m0));
    out.max_rise = std::max(out.max_rise, rep.energy_after.total - prev_total);
    prev_total = rep.energy_after.total;
    tracker.append(s);
    out.min_combined = std::min(out.min_combined, min_value(combined_coefficient(s, p)));
  };
  RunResult res = run(init, p, 0.2, opts, {}, cb);
  out.steps = res.steps;
  out.rejections = res.rejections;
  out.secs = seconds_since(t0);
  out.norms = tracker.samples();
  return out;
}

// |E_N - E_0 + sum dt avg(D)| for one fixed-step run; first order in dt.
double cumulative_energy_residual(const GridSpec& g, const Parameters& p, double dt, double T) {
  State init = trig_initial(g, p, 0.04, 0.03, 0.04);
  SolverOptions opts;
  opts.dt_fixed = dt;
  opts.track_energy = true;
  EnergyLedger prev = energy_ledger(init, p);
  const double e_start = prev.total;
  double acc = 0.0;
  RunCallbacks cb;
  cb.on_step = [&](const State&, const StepReport& rep) {
    const EnergyLedger& led = rep.energy_after;
    acc += rep.dt_used * 0.5 *
           (prev.viscous_dissipation + prev.relaxation_dissipation + led.viscous_dissipation +
            led.relaxation_dissipation);
    prev = led;
  };
  run(init, p, T, opts, {}, cb);
  return std::abs(prev.total - e_start + acc);
}

}  // namespace

int main() {
  Parameters p;  // defaults: gamma 4, alpha 2, power-log energy, unit moduli

  const SharedRun big = shared_long_run(p);

  {  // 1: discrete mass conservation on the long run
    const bool pass =
        big.max_drift <= 1e-12 && big.steps == 1000 && big.rejections == 0 && big.secs < 60.0;
    verdict(pass, 1, "mass conservation",
            fmt("max rel drift %.2e (tol 1e-12), %ld steps, %.1f s", big.max_drift, big.steps,
                big.secs));
  }

  {  // 2: energy non-increase per step, cumulative ledger residual first order
    const double rise_tol = 1e-8 * big.e0;
    GridSpec g{2, 32, 2, 3};
    const double r1 = cumulative_energy_residual(g, p, 4e-4, 0.02);
    const double r2 = cumulative_energy_residual(g, p, 2e-4, 0.02);
    const double r3 = cumulative_energy_residual(g, p, 1e-4, 0.02);
    const double q1 = r1 / r2, q2 = r2 / r3;
    const bool mono = big.max_rise <= rise_tol;
    const bool first_order = q1 >= 1.7 && q1 <= 2.3 && q2 >= 1.7 && q2 <= 2.3;
    verdict(mono && first_order, 2, "energy dissipation",
            fmt("max rise %.2e (tol %.2e), residual ratios %.3f %.3f (want [1.7, 2.3])",
                big.max_rise, rise_tol, q1, q2));
  }

  {  // 3: divergence of the capillary tensor equals lap(b) grad(b)
    GridSpec g{2, 64, 2, 3};
    double worst = 0.0;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
      ScalarField b = add(ScalarField::constant(g, 1.0), random_band_limited(g, 8, 0.5, seed));
      VectorField gb = gradient(b);
      ScalarField lb = laplacian(b);
      VectorField lhs = divergence(korteweg_tensor(gb, p));
      for (int a = 0; a < 2; ++a) {
        ScalarField rhs = map_values(lb, gb[a], [](double l, double gv) { return l * gv; });
        worst = std::max(worst, max_abs(sub(lhs[a], rhs)));
      }
    }
    verdict(worst <= 1e-9, 3, "korteweg identity",
            fmt("max pointwise error %.2e over 100 seeded fields (tol 1e-9)", worst));
  }

  {  // 4: inverse laplacian eigenfunctions, flux identity decay, coefficient bound
    GridSpec g{2, 64, 2, 3};
    double eig = 0.0;
    const int modes[4][2] = {{1, 0}, {0, 3}, {2, 5}, {7, 7}};
    for (auto& m : modes) {
      std::vector<double> v(g.num_points());
      for (std::size_t lin = 0; lin < v.size(); ++lin) {
        auto idx = axis_indices(g, lin);
        v[lin] = std::cos(kPi * (m[0] * g.coordinate(idx[0]) + m[1] * g.coordinate(idx[1])) + 0.3);
      }
      ScalarField f = ScalarField::from_values(g, std::move(v));
      const double k2 = kPi * kPi * (m[0] * m[0] + m[1] * m[1]);
      eig = std::max(eig, max_abs(sub(inverse_laplacian(f), scaled(f, -1.0 / k2))));
      eig = std::max(eig,
                     max_abs(sub(riesz_second(f, 0, 1), scaled(f, kPi * m[0] * kPi * m[1] / k2))));
    }

    GridSpec gw{2, 32, 2, 3};
    ManufacturedSolution ms = default_manufactured(2, p);
    State init = sample_state(ms, gw, 0.0);
    auto evf_run = [&](double dt, int count) {
      SolverOptions opts;
      opts.dt_fixed = dt;
      opts.track_energy = false;
      opts.picard_tol = 1e-12;
      std::vector<State> snaps{init};
      long idx = 0;
      RunCallbacks cb;
      cb.on_step = [&](const State& s, const StepReport&) {
        ++idx;
        if (idx % 5 == 0 && static_cast<int>(snaps.size()) < count) snaps.push_back(s);
      };
      run(init, p, dt * 5 * (count - 1) + dt / 2, opts, {}, cb);
      return evf_identity(snaps, p);
    };
    const EvfReport e1 = evf_run(4e-4, 9);
    const EvfReport e2 = evf_run(2e-4, 17);
    const EvfReport e3 = evf_run(1e-4, 33);
    const double q1 = e1.residual / e2.residual, q2 = e2.residual / e3.residual;

    const double bound = 4.0 * p.mu / 3.0 + p.lambda;
    const double cmin = std::min({big.min_combined, e1.combined_min, e2.combined_min,
                                  e3.combined_min});
    const bool pass = eig <= 1e-13 && q1 >= 1.7 && q1 <= 2.3 && q2 >= 1.7 && q2 <= 2.3 &&
                      cmin >= bound;
    verdict(pass, 4, "effective viscous flux",
            fmt("eigenfunction error %.2e (tol 1e-13), residual ratios %.3f %.3f, "
                "coefficient min %.3f >= %.3f",
                eig, q1, q2, cmin, bound));
  }

  {  // 5: manufactured convergence, spectral in space and first order in time
    const auto t0 = std::chrono::steady_clock::now();
    ManufacturedSolution steady;
    steady.dim = 1;
    steady.rho.offset = 1.0;
    steady.b.offset = equilibrium_b(p);
    for (int m = 1; m <= 24; ++m) {
      const double a = 0.05 * std::pow(0.35, m - 1);
      steady.rho.terms.push_back({.amplitude = a, .mode = {m, 0, 0}, .phase = {0.3 * m, 0, 0}});
      steady.u[0].terms.push_back(
          {.amplitude = a, .mode = {m, 0, 0}, .phase = {0.3 * m + 1.1, 0, 0}});
      steady.b.terms.push_back({.amplitude = a, .mode = {m, 0, 0}, .phase = {0.3 * m + 2.2, 0, 0}});
    }
    SolverOptions opts;
    opts.picard_tol = 1e-12;
    std::vector<RungSpec> space;
    for (int M : {16, 32, 64}) space.push_back({.points_per_axis = M, .dt = 1e-5});
    const StudyResult sst = convergence_study(steady, p, space, 5e-4, opts);
    std::array<double, 3> err{};
    for (int i = 0; i < 3; ++i)
      err[static_cast<std::size_t>(i)] =
          std::max({sst.rungs[static_cast<std::size_t>(i)].err_linf_rho,
                    sst.rungs[static_cast<std::size_t>(i)].err_linf_u,
                    sst.rungs[static_cast<std::size_t>(i)].err_linf_b});
    const double drop1 = err[0] / err[1], drop2 = err[1] / err[2];

    std::vector<RungSpec> time;
    for (double dt : {4e-4, 2e-4, 1e-4}) time.push_back({.points_per_axis = 32, .dt = dt});
    const StudyResult tst = convergence_study(default_manufactured(1, p), p, time, 2e-2, opts);
    double worst_order_gap = 0.0;
    for (const auto& ord : tst.observed_orders)
      for (double o : ord) worst_order_gap = std::max(worst_order_gap, std::abs(o - 1.0));

    const double secs = seconds_since(t0);
    const bool pass = drop1 >= 100.0 && drop2 >= 100.0 && worst_order_gap <= 0.2 && secs < 300.0;
    verdict(pass, 5, "manufactured convergence",
            fmt("spatial drops %.0fx %.0fx (want >= 100x), temporal order within %.3f of 1 "
                "(tol 0.2), %.1f s",
                drop1, drop2, worst_order_gap, secs));
  }

  {  // 6: kinematic identities, nonnegative dissipation, discrete energy identity
    double rmin = 1e300, rmax = 0.0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      const double re = check_bp_evolution(random_trajectory(seed, 17, 0.01)) /
                        check_bp_evolution(random_trajectory(seed, 33, 0.005));
      const double rt = check_trace_identity(random_trajectory(seed, 17, 0.01)) /
                        check_trace_identity(random_trajectory(seed, 33, 0.005));
      const double rs = check_spherical_reduction(spherical_trajectory(seed, 17, 0.01)) /
                        check_spherical_reduction(spherical_trajectory(seed, 33, 0.005));
      rmin = std::min({rmin, re, rt, rs});
      rmax = std::max({rmax, re, rt, rs});
    }

    GridSpec gx{2, 32, 2, 3};
    long samples = 0, negatives = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      Parameters ps;
      ps.mu = 0.1 + 0.37 * static_cast<double>(seed % 4);
      ps.lambda = 0.25 * static_cast<double>(seed % 3);
      ps.nu = 0.4 + 0.2 * static_cast<double>(seed % 5);
      ps.sigma = 0.3 + 0.31 * static_cast<double>(seed % 4);
      ps.s = 1.0 + 0.5 * static_cast<double>(seed % 3);
      VectorField u = random_band_limited_vector(gx, 5, 0.8, seed);
      TensorField grad_u = TensorField::zeros(gx);
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) grad_u.at(i, j) = derivative(u[i], j);
      ScalarField b =
          add(ScalarField::constant(gx, 0.75), random_band_limited(gx, 5, 0.5, seed + 100));
      for (double v : rate_of_dissipation(grad_u, b, laplacian(b), ps).values()) {
        ++samples;
        if (v < 0.0) ++negatives;
      }
    }

    GridSpec gw{1, 32, 2, 3};
    State init = trig_initial(gw, p, 0.04, 0.03, 0.04);
    SolverOptions opts;
    opts.dt_fixed = 2e-4;
    opts.track_energy = false;
    opts.picard_tol = 1e-13;
    std::vector<State> window{init};
    RunCallbacks cb;
    cb.on_step = [&](const State& s, const StepReport&) {
      if (window.size() < 11) window.push_back(s);
    };
    run(init, p, 10 * 2e-4 + 1e-4, opts, {}, cb);
    const EnergyIdentityReport rep = check_energy_identity(window, p);

    const bool pass = rmin >= 3.5 && rmax <= 4.5 && samples >= 10000 && negatives == 0 &&
                      rep.max_ledger_mismatch <= 1e-12;
    verdict(pass, 6, "derivation checks",
            fmt("residual ratios [%.3f, %.3f] (want [3.5, 4.5]), %ld/%ld dissipation samples "
                ">= 0, ledger mismatch %.2e (tol 1e-12)",
                rmin, rmax, samples - negatives, samples, rep.max_ledger_mismatch));
  }

  {  // 7: agreement with an independent finite-difference integrator
    GridSpec g{1, 64, 2, 3};
    State init = trig_initial(g, p, 0.04, 0.03, 0.04);
    SolverOptions opts;
    opts.dt_fixed = 1e-4;
    opts.track_energy = false;
    RunResult res = run(init, p, 0.1, opts);

    fd1d::Grid fg(256);
    fd1d::Params fp;
    fd1d::Fields f;
    f.rho.resize(static_cast<std::size_t>(fg.n));
    f.w.resize(static_cast<std::size_t>(fg.n));
    f.b.resize(static_cast<std::size_t>(fg.n));
    const double beq = equilibrium_b(p);
    for (int i = 0; i < fg.n; ++i) {
      const double x = fg.x(i);
      f.rho[static_cast<std::size_t>(i)] = 1.0 + 0.04 * std::cos(M_PI * x);
      f.w[static_cast<std::size_t>(i)] =
          f.rho[static_cast<std::size_t>(i)] * 0.03 * std::sin(M_PI * x);
      f.b[static_cast<std::size_t>(i)] = beq + 0.04 * std::cos(M_PI * x);
    }
    fd1d::Fields ff = fd1d::integrate(fg, f, fp, 1e-6, 100000);
    double er = 0, eu = 0, eb = 0;
    const int r = fg.n / 64;
    for (int j = 0; j < 64; ++j) {
      const std::size_t i = static_cast<std::size_t>(r * j);
      const std::size_t js = static_cast<std::size_t>(j);
      er = std::max(er, std::abs(res.final_state.rho.values()[js] - ff.rho[i]));
      eu = std::max(eu, std::abs(res.final_state.u[0].values()[js] - ff.w[i] / ff.rho[i]));
      eb = std::max(eb, std::abs(res.final_state.b.values()[js] - ff.b[i]));
    }
    const double worst = std::max({er, eu, eb});
    verdict(worst <= 1e-4, 7, "independent oracle",
            fmt("sup differences rho %.2e u %.2e b %.2e at t=0.1 (tol 1e-4)", er, eu, eb));
  }

  {  // 8: regularized runs approach each other linearly in epsilon
    GridSpec g{1, 32, 2, 3};
    auto run_eps = [&](double eps) {
      Parameters pe = p;
      pe.epsilon = eps;
      State init = trig_initial(g, pe, 0.04, 0.03, 0.04);
      SolverOptions opts;
      opts.dt_fixed = 2e-5;
      opts.track_energy = false;
      std::vector<State> snaps{init};
      long idx = 0;
      RunCallbacks cb;
      cb.on_step = [&](const State& s, const StepReport&) {
        if (++idx % 50 == 0) snaps.push_back(s);
      };
      RunResult r = run(init, pe, 0.1, opts, {}, cb);
      return std::pair<State, RhoBPairReport>(r.final_state, rho_b_pair_residual(snaps, pe));
    };
    auto [s2, q2] = run_eps(1e-2);
    auto [s3, q3] = run_eps(1e-3);
    auto [s4, q4] = run_eps(1e-4);
    auto dist = [](const State& a, const State& b) {
      return std::max({max_abs(sub(a.rho, b.rho)), max_abs(sub(a.u[0], b.u[0])),
                       max_abs(sub(a.b, b.b))});
    };
    const double d23 = dist(s2, s3), d34 = dist(s3, s4);
    const double ratio = q2.without_correction / q3.without_correction;
    const bool pass = d23 > d34 && ratio >= 8.0 && ratio <= 12.0;
    verdict(pass, 8, "epsilon consistency",
            fmt("sup differences %.2e > %.2e, pair residual ratio %.2f (want [8, 12])", d23, d34,
                ratio));
  }

  {  // 9: tracked norms stay finite, cumulative pressure integral grows linearly
    bool finite = true;
    std::vector<double> t, cum;
    for (const NormSample& n : big.norms) {
      for (double v : {n.rho_Lgamma, n.momentum_Lq, n.b_Lalpha, n.grad_b_L2, n.log_b_L1,
                       n.cum_grad_u_L2, n.cum_relax_L2, n.cum_rho_gamma_plus_1, n.cum_b_L20,
                       n.cum_grad_b_L103})
        finite = finite && std::isfinite(v);
      t.push_back(n.time);
      cum.push_back(n.cum_rho_gamma_plus_1);
    }
    const double r2 = fit_r_squared(t, cum, t.size() / 2);
    verdict(finite && r2 >= 0.99, 9, "a priori norm ledger",
            fmt("all norms finite over %zu samples, linear fit R^2 %.6f (want >= 0.99)",
                big.norms.size(), r2));
  }

  std::printf("%d/9 criteria passed\n", 9 - failures);
  return failures;
}
