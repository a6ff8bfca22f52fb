#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "sdflow/constitutive.hpp"
#include "sdflow/diagnostics.hpp"
#include "sdflow/errors.hpp"
#include "sdflow/mms.hpp"
#include "sdflow/spectral.hpp"

using namespace sdflow;

TEST_CASE("equilibrium manufactured solution needs no forcing") {
  Parameters p;
  GridSpec g{2, 16, 2, 3};
  ManufacturedSolution ms;
  ms.dim = 2;
  ms.rho.offset = 1.0;
  ms.u[0] = TrigSeries{};
  ms.u[1] = TrigSeries{};
  ms.b.offset = equilibrium_b(p);

  auto f = forcing_fields(ms, p, g, 0.7);
  CHECK(max_abs(f.rho) < 1e-13);
  CHECK(max_abs(f.momentum[0]) < 1e-13);
  CHECK(max_abs(f.momentum[1]) < 1e-13);
  CHECK(max_abs(f.b) < 1e-13);
}

TEST_CASE("steady density profile forcing matches symbolic derivatives") {
  Parameters p;
  p.gamma = 4.0;
  p.a0 = 1.3;
  GridSpec g{1, 32, 2, 3};
  ManufacturedSolution ms;
  ms.dim = 1;
  ms.rho.offset = 1.0;
  ms.rho.terms.push_back({0.1, {1, 0, 0}, {0.0, 0.0, 0.0}, 0.0, 0.0});
  ms.b.offset = 1.0;

  auto f = forcing_fields(ms, p, g, 0.0);
  CHECK(max_abs(f.rho) < 1e-13);  // steady and u = 0

  // f_u = d/dx p_fl(rho) with rho = 1 + 0.1 cos(pi x).
  const auto& fv = f.momentum[0].values();
  double worst = 0.0;
  for (std::size_t lin = 0; lin < fv.size(); ++lin) {
    const double x = g.coordinate(static_cast<int>(lin));
    const double rho = 1.0 + 0.1 * std::cos(kPi * x);
    const double rho_x = -0.1 * kPi * std::sin(kPi * x);
    const double want = p.a0 * p.gamma * std::pow(rho, p.gamma - 1.0) * rho_x;
    worst = std::max(worst, std::abs(fv[lin] - want));
  }
  CHECK(worst < 1e-11);

  // f_b = (1/nu) e'(1), a constant.
  const double want_b = elastic_energy_prime(1.0, p) / p.nu;
  const auto& bv = f.b.values();
  for (std::size_t lin = 0; lin < bv.size(); ++lin)
    if (std::abs(bv[lin] - want_b) > 1e-11) {
      CHECK(std::abs(bv[lin] - want_b) < 1e-11);
      break;
    }
}

TEST_CASE("time-periodic b forcing carries the expected rate term") {
  Parameters p;
  p.nu = 0.8;
  p.sigma = 0.4;
  GridSpec g{1, 32, 2, 3};
  ManufacturedSolution ms;
  ms.dim = 1;
  ms.rho.offset = 1.0;
  ms.b.offset = 1.0;
  // b* = 1 + 0.1 sin(t) cos(pi x)
  ms.b.terms.push_back({0.1, {1, 0, 0}, {0.0, 0.0, 0.0}, 1.0, -kPi / 2.0});

  const double t = 0.6;
  auto f = forcing_fields(ms, p, g, t);
  const auto& fv = f.b.values();
  double worst = 0.0;
  for (std::size_t lin = 0; lin < fv.size(); ++lin) {
    const double x = g.coordinate(static_cast<int>(lin));
    const double c = std::cos(kPi * x);
    const double b = 1.0 + 0.1 * std::sin(t) * c;
    const double lap = -0.1 * std::sin(t) * kPi * kPi * c;
    const double want =
        0.1 * std::cos(t) * c + (elastic_energy_prime(b, p) - p.sigma * lap) / p.nu;
    worst = std::max(worst, std::abs(fv[lin] - want));
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("manufactured state sampling is exact and mass is constant in time") {
  Parameters p;
  GridSpec g{2, 32, 2, 3};
  auto ms = default_manufactured(2, p);
  auto s0 = sample_state(ms, g, 0.0);
  auto s1 = sample_state(ms, g, 0.37);
  CHECK(integral(s0.rho) == doctest::Approx(integral(s1.rho)).epsilon(1e-13));
  CHECK(min_value(s0.rho) > 0.5);
  CHECK(min_value(s0.b) > 0.3);
}

TEST_CASE("forced solver tracks the manufactured solution") {
  Parameters p;
  p.mu = 0.25;
  p.lambda = 0.1;
  p.nu = 0.5;
  p.sigma = 0.25;
  GridSpec g{2, 32, 2, 3};
  auto ms = default_manufactured(2, p);

  SolverOptions opts;
  opts.dt_fixed = 1e-5;
  opts.track_energy = false;
  auto res = run(sample_state(ms, g, 0.0), p, 20 * 1e-5, opts, solver_forcing(ms, p, g));
  auto exact = sample_state(ms, g, res.final_state.time);
  auto d_rho =
      map_values(res.final_state.rho, exact.rho, [](double a, double b) { return a - b; });
  auto d_b = map_values(res.final_state.b, exact.b, [](double a, double b) { return a - b; });
  CHECK(max_abs(d_rho) < 1e-6);
  CHECK(max_abs(d_b) < 1e-6);
  CHECK(max_abs(map_values(res.final_state.u[0], exact.u[0],
                           [](double a, double b) { return a - b; })) < 1e-6);
}

TEST_CASE("temporal refinement shows first order convergence") {
  Parameters p;
  p.mu = 0.25;
  p.lambda = 0.1;
  p.nu = 0.5;
  p.sigma = 0.25;
  auto ms = default_manufactured(1, p);

  std::vector<RungSpec> ladder = {{32, 4e-4, 2, 3}, {32, 2e-4, 2, 3}, {32, 1e-4, 2, 3}};
  auto study = convergence_study(ms, p, ladder, 8e-3);
  REQUIRE(study.rungs.size() == 3);
  REQUIRE(study.observed_orders.size() == 2);
  for (const auto& ord : study.observed_orders)
    for (double o : ord) {
      CHECK(o > 0.6);
      CHECK(o < 1.4);
    }
  // Errors must fall monotonically along the ladder.
  CHECK(study.rungs[0].err_linf_rho > study.rungs[1].err_linf_rho);
  CHECK(study.rungs[1].err_linf_rho > study.rungs[2].err_linf_rho);
}

TEST_CASE("zero-length study reports zero error") {
  Parameters p;
  auto ms = default_manufactured(1, p);
  std::vector<RungSpec> ladder = {{16, 1e-4, 2, 3}, {32, 1e-4, 2, 3}, {64, 1e-4, 2, 3}};
  auto study = convergence_study(ms, p, ladder, 0.0);
  for (const auto& r : study.rungs) {
    CHECK(r.err_linf_rho == 0.0);
    CHECK(r.err_linf_u == 0.0);
    CHECK(r.err_linf_b == 0.0);
  }
}

TEST_CASE("study needs at least three rungs") {
  Parameters p;
  auto ms = default_manufactured(1, p);
  std::vector<RungSpec> ladder = {{16, 1e-4, 2, 3}, {32, 1e-4, 2, 3}};
  CHECK_THROWS_AS((void)convergence_study(ms, p, ladder, 1e-3), std::invalid_argument);
}

TEST_CASE("errors are invariant under spatial translation") {
  Parameters p;
  p.mu = 0.25;
  p.lambda = 0.1;
  p.nu = 0.5;
  p.sigma = 0.25;
  auto ms = default_manufactured(2, p);
  std::vector<RungSpec> ladder = {{32, 2e-4, 2, 3}, {32, 1e-4, 2, 3}, {32, 5e-5, 2, 3}};
  auto a = convergence_study(ms, p, ladder, 2e-3);

  SUBCASE("integral norms under a generic shift") {
    // L2 errors are shift-invariant by Parseval for any translation.
    auto b = convergence_study(translate(ms, {0.3, -0.7, 0.0}), p, ladder, 2e-3);
    for (std::size_t i = 0; i < a.rungs.size(); ++i) {
      CHECK(std::abs(a.rungs[i].err_l2_rho - b.rungs[i].err_l2_rho) < 1e-11);
      CHECK(std::abs(a.rungs[i].err_l2_u - b.rungs[i].err_l2_u) < 1e-11);
      CHECK(std::abs(a.rungs[i].err_l2_b - b.rungs[i].err_l2_b) < 1e-11);
    }
  }
  SUBCASE("all norms under a lattice shift") {
    // Grid-aligned shifts are exact index rotations: sup norms match too.
    auto b = convergence_study(translate(ms, {0.375, -0.625, 0.0}), p, ladder, 2e-3);
    for (std::size_t i = 0; i < a.rungs.size(); ++i) {
      CHECK(std::abs(a.rungs[i].err_linf_rho - b.rungs[i].err_linf_rho) < 1e-11);
      CHECK(std::abs(a.rungs[i].err_linf_u - b.rungs[i].err_linf_u) < 1e-11);
      CHECK(std::abs(a.rungs[i].err_linf_b - b.rungs[i].err_linf_b) < 1e-11);
      CHECK(std::abs(a.rungs[i].err_l2_rho - b.rungs[i].err_l2_rho) < 1e-11);
    }
  }
}

TEST_CASE("forced energy balance closes at first order") {
  Parameters p;
  p.mu = 0.25;
  p.lambda = 0.1;
  p.nu = 0.5;
  p.sigma = 0.25;
  GridSpec g{1, 32, 2, 3};
  auto ms = default_manufactured(1, p);

  auto residual_at = [&](double dt) {
    State s0 = sample_state(ms, g, 0.0);
    SolverOptions opts;
    opts.picard_tol = 1e-13;
    opts.max_picard = 60;
    auto [s1, rep] = advance(s0, p, dt, solver_forcing(ms, p, g));
    auto f1 = forcing_fields(ms, p, g, s1.time);
    const double de = (rep.energy_after.total - rep.energy_before.total) / dt;
    const double diss =
        0.5 * (rep.energy_before.viscous_dissipation + rep.energy_before.relaxation_dissipation +
               rep.energy_after.viscous_dissipation + rep.energy_after.relaxation_dissipation);
    const double work = 0.5 * (forcing_work(s0, f1, p) + forcing_work(s1, f1, p));
    return std::abs(de + diss - work);
  };
  const double r1 = residual_at(2e-4);
  const double r2 = residual_at(1e-4);
  CHECK(r1 > 0.0);
  CHECK(r1 / r2 > 1.4);
  CHECK(r1 / r2 < 2.6);
}
