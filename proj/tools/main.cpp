#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sdflow/config.hpp"
#include "sdflow/csv.hpp"
#include "sdflow/derivation.hpp"
#include "sdflow/diagnostics.hpp"
#include "sdflow/errors.hpp"
#include "sdflow/mms.hpp"
#include "sdflow/snapshot.hpp"
#include "sdflow/solver.hpp"

namespace fs = std::filesystem;
using namespace sdflow;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << content;
  if (!out) throw IoError("write failed: " + path);
}

// Relative output paths hang off SDFLOW_OUT_ROOT when it is set.
std::string resolve_out_dir(const std::string& dir) {
  if (!dir.empty() && !fs::path(dir).is_absolute()) {
    if (const char* root = std::getenv("SDFLOW_OUT_ROOT"); root && *root)
      return (fs::path(root) / dir).string();
  }
  return dir;
}

void make_out_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir + ": " + ec.message());
}

std::string one_line(std::string msg) {
  for (auto& c : msg)
    if (c == '\n') c = ';';
  return msg;
}

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

RunConfig load_config(const std::string& path, const std::optional<std::string>& out_override,
                      const std::optional<std::uint64_t>& seed_override,
                      const std::optional<long>& snapshots_override) {
  RunConfig cfg = parse_config(read_file(path));
  if (out_override) cfg.out_dir = *out_override;
  if (seed_override) cfg.initial.seed = *seed_override;
  if (snapshots_override) cfg.snapshot_every = *snapshots_override;
  validate_config(cfg);  // overrides may break cross-field invariants
  return cfg;
}

int cmd_validate(const std::string& config_path) {
  RunConfig cfg = parse_config(read_file(config_path));
  std::cout << "ok: config valid (theorem mode " << (cfg.params.theorem_mode() ? "on" : "off")
            << ")\n";
  return 0;
}

int cmd_simulate(const std::string& config_path, const std::optional<std::string>& out_override,
                 const std::optional<std::uint64_t>& seed_override,
                 const std::optional<long>& snapshots_override, bool quiet) {
  RunConfig cfg = load_config(config_path, out_override, seed_override, snapshots_override);
  // the echoed config keeps the out_dir as configured; the environment prefix
  // only affects where this process writes
  const std::string out = resolve_out_dir(cfg.out_dir);
  make_out_dir(out);
  write_file((fs::path(out) / "config.cfg").string(), serialize_config(cfg));

  State initial = build_initial_state(cfg);

  std::optional<CsvWriter> energy_csv;
  if (cfg.diagnostics.energy)
    energy_csv.emplace((fs::path(out) / "energy.csv").string(),
                       std::vector<std::string>{"time", "dt", "picard_iterations", "halvings",
                                                "kinetic", "pressure_potential", "gradient_b",
                                                "elastic", "total", "viscous_dissipation",
                                                "relaxation_dissipation"});
  std::optional<CsvWriter> norms_csv;
  NormTracker tracker(cfg.params);
  if (cfg.diagnostics.norms)
    norms_csv.emplace((fs::path(out) / "norms.csv").string(),
                      std::vector<std::string>{"time", "rho_Lgamma", "momentum_Lq", "b_Lalpha",
                                               "grad_b_L2", "log_b_L1", "cum_grad_u_L2",
                                               "cum_relax_L2", "cum_rho_gamma_plus_1", "cum_b_L20",
                                               "cum_grad_b_L103"});

  auto energy_row = [&](double time, double dt, int picard, int halvings,
                        const EnergyLedger& led) {
    energy_csv->row({time, dt, static_cast<double>(picard), static_cast<double>(halvings),
                     led.kinetic, led.pressure_potential, led.gradient_b, led.elastic, led.total,
                     led.viscous_dissipation, led.relaxation_dissipation});
  };
  auto norms_row = [&](const State& s) {
    const NormSample& n = tracker.append(s);
    norms_csv->row({n.time, n.rho_Lgamma, n.momentum_Lq, n.b_Lalpha, n.grad_b_L2, n.log_b_L1,
                    n.cum_grad_u_L2, n.cum_relax_L2, n.cum_rho_gamma_plus_1, n.cum_b_L20,
                    n.cum_grad_b_L103});
  };

  if (energy_csv) energy_row(initial.time, 0.0, 0, 0, energy_ledger(initial, cfg.params));
  if (norms_csv) norms_row(initial);

  const bool window_diag = cfg.diagnostics.evf_window > 0 || cfg.diagnostics.renormalized ||
                           cfg.diagnostics.rho_b_pair;
  std::vector<State> stored;
  if (cfg.snapshot_every > 0) {
    write_state_snapshot(out, 0, initial);
    if (window_diag) stored.push_back(initial);
  }

  SolverOptions opts = cfg.solver;
  opts.track_energy = cfg.diagnostics.energy;

  long idx = 0;
  RunCallbacks cb;
  cb.on_step = [&](const State& s, const StepReport& rep) {
    ++idx;
    if (energy_csv) energy_row(s.time, rep.dt_used, rep.picard_iterations, rep.halvings,
                               rep.energy_after);
    if (norms_csv) norms_row(s);
    if (cfg.snapshot_every > 0 && idx % cfg.snapshot_every == 0) {
      write_state_snapshot(out, idx, s);
      if (window_diag) stored.push_back(s);
    }
  };

  RunResult result = run(initial, cfg.params, cfg.t_end, opts, {}, cb);

  if (cfg.diagnostics.evf_window > 0) {
    const int w = cfg.diagnostics.evf_window;
    CsvWriter evf_csv((fs::path(out) / "evf.csv").string(),
                      {"t_start", "t_end", "lhs", "i1", "i2", "i3", "i4", "i5", "i6", "i7",
                       "residual", "combined_min"});
    for (std::size_t start = 0; start + w <= stored.size(); start += w - 1) {
      std::vector<State> window(stored.begin() + start, stored.begin() + start + w);
      EvfReport rep = evf_identity(window, cfg.params);
      evf_csv.row({window.front().time, window.back().time, rep.lhs, rep.terms[0], rep.terms[1],
                   rep.terms[2], rep.terms[3], rep.terms[4], rep.terms[5], rep.terms[6],
                   rep.residual, rep.combined_min});
    }
  }
  if (cfg.diagnostics.rho_b_pair && stored.size() >= 3) {
    RhoBPairReport rep = rho_b_pair_residual(stored, cfg.params);
    CsvWriter csv((fs::path(out) / "pair_residual.csv").string(),
                  {"t_start", "t_end", "with_correction", "without_correction"});
    csv.row({stored.front().time, stored.back().time, rep.with_correction, rep.without_correction});
  }
  if (cfg.diagnostics.renormalized && stored.size() >= 3) {
    RenormalizedReport rep = renormalized_residual(stored, cfg.params);
    CsvWriter csv((fs::path(out) / "renormalized.csv").string(),
                  {"t_start", "t_end", "residual", "dropped_cells", "positivity_warning"});
    csv.row({stored.front().time, stored.back().time, rep.residual,
             static_cast<double>(rep.dropped_cells), rep.positivity_warning ? 1.0 : 0.0});
  }

  std::ostringstream info;
  info << "theorem_mode = " << (cfg.params.theorem_mode() ? "on" : "off") << "\n";
  info << "steps = " << result.steps << "\n";
  info << "rejections = " << result.rejections << "\n";
  info << "final_time = " << g17(result.final_state.time) << "\n";
  write_file((fs::path(out) / "run_info.txt").string(), info.str());

  if (!quiet)
    std::cout << "simulate: steps=" << result.steps << " rejections=" << result.rejections
              << " final_time=" << g17(result.final_state.time) << " out=" << out
              << " theorem_mode=" << (cfg.params.theorem_mode() ? "on" : "off") << "\n";
  return 0;
}

int cmd_mms(const std::string& config_path, const std::optional<std::string>& out_override,
            bool quiet) {
  RunConfig cfg = load_config(config_path, out_override, std::nullopt, std::nullopt);
  const std::string out = resolve_out_dir(cfg.out_dir);
  make_out_dir(out);

  std::vector<RungSpec> ladder;
  for (std::size_t i = 0; i < cfg.mms.points.size(); ++i) {
    RungSpec rung;
    rung.points_per_axis = cfg.mms.points[i];
    rung.dt = cfg.mms.dts.size() == 1 ? cfg.mms.dts[0] : cfg.mms.dts[i];
    rung.dealias_num = cfg.grid.dealias_num;
    rung.dealias_den = cfg.grid.dealias_den;
    ladder.push_back(rung);
  }

  ManufacturedSolution ms = default_manufactured(cfg.grid.dim, cfg.params);
  StudyResult study = convergence_study(ms, cfg.params, ladder, cfg.mms.t_end, cfg.solver);

  CsvWriter csv((fs::path(out) / "mms.csv").string(),
                {"points", "dt", "err_linf_rho", "err_l2_rho", "err_linf_u", "err_l2_u",
                 "err_linf_b", "err_l2_b"});
  for (const auto& r : study.rungs)
    csv.row({static_cast<double>(r.rung.points_per_axis), r.rung.dt, r.err_linf_rho, r.err_l2_rho,
             r.err_linf_u, r.err_l2_u, r.err_linf_b, r.err_l2_b});

  if (!quiet) {
    for (const auto& r : study.rungs)
      std::cout << "rung M=" << r.rung.points_per_axis << " dt=" << g17(r.rung.dt)
                << " linf(rho)=" << fmt("%.3e", r.err_linf_rho)
                << " linf(u)=" << fmt("%.3e", r.err_linf_u)
                << " linf(b)=" << fmt("%.3e", r.err_linf_b) << "\n";
    for (std::size_t i = 0; i < study.observed_orders.size(); ++i)
      std::cout << "order " << i + 1 << ": rho=" << fmt("%.2f", study.observed_orders[i][0])
                << " u=" << fmt("%.2f", study.observed_orders[i][1])
                << " b=" << fmt("%.2f", study.observed_orders[i][2]) << "\n";
  }
  return 0;
}

State verification_initial(const GridSpec& g, const Parameters& p) {
  RunConfig cfg;
  cfg.grid = g;
  cfg.params = p;
  cfg.initial.kind = InitialKind::trig_perturbation;
  cfg.initial.rho_amplitude = 0.04;
  cfg.initial.u_amplitude = 0.03;
  cfg.initial.b_amplitude = 0.04;
  return build_initial_state(cfg);
}

std::vector<State> verification_window(const State& initial, const Parameters& p, double dt,
                                       int steps) {
  SolverOptions opts;
  opts.dt_fixed = dt;
  opts.picard_tol = 1e-13;
  opts.track_energy = false;
  std::vector<State> window{initial};
  RunCallbacks cb;
  cb.on_step = [&window](const State& s, const StepReport&) { window.push_back(s); };
  run(initial, p, dt * steps, opts, {}, cb);
  return window;
}

int cmd_verify_derivation(std::uint64_t seed, int trajectories, bool quiet) {
  int failures = 0;
  auto line = [&](const std::string& name, const std::string& detail, bool ok) {
    if (!ok) ++failures;
    if (!quiet || !ok)
      std::cout << (ok ? "pass  " : "FAIL  ") << name << "  " << detail << "\n";
  };
  auto in_bracket = [](double x, double lo, double hi) { return x >= lo && x <= hi; };

  for (std::uint64_t k = 0; k < static_cast<std::uint64_t>(trajectories); ++k) {
    const std::uint64_t sd = seed + k;
    auto coarse = random_trajectory(sd, 17, 0.01);
    auto fine = random_trajectory(sd, 33, 0.005);
    const double e1 = check_bp_evolution(coarse), e2 = check_bp_evolution(fine);
    const double t1 = check_trace_identity(coarse), t2 = check_trace_identity(fine);
    auto sph_c = spherical_trajectory(sd, 17, 0.01);
    auto sph_f = spherical_trajectory(sd, 33, 0.005);
    const double s1 = check_spherical_reduction(sph_c), s2 = check_spherical_reduction(sph_f);

    line("evolution seed=" + std::to_string(sd),
         fmt("%.3e", e1) + " -> " + fmt("%.3e", e2) + " ratio " + fmt("%.2f", e1 / e2),
         in_bracket(e1 / e2, 3.5, 4.5));
    line("trace     seed=" + std::to_string(sd),
         fmt("%.3e", t1) + " -> " + fmt("%.3e", t2) + " ratio " + fmt("%.2f", t1 / t2),
         in_bracket(t1 / t2, 3.5, 4.5));
    line("spherical seed=" + std::to_string(sd),
         fmt("%.3e", s1) + " -> " + fmt("%.3e", s2) + " ratio " + fmt("%.2f", s1 / s2),
         in_bracket(s1 / s2, 3.5, 4.5));
  }

  GridSpec g{1, 32, 2, 3};
  Parameters p;
  State initial = verification_initial(g, p);
  auto w1 = verification_window(initial, p, 2e-4, 10);
  auto w2 = verification_window(initial, p, 1e-4, 20);

  const double fe1 = check_free_energy_rate(w1, p);
  const double fe2 = check_free_energy_rate(w2, p);
  line("free-energy-rate",
       fmt("%.3e", fe1) + " -> " + fmt("%.3e", fe2) + " ratio " + fmt("%.2f", fe1 / fe2),
       in_bracket(fe1 / fe2, 1.5, 2.7));

  const double sp1 = check_stress_power(w1, p);
  const double rel = std::abs(sp1 - fe1) / fe1;
  line("stress-power", "agreement " + fmt("%.3e", rel), rel < 1e-9);

  auto rep1 = check_energy_identity(w1, p);
  auto rep2 = check_energy_identity(w2, p);
  line("energy-identity",
       fmt("%.3e", rep1.max_residual) + " -> " + fmt("%.3e", rep2.max_residual) + " ratio " +
           fmt("%.2f", rep1.max_residual / rep2.max_residual),
       in_bracket(rep1.max_residual / rep2.max_residual, 2.8, 5.2));
  line("energy-ledger", "mismatch " + fmt("%.3e", rep1.max_ledger_mismatch),
       rep1.max_ledger_mismatch <= 1e-12);

  if (failures) {
    std::cerr << "error: runtime: verification failed (" << failures << " checks out of bracket)\n";
    return 3;
  }
  if (!quiet) std::cout << "all checks passed\n";
  return 0;
}

// Snapshot directories carry the config they were produced with.
RunConfig dir_config(const std::string& dir) {
  return parse_config(read_file((fs::path(dir) / "config.cfg").string()));
}

int cmd_evf(const std::string& dir, bool quiet) {
  RunConfig cfg = dir_config(dir);
  std::vector<State> states = read_state_snapshots(dir);
  if (states.empty()) throw IoError("no snapshots in " + dir);

  const int w = cfg.diagnostics.evf_window > 0 ? cfg.diagnostics.evf_window
                                               : static_cast<int>(states.size());
  CsvWriter csv((fs::path(dir) / "evf.csv").string(),
                {"t_start", "t_end", "lhs", "i1", "i2", "i3", "i4", "i5", "i6", "i7", "residual",
                 "combined_min"});
  double worst = 0.0, combined = 0.0;
  bool first = true;
  for (std::size_t start = 0; start + w <= states.size(); start += w - 1) {
    std::vector<State> window(states.begin() + start, states.begin() + start + w);
    EvfReport rep = evf_identity(window, cfg.params);
    csv.row({window.front().time, window.back().time, rep.lhs, rep.terms[0], rep.terms[1],
             rep.terms[2], rep.terms[3], rep.terms[4], rep.terms[5], rep.terms[6], rep.residual,
             rep.combined_min});
    worst = std::max(worst, std::abs(rep.residual));
    combined = first ? rep.combined_min : std::min(combined, rep.combined_min);
    first = false;
  }
  if (first) throw WindowTooShort("fewer snapshots than the configured window");
  if (!quiet)
    std::cout << "evf: max |residual| " << fmt("%.6e", worst) << ", min combined coefficient "
              << fmt("%.6e", combined) << "\n";
  return 0;
}

int cmd_energy_report(const std::string& dir, bool quiet) {
  RunConfig cfg = dir_config(dir);
  std::vector<State> states = read_state_snapshots(dir);
  if (states.empty()) throw IoError("no snapshots in " + dir);

  CsvWriter csv((fs::path(dir) / "energy_report.csv").string(),
                {"time", "kinetic", "pressure_potential", "gradient_b", "elastic", "total",
                 "viscous_dissipation", "relaxation_dissipation"});
  double e_first = 0.0, e_last = 0.0, max_rise = 0.0, prev = 0.0;
  for (std::size_t i = 0; i < states.size(); ++i) {
    EnergyLedger led = energy_ledger(states[i], cfg.params);
    csv.row({states[i].time, led.kinetic, led.pressure_potential, led.gradient_b, led.elastic,
             led.total, led.viscous_dissipation, led.relaxation_dissipation});
    if (i == 0) e_first = led.total;
    if (i > 0) max_rise = std::max(max_rise, led.total - prev);
    prev = led.total;
    e_last = led.total;
  }
  if (!quiet)
    std::cout << "energy: start " << g17(e_first) << ", end " << g17(e_last)
              << ", max single-interval rise " << fmt("%.6e", max_rise) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pseudo-spectral solver for a compressible viscoelastic fluid with stress diffusion"};
  app.require_subcommand(1);

  std::string config_path, snap_dir;
  std::optional<std::string> out_override;
  std::optional<std::uint64_t> seed_override;
  std::optional<long> snapshots_override;
  std::uint64_t verify_seed = 1;
  int trajectories = 20;
  bool quiet = false;
  std::function<int()> action;

  auto add_quiet = [&quiet](CLI::App* sub) { sub->add_flag("--quiet", quiet, "suppress progress output"); };

  auto* sim = app.add_subcommand("simulate", "run a configured simulation");
  sim->add_option("--config", config_path, "configuration file")->required();
  sim->add_option("--out", [&out_override](const std::vector<std::string>& v) {
    out_override = v.back();
    return true;
  }, "override the output directory");
  sim->add_option("--seed", [&seed_override](const std::vector<std::string>& v) {
    seed_override = std::stoull(v.back());
    return true;
  }, "override the initial-condition seed");
  sim->add_option("--snapshots-every", [&snapshots_override](const std::vector<std::string>& v) {
    snapshots_override = std::stol(v.back());
    return true;
  }, "override the snapshot cadence (steps)");
  add_quiet(sim);
  sim->callback([&] {
    action = [&] { return cmd_simulate(config_path, out_override, seed_override,
                                       snapshots_override, quiet); };
  });

  auto* mms = app.add_subcommand("mms", "manufactured-solution convergence study");
  mms->add_option("--config", config_path, "configuration file")->required();
  mms->add_option("--out", [&out_override](const std::vector<std::string>& v) {
    out_override = v.back();
    return true;
  }, "override the output directory");
  add_quiet(mms);
  mms->callback([&] { action = [&] { return cmd_mms(config_path, out_override, quiet); }; });

  auto* ver = app.add_subcommand("verify-derivation", "kinematic and energy identity checks");
  ver->add_option("--seed", verify_seed, "base seed for random trajectories");
  ver->add_option("--trajectories", trajectories, "number of seeded trajectories");
  add_quiet(ver);
  ver->callback([&] { action = [&] { return cmd_verify_derivation(verify_seed, trajectories, quiet); }; });

  auto* evf = app.add_subcommand("evf", "flux identity report from stored snapshots");
  evf->add_option("dir", snap_dir, "snapshot directory")->required();
  add_quiet(evf);
  evf->callback([&] { action = [&] { return cmd_evf(snap_dir, quiet); }; });

  auto* enr = app.add_subcommand("energy-report", "energy ledger table from stored snapshots");
  enr->add_option("dir", snap_dir, "snapshot directory")->required();
  add_quiet(enr);
  enr->callback([&] { action = [&] { return cmd_energy_report(snap_dir, quiet); }; });

  auto* val = app.add_subcommand("validate", "parse and validate a configuration");
  val->add_option("--config", config_path, "configuration file")->required();
  val->callback([&] { action = [&] { return cmd_validate(config_path); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    return action();
  } catch (const sdflow::ParseError& e) {
    std::cerr << "error: config: " << one_line(e.what()) << "\n";
    return 2;
  } catch (const ValidationError& e) {
    std::cerr << "error: config: " << one_line(e.what()) << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "error: io: " << one_line(e.what()) << "\n";
    return 4;
  } catch (const Error& e) {
    std::cerr << "error: runtime: " << one_line(e.what()) << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: runtime: " << one_line(e.what()) << "\n";
    return 3;
  }
}
