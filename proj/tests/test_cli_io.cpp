#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "sdflow/config.hpp"
#include "sdflow/constitutive.hpp"
#include "sdflow/csv.hpp"
#include "sdflow/errors.hpp"
#include "sdflow/random_fields.hpp"
#include "sdflow/snapshot.hpp"
#include "sdflow/spectral.hpp"

using namespace sdflow;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& tag) {
  fs::path d = fs::temp_directory_path() / ("sdflow_test_" + tag);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string parse_error_of(const std::string& text) {
  try {
    (void)parse_config(text);
  } catch (const ParseError& e) {
    return e.what();
  }
  return "<no error>";
}

std::string validation_error_of(const std::string& text) {
  try {
    (void)parse_config(text);
  } catch (const ValidationError& e) {
    return e.what();
  }
  return "<no error>";
}

}  // namespace

TEST_CASE("empty text parses to the default configuration") {
  RunConfig cfg = parse_config("");
  CHECK(cfg == RunConfig{});
  CHECK(cfg.grid.dim == 1);
  CHECK(cfg.grid.points_per_axis == 16);
  CHECK(cfg.params.theorem_mode());
  CHECK(cfg.initial.kind == InitialKind::uniform);
}

TEST_CASE("comments, blank lines and whitespace are ignored") {
  RunConfig cfg = parse_config(
      "# leading comment\n"
      "  ; alternate comment style\n"
      "\r\n"
      "[grid]\r\n"
      "  points = 64   # inline comment\r\n"
      "\tdim=2;another\n");
  CHECK(cfg.grid.points_per_axis == 64);
  CHECK(cfg.grid.dim == 2);
}

TEST_CASE("serialize then parse is the identity on a fully customized config") {
  RunConfig cfg;
  cfg.grid = GridSpec{3, 24, 1, 2};
  cfg.params.mu = 0.3;
  cfg.params.lambda = 0.125;
  cfg.params.nu = 1.0 / 3.0;
  cfg.params.sigma = 1e-7;
  cfg.params.a0 = 2.5;
  cfg.params.a1 = 0.7;
  cfg.params.a2 = 1.3;
  cfg.params.gamma = 2.5;  // valid, just outside theorem mode
  cfg.params.alpha = 1.0;
  cfg.params.epsilon = 1e-3;
  cfg.params.m_cutoff = 5;
  cfg.params.elastic = ElasticModel::linear_log;
  cfg.initial.kind = InitialKind::seeded_random;
  cfg.initial.rho0 = 0.9;
  cfg.initial.b0 = 1.7;
  cfg.initial.rho_amplitude = 0.1;
  cfg.initial.u_amplitude = 0.05;
  cfg.initial.b_amplitude = 0.2;
  cfg.initial.support = 3;
  cfg.initial.seed = 987654321;
  cfg.t_end = 0.37;
  cfg.snapshot_every = 25;
  cfg.out_dir = "runs/case_a";
  cfg.solver.cfl = 0.35;
  cfg.solver.dt_max = 2e-3;
  cfg.solver.dt_fixed = 1e-4;
  cfg.solver.picard_tol = 1e-12;
  cfg.solver.max_picard = 30;
  cfg.solver.max_halvings = 9;
  cfg.solver.b_floor = 1e-7;
  cfg.diagnostics.energy = false;
  cfg.diagnostics.norms = true;
  cfg.diagnostics.evf_window = 7;
  cfg.diagnostics.renormalized = true;
  cfg.diagnostics.rho_b_pair = true;
  cfg.mms.points = {16, 24, 32, 48};
  cfg.mms.dts = {4e-4, 2e-4, 1e-4, 5e-5};
  cfg.mms.t_end = 0.011;

  RunConfig back = parse_config(serialize_config(cfg));
  CHECK(back == cfg);
  CHECK(!back.params.theorem_mode());
  // serializing the round-tripped config reproduces the same bytes
  CHECK(serialize_config(back) == serialize_config(cfg));
}

TEST_CASE("parse errors carry the line and column of the offending token") {
  CHECK(parse_error_of("[jelly]\n") == "line 1, column 1: unknown section [jelly]");
  CHECK(parse_error_of("[grid]\nspacing = 3\n") ==
        "line 2, column 1: unknown key 'spacing' in [grid]");
  CHECK(parse_error_of("[grid]\n  zz = 1\n") == "line 2, column 3: unknown key 'zz' in [grid]");
  CHECK(parse_error_of("[params]\nmu = fast\n") ==
        "line 2, column 6: expected a number, got 'fast'");
  CHECK(parse_error_of("[run]\nt_end 0.1\n") == "line 2, column 1: expected 'key = value'");
  CHECK(parse_error_of("t_end = 0.1\n") == "line 1, column 1: key outside any section");
  CHECK(parse_error_of("[run]\nt_end =\n") == "line 2, column 8: empty value for key 't_end'");
  CHECK(parse_error_of("[grid]\ndealias = x\n") ==
        "line 2, column 11: expected an integer, got 'x'");
  CHECK(parse_error_of("[initial]\nkind = square\n") ==
        "line 2, column 8: unknown initial kind 'square' (uniform | trig-perturbation | "
        "seeded-random)");
  CHECK(parse_error_of("[diagnostics]\nenergy = maybe\n") ==
        "line 2, column 10: expected true/false, got 'maybe'");
}

TEST_CASE("validation reports every violation at once") {
  const std::string msg = validation_error_of(
      "[params]\nmu = -1\nnu = -2\n"
      "[run]\nt_end = -3\n");
  CHECK(msg.find("mu must be > 0") != std::string::npos);
  CHECK(msg.find("nu must be > 0") != std::string::npos);
  CHECK(msg.find("t_end must be >= 0") != std::string::npos);
  // an empty out_dir cannot be written in the text form (empty values are
  // parse errors), so clear it on the struct
  RunConfig cfg;
  cfg.out_dir.clear();
  cfg.solver.cfl = -1;
  auto v = config_violations(cfg);
  REQUIRE(v.size() == 2);
  CHECK(v[0] == "run: out_dir must not be empty");
  CHECK(v[1] == "solver: cfl must be > 0");
}

TEST_CASE("window diagnostics demand a fixed step and a snapshot cadence") {
  const std::string base = "[diagnostics]\nevf_window = 5\n";
  CHECK(validation_error_of(base).find("window residuals") != std::string::npos);
  // satisfying both prerequisites clears the complaint
  RunConfig ok = parse_config(base + "[run]\nsnapshot_every = 10\n[solver]\ndt_fixed = 1e-4\n");
  CHECK(ok.diagnostics.evf_window == 5);
  // a window of 2 is never meaningful
  CHECK(validation_error_of("[diagnostics]\nevf_window = 2\n").find("evf_window") !=
        std::string::npos);
}

TEST_CASE("dealias accepts a fraction or a bare integer") {
  CHECK(parse_config("[grid]\ndealias = 2/3\n").grid.dealias_num == 2);
  RunConfig one = parse_config("[grid]\ndealias = 1\n");
  CHECK(one.grid.dealias_num == 1);
  CHECK(one.grid.dealias_den == 1);
  CHECK(validation_error_of("[grid]\ndealias = 3/2\n").find("dealias") != std::string::npos);
}

TEST_CASE("gamma below the theorem threshold is accepted but flagged") {
  RunConfig cfg = parse_config("[params]\ngamma = 2.5\n");
  CHECK(!cfg.params.theorem_mode());
  CHECK(cfg.params.gamma == 2.5);
}

TEST_CASE("uniform initial data with b0 = 0 sits at the elastic equilibrium") {
  RunConfig cfg = parse_config("[grid]\npoints = 8\n");
  State s = build_initial_state(cfg);
  const double beq = equilibrium_b(cfg.params);
  for (double v : s.b.values()) CHECK(v == beq);
  for (double v : s.rho.values()) CHECK(v == 1.0);
  CHECK(max_abs(s.u[0]) == 0.0);
}

TEST_CASE("trig perturbations have the advertised closed form") {
  RunConfig cfg = parse_config(
      "[grid]\ndim = 2\npoints = 8\n"
      "[initial]\nkind = trig-perturbation\nrho0 = 1.5\nb0 = 2.0\n"
      "rho_amplitude = 0.25\nu_amplitude = 0.125\nb_amplitude = 0.0625\n");
  State s = build_initial_state(cfg);
  const GridSpec& g = cfg.grid;
  for (std::size_t lin = 0; lin < g.num_points(); ++lin) {
    auto idx = axis_indices(g, lin);
    const double x = g.coordinate(idx[0]), y = g.coordinate(idx[1]);
    const double c = std::cos(kPi * x) + std::cos(kPi * y);
    CHECK(s.rho.values()[lin] == doctest::Approx(1.5 + 0.25 * c).epsilon(1e-15));
    CHECK(s.b.values()[lin] == doctest::Approx(2.0 + 0.0625 * c).epsilon(1e-15));
    CHECK(s.u[0].values()[lin] == doctest::Approx(0.125 * std::sin(kPi * x)).epsilon(1e-15));
    CHECK(s.u[1].values()[lin] == doctest::Approx(0.125 * std::sin(kPi * y)).epsilon(1e-15));
  }
}

TEST_CASE("seeded random initial data is deterministic and seed-sensitive") {
  RunConfig cfg = parse_config(
      "[grid]\ndim = 2\npoints = 16\n"
      "[initial]\nkind = seeded-random\nrho_amplitude = 0.2\nu_amplitude = 0.1\n"
      "b_amplitude = 0.15\nsupport = 3\nseed = 11\n");
  State a = build_initial_state(cfg);
  State b = build_initial_state(cfg);
  CHECK(std::memcmp(a.rho.values().data(), b.rho.values().data(),
                    a.rho.values().size() * sizeof(double)) == 0);
  CHECK(std::memcmp(a.b.values().data(), b.b.values().data(),
                    a.b.values().size() * sizeof(double)) == 0);
  CHECK(std::memcmp(a.u[0].values().data(), b.u[0].values().data(),
                    a.u[0].values().size() * sizeof(double)) == 0);

  cfg.initial.seed = 12;
  State c = build_initial_state(cfg);
  CHECK(max_abs(sub(a.rho, c.rho)) > 0.0);

  // offsets survive: the perturbations are mean-free around rho0 and the
  // equilibrium b, and peak exactly at the requested amplitude
  CHECK(mean(a.rho) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(max_abs(sub(a.rho, ScalarField::constant(cfg.grid, 1.0))) == doctest::Approx(0.2));
}

TEST_CASE("initial data that loses positivity is rejected with both fields named") {
  RunConfig cfg = parse_config(
      "[grid]\npoints = 16\n"
      "[initial]\nkind = trig-perturbation\nrho_amplitude = 1.5\nb_amplitude = 9.0\n");
  try {
    (void)build_initial_state(cfg);
    FAIL("expected a positivity failure");
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("density") != std::string::npos);
    CHECK(msg.find("b perturbation") != std::string::npos);
  }
}

TEST_CASE("field snapshots round-trip bit for bit") {
  const fs::path dir = temp_dir("fsnp");
  GridSpec g{2, 12, 2, 3};
  ScalarField f = random_band_limited(g, 3, 0.7, 42);
  f = add(f, ScalarField::constant(g, 1.25));
  const fs::path file = dir / "field.fsnp";
  write_field_snapshot(file.string(), "rho", 0.625, f);

  FieldSnapshot snap = read_field_snapshot(file.string());
  CHECK(snap.name == "rho");
  CHECK(snap.time == 0.625);
  CHECK(snap.field.grid() == g);
  REQUIRE(snap.field.values().size() == f.values().size());
  CHECK(std::memcmp(snap.field.values().data(), f.values().data(),
                    f.values().size() * sizeof(double)) == 0);
}

TEST_CASE("snapshot reader rejects malformed files") {
  const fs::path dir = temp_dir("fsnp_bad");
  GridSpec g{1, 8, 2, 3};
  ScalarField f = ScalarField::constant(g, 2.0);
  const fs::path file = dir / "field.fsnp";
  write_field_snapshot(file.string(), "b", 0.0, f);

  SUBCASE("truncation") {
    auto bytes = slurp(file);
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() - 9));
    out.close();
    CHECK_THROWS_AS((void)read_field_snapshot(file.string()), IoError);
  }
  SUBCASE("trailing garbage") {
    std::ofstream out(file, std::ios::binary | std::ios::app);
    out.write("xx", 2);
    out.close();
    CHECK_THROWS_WITH_AS((void)read_field_snapshot(file.string()),
                         doctest::Contains("trailing bytes"), IoError);
  }
  SUBCASE("bad magic") {
    auto bytes = slurp(file);
    bytes[0] = 'X';
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.close();
    CHECK_THROWS_AS((void)read_field_snapshot(file.string()), IoError);
  }
}

TEST_CASE("state snapshot groups read back in index order") {
  const fs::path dir = temp_dir("groups");
  GridSpec g{2, 8, 2, 3};
  auto make = [&](double t, double fill) {
    State s;
    s.rho = ScalarField::constant(g, 1.0 + fill);
    s.u = VectorField::zeros(g);
    s.u[0] = ScalarField::constant(g, fill);
    s.b = ScalarField::constant(g, 2.0 - fill);
    s.time = t;
    return s;
  };
  write_state_snapshot(dir.string(), 123, make(0.3, 0.03));
  write_state_snapshot(dir.string(), 0, make(0.0, 0.01));
  write_state_snapshot(dir.string(), 7, make(0.1, 0.02));

  auto states = read_state_snapshots(dir.string());
  REQUIRE(states.size() == 3);
  CHECK(states[0].time == 0.0);
  CHECK(states[1].time == 0.1);
  CHECK(states[2].time == 0.3);
  CHECK(states[1].u[0].values()[0] == 0.02);

  SUBCASE("a component with a mismatched time poisons the group") {
    write_field_snapshot((dir / "b_00000007.fsnp").string(), "b", 0.9,
                         ScalarField::constant(g, 1.0));
    CHECK_THROWS_WITH_AS((void)read_state_snapshots(dir.string()),
                         doctest::Contains("inconsistent snapshot group"), IoError);
  }
  SUBCASE("a missing velocity component is an error") {
    fs::remove(dir / "u0_00000007.fsnp");
    CHECK_THROWS_AS((void)read_state_snapshots(dir.string()), IoError);
  }
  SUBCASE("an empty directory reads as an empty group") {
    const fs::path empty = temp_dir("groups_empty");
    CHECK(read_state_snapshots(empty.string()).empty());
  }
}

TEST_CASE("g17 is a lossless double formatter") {
  const double cases[] = {0.1,    1.0 / 3.0, 1.0,   -0.0,     6.02e23,
                          5e-324, 1e300,     -M_PI, 0.499999999999999944};
  for (double x : cases) {
    const std::string s = g17(x);
    const double back = std::strtod(s.c_str(), nullptr);
    CHECK(std::memcmp(&back, &x, sizeof x) == 0);
  }
  CHECK(g17(1.0) == "1");
  CHECK(g17(0.1) == "0.10000000000000001");
}

TEST_CASE("csv writer emits a header and rejects ragged rows") {
  const fs::path dir = temp_dir("csv");
  const fs::path file = dir / "table.csv";
  {
    CsvWriter csv(file.string(), {"time", "value"});
    csv.row({0.0, 0.1});
    csv.row({1.0, -2.5});
    CHECK_THROWS_AS(csv.row({1.0}), std::invalid_argument);
  }
  CHECK(slurp(file) ==
        "time,value\n"
        "0,0.10000000000000001\n"
        "1,-2.5\n");
}
