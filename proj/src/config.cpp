#include "sdflow/config.hpp"

#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <sstream>
#include <string>

#include "sdflow/constitutive.hpp"
#include "sdflow/csv.hpp"
#include "sdflow/errors.hpp"
#include "sdflow/random_fields.hpp"
#include "sdflow/spectral.hpp"

namespace sdflow {

namespace {

[[noreturn]] void fail_at(int line, int col, const std::string& what) {
  throw ParseError("line " + std::to_string(line) + ", column " + std::to_string(col) + ": " + what);
}

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

double parse_double(const std::string& v, int line, int col) {
  errno = 0;
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (end != v.c_str() + v.size() || v.empty() || errno == ERANGE)
    fail_at(line, col, "expected a number, got '" + v + "'");
  return x;
}

long parse_long(const std::string& v, int line, int col) {
  errno = 0;
  char* end = nullptr;
  const long x = std::strtol(v.c_str(), &end, 10);
  if (end != v.c_str() + v.size() || v.empty() || errno == ERANGE)
    fail_at(line, col, "expected an integer, got '" + v + "'");
  return x;
}

int parse_int(const std::string& v, int line, int col) {
  const long x = parse_long(v, line, col);
  if (x < -2147483647L || x > 2147483647L) fail_at(line, col, "integer out of range: '" + v + "'");
  return static_cast<int>(x);
}

std::uint64_t parse_u64(const std::string& v, int line, int col) {
  errno = 0;
  char* end = nullptr;
  const unsigned long long x = std::strtoull(v.c_str(), &end, 10);
  if (end != v.c_str() + v.size() || v.empty() || errno == ERANGE || v.front() == '-')
    fail_at(line, col, "expected an unsigned integer, got '" + v + "'");
  return x;
}

bool parse_bool(const std::string& v, int line, int col) {
  if (v == "true" || v == "on" || v == "1") return true;
  if (v == "false" || v == "off" || v == "0") return false;
  fail_at(line, col, "expected true/false, got '" + v + "'");
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : v) {
    if (std::isspace(static_cast<unsigned char>(c)) || c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

void parse_dealias(const std::string& v, int line, int col, GridSpec& g) {
  const auto slash = v.find('/');
  if (slash == std::string::npos) {
    g.dealias_num = parse_int(v, line, col);
    g.dealias_den = 1;
    return;
  }
  g.dealias_num = parse_int(v.substr(0, slash), line, col);
  g.dealias_den = parse_int(v.substr(slash + 1), line, col);
}

InitialKind parse_kind(const std::string& v, int line, int col) {
  if (v == "uniform") return InitialKind::uniform;
  if (v == "trig-perturbation") return InitialKind::trig_perturbation;
  if (v == "seeded-random") return InitialKind::seeded_random;
  fail_at(line, col, "unknown initial kind '" + v + "' (uniform | trig-perturbation | seeded-random)");
}

ElasticModel parse_elastic(const std::string& v, int line, int col) {
  if (v == "power_log") return ElasticModel::power_log;
  if (v == "linear_log") return ElasticModel::linear_log;
  fail_at(line, col, "unknown elastic model '" + v + "' (power_log | linear_log)");
}

void apply_key(RunConfig& cfg, const std::string& section, const std::string& key,
               const std::string& value, int line, int kcol, int vcol) {
  if (section == "grid") {
    if (key == "dim") cfg.grid.dim = parse_int(value, line, vcol);
    else if (key == "points") cfg.grid.points_per_axis = parse_int(value, line, vcol);
    else if (key == "dealias") parse_dealias(value, line, vcol, cfg.grid);
    else fail_at(line, kcol, "unknown key '" + key + "' in [grid]");
  } else if (section == "params") {
    auto& p = cfg.params;
    if (key == "mu") p.mu = parse_double(value, line, vcol);
    else if (key == "lambda") p.lambda = parse_double(value, line, vcol);
    else if (key == "nu") p.nu = parse_double(value, line, vcol);
    else if (key == "sigma") p.sigma = parse_double(value, line, vcol);
    else if (key == "a0") p.a0 = parse_double(value, line, vcol);
    else if (key == "a1") p.a1 = parse_double(value, line, vcol);
    else if (key == "a2") p.a2 = parse_double(value, line, vcol);
    else if (key == "gamma") p.gamma = parse_double(value, line, vcol);
    else if (key == "alpha") p.alpha = parse_double(value, line, vcol);
    else if (key == "s") p.s = parse_double(value, line, vcol);
    else if (key == "epsilon") p.epsilon = parse_double(value, line, vcol);
    else if (key == "cutoff") p.m_cutoff = parse_int(value, line, vcol);
    else if (key == "elastic") p.elastic = parse_elastic(value, line, vcol);
    else fail_at(line, kcol, "unknown key '" + key + "' in [params]");
  } else if (section == "initial") {
    auto& ic = cfg.initial;
    if (key == "kind") ic.kind = parse_kind(value, line, vcol);
    else if (key == "rho0") ic.rho0 = parse_double(value, line, vcol);
    else if (key == "b0") ic.b0 = parse_double(value, line, vcol);
    else if (key == "rho_amplitude") ic.rho_amplitude = parse_double(value, line, vcol);
    else if (key == "u_amplitude") ic.u_amplitude = parse_double(value, line, vcol);
    else if (key == "b_amplitude") ic.b_amplitude = parse_double(value, line, vcol);
    else if (key == "support") ic.support = parse_int(value, line, vcol);
    else if (key == "seed") ic.seed = parse_u64(value, line, vcol);
    else fail_at(line, kcol, "unknown key '" + key + "' in [initial]");
  } else if (section == "run") {
    if (key == "t_end") cfg.t_end = parse_double(value, line, vcol);
    else if (key == "snapshot_every") cfg.snapshot_every = parse_long(value, line, vcol);
    else if (key == "out_dir") cfg.out_dir = value;
    else fail_at(line, kcol, "unknown key '" + key + "' in [run]");
  } else if (section == "solver") {
    auto& so = cfg.solver;
    if (key == "cfl") so.cfl = parse_double(value, line, vcol);
    else if (key == "dt_max") so.dt_max = parse_double(value, line, vcol);
    else if (key == "dt_fixed") so.dt_fixed = parse_double(value, line, vcol);
    else if (key == "picard_tol") so.picard_tol = parse_double(value, line, vcol);
    else if (key == "max_picard") so.max_picard = parse_int(value, line, vcol);
    else if (key == "max_halvings") so.max_halvings = parse_int(value, line, vcol);
    else if (key == "b_floor") so.b_floor = parse_double(value, line, vcol);
    else fail_at(line, kcol, "unknown key '" + key + "' in [solver]");
  } else if (section == "diagnostics") {
    auto& dg = cfg.diagnostics;
    if (key == "energy") dg.energy = parse_bool(value, line, vcol);
    else if (key == "norms") dg.norms = parse_bool(value, line, vcol);
    else if (key == "evf_window") dg.evf_window = parse_int(value, line, vcol);
    else if (key == "renormalized") dg.renormalized = parse_bool(value, line, vcol);
    else if (key == "rho_b_pair") dg.rho_b_pair = parse_bool(value, line, vcol);
    else fail_at(line, kcol, "unknown key '" + key + "' in [diagnostics]");
  } else if (section == "mms") {
    if (key == "points") {
      cfg.mms.points.clear();
      for (const auto& tok : split_list(value)) cfg.mms.points.push_back(parse_int(tok, line, vcol));
    } else if (key == "dt") {
      cfg.mms.dts.clear();
      for (const auto& tok : split_list(value)) cfg.mms.dts.push_back(parse_double(tok, line, vcol));
    } else if (key == "t_end") {
      cfg.mms.t_end = parse_double(value, line, vcol);
    } else {
      fail_at(line, kcol, "unknown key '" + key + "' in [mms]");
    }
  } else {
    fail_at(line, kcol, "key outside any section");
  }
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::string section;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    // comments run to end of line
    std::string s = raw;
    const auto hash = s.find_first_of("#;");
    if (hash != std::string::npos) s = s.substr(0, hash);
    const std::string t = trim(s);
    if (t.empty()) continue;

    const int first_col = static_cast<int>(s.find_first_not_of(" \t")) + 1;
    if (t.front() == '[') {
      if (t.back() != ']' || t.size() < 3) fail_at(line, first_col, "malformed section header");
      const std::string name = trim(t.substr(1, t.size() - 2));
      if (name != "grid" && name != "params" && name != "initial" && name != "run" &&
          name != "solver" && name != "diagnostics" && name != "mms")
        fail_at(line, first_col, "unknown section [" + name + "]");
      section = name;
      continue;
    }

    const auto eq = s.find('=');
    if (eq == std::string::npos) fail_at(line, first_col, "expected 'key = value'");
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    if (key.empty()) fail_at(line, first_col, "empty key");
    const auto vpos = s.find_first_not_of(" \t", eq + 1);
    const int vcol = vpos == std::string::npos ? static_cast<int>(eq) + 2 : static_cast<int>(vpos) + 1;
    if (value.empty()) fail_at(line, vcol, "empty value for key '" + key + "'");
    apply_key(cfg, section, key, value, line, first_col, vcol);
  }
  validate_config(cfg);
  return cfg;
}

std::vector<std::string> config_violations(const RunConfig& cfg) {
  std::vector<std::string> v;

  const auto& g = cfg.grid;
  if (g.dim < 1 || g.dim > 3) v.push_back("grid: dim must be 1, 2 or 3");
  if (g.points_per_axis < 4 || g.points_per_axis % 2 != 0)
    v.push_back("grid: points must be even and >= 4");
  if (g.dealias_num <= 0 || g.dealias_den <= 0 || g.dealias_num > g.dealias_den)
    v.push_back("grid: dealias fraction must lie in (0,1]");

  for (auto& msg : cfg.params.violations()) v.push_back(msg);

  const auto& ic = cfg.initial;
  if (!(ic.rho0 > 0.0)) v.push_back("initial: rho0 must be > 0");
  if (!(ic.b0 >= 0.0)) v.push_back("initial: b0 must be >= 0 (0 selects the equilibrium value)");
  if (!(ic.rho_amplitude >= 0.0) || !std::isfinite(ic.rho_amplitude))
    v.push_back("initial: rho_amplitude must be finite and >= 0");
  if (!(ic.u_amplitude >= 0.0) || !std::isfinite(ic.u_amplitude))
    v.push_back("initial: u_amplitude must be finite and >= 0");
  if (!(ic.b_amplitude >= 0.0) || !std::isfinite(ic.b_amplitude))
    v.push_back("initial: b_amplitude must be finite and >= 0");
  if (ic.kind == InitialKind::seeded_random &&
      (ic.support < 1 || (g.dim >= 1 && g.points_per_axis >= 4 && ic.support > g.m_max())))
    v.push_back("initial: support must lie in [1, m_max] for seeded-random data");

  if (!(cfg.t_end >= 0.0)) v.push_back("run: t_end must be >= 0");
  if (cfg.snapshot_every < 0) v.push_back("run: snapshot_every must be >= 0");
  if (cfg.out_dir.empty()) v.push_back("run: out_dir must not be empty");

  const auto& so = cfg.solver;
  if (!(so.cfl > 0.0)) v.push_back("solver: cfl must be > 0");
  if (!(so.dt_max > 0.0)) v.push_back("solver: dt_max must be > 0");
  if (!(so.dt_fixed >= 0.0)) v.push_back("solver: dt_fixed must be >= 0");
  if (!(so.picard_tol > 0.0)) v.push_back("solver: picard_tol must be > 0");
  if (so.max_picard < 1) v.push_back("solver: max_picard must be >= 1");
  if (so.max_halvings < 0) v.push_back("solver: max_halvings must be >= 0");
  if (!(so.b_floor > 0.0)) v.push_back("solver: b_floor must be > 0");

  const auto& dg = cfg.diagnostics;
  if (dg.evf_window != 0 && dg.evf_window < 3)
    v.push_back("diagnostics: evf_window must be 0 (off) or >= 3");
  const bool window_diag = dg.evf_window > 0 || dg.renormalized || dg.rho_b_pair;
  if (window_diag && (cfg.snapshot_every <= 0 || !(so.dt_fixed > 0.0)))
    v.push_back(
        "diagnostics: window residuals need uniformly spaced snapshots "
        "(set run.snapshot_every > 0 and solver.dt_fixed > 0)");

  const auto& m = cfg.mms;
  if (m.points.size() < 3) v.push_back("mms: at least 3 rungs");
  for (int pt : m.points)
    if (pt < 4 || pt % 2 != 0) {
      v.push_back("mms: every points entry must be even and >= 4");
      break;
    }
  if (m.dts.size() != 1 && m.dts.size() != m.points.size())
    v.push_back("mms: dt must be a single value or one per rung");
  for (double dt : m.dts)
    if (!(dt > 0.0)) {
      v.push_back("mms: every dt must be > 0");
      break;
    }
  if (!(m.t_end > 0.0)) v.push_back("mms: t_end must be > 0");

  return v;
}

void validate_config(const RunConfig& cfg) {
  auto v = config_violations(cfg);
  if (v.empty()) return;
  std::string msg;
  for (const auto& s : v) msg += (msg.empty() ? "" : "\n") + s;
  throw ValidationError(msg);
}

std::string serialize_config(const RunConfig& cfg) {
  std::ostringstream out;
  out << "[grid]\n";
  out << "dim = " << cfg.grid.dim << "\n";
  out << "points = " << cfg.grid.points_per_axis << "\n";
  out << "dealias = " << cfg.grid.dealias_num << "/" << cfg.grid.dealias_den << "\n";

  const auto& p = cfg.params;
  out << "\n[params]\n";
  out << "mu = " << g17(p.mu) << "\n";
  out << "lambda = " << g17(p.lambda) << "\n";
  out << "nu = " << g17(p.nu) << "\n";
  out << "sigma = " << g17(p.sigma) << "\n";
  out << "a0 = " << g17(p.a0) << "\n";
  out << "a1 = " << g17(p.a1) << "\n";
  out << "a2 = " << g17(p.a2) << "\n";
  out << "gamma = " << g17(p.gamma) << "\n";
  out << "alpha = " << g17(p.alpha) << "\n";
  out << "s = " << g17(p.s) << "\n";
  out << "epsilon = " << g17(p.epsilon) << "\n";
  out << "cutoff = " << p.m_cutoff << "\n";
  out << "elastic = " << (p.elastic == ElasticModel::power_log ? "power_log" : "linear_log") << "\n";

  const auto& ic = cfg.initial;
  out << "\n[initial]\n";
  out << "kind = "
      << (ic.kind == InitialKind::uniform
              ? "uniform"
              : ic.kind == InitialKind::trig_perturbation ? "trig-perturbation" : "seeded-random")
      << "\n";
  out << "rho0 = " << g17(ic.rho0) << "\n";
  out << "b0 = " << g17(ic.b0) << "\n";
  out << "rho_amplitude = " << g17(ic.rho_amplitude) << "\n";
  out << "u_amplitude = " << g17(ic.u_amplitude) << "\n";
  out << "b_amplitude = " << g17(ic.b_amplitude) << "\n";
  out << "support = " << ic.support << "\n";
  out << "seed = " << ic.seed << "\n";

  out << "\n[run]\n";
  out << "t_end = " << g17(cfg.t_end) << "\n";
  out << "snapshot_every = " << cfg.snapshot_every << "\n";
  out << "out_dir = " << cfg.out_dir << "\n";

  const auto& so = cfg.solver;
  out << "\n[solver]\n";
  out << "cfl = " << g17(so.cfl) << "\n";
  out << "dt_max = " << g17(so.dt_max) << "\n";
  out << "dt_fixed = " << g17(so.dt_fixed) << "\n";
  out << "picard_tol = " << g17(so.picard_tol) << "\n";
  out << "max_picard = " << so.max_picard << "\n";
  out << "max_halvings = " << so.max_halvings << "\n";
  out << "b_floor = " << g17(so.b_floor) << "\n";

  const auto& dg = cfg.diagnostics;
  out << "\n[diagnostics]\n";
  out << "energy = " << (dg.energy ? "true" : "false") << "\n";
  out << "norms = " << (dg.norms ? "true" : "false") << "\n";
  out << "evf_window = " << dg.evf_window << "\n";
  out << "renormalized = " << (dg.renormalized ? "true" : "false") << "\n";
  out << "rho_b_pair = " << (dg.rho_b_pair ? "true" : "false") << "\n";

  out << "\n[mms]\n";
  out << "points =";
  for (int pt : cfg.mms.points) out << " " << pt;
  out << "\n";
  out << "dt =";
  for (double dt : cfg.mms.dts) out << " " << g17(dt);
  out << "\n";
  out << "t_end = " << g17(cfg.mms.t_end) << "\n";
  return out.str();
}

State build_initial_state(const RunConfig& cfg) {
  const GridSpec& g = cfg.grid;
  const auto& ic = cfg.initial;
  const double b0 = ic.b0 == 0.0 ? equilibrium_b(cfg.params) : ic.b0;

  State s;
  s.rho = ScalarField::constant(g, ic.rho0);
  s.u = VectorField::zeros(g);
  s.b = ScalarField::constant(g, b0);

  if (ic.kind == InitialKind::trig_perturbation) {
    auto cos_sum = [&g](double amp) {
      std::vector<double> v(g.num_points(), 0.0);
      for (std::size_t lin = 0; lin < v.size(); ++lin) {
        auto idx = axis_indices(g, lin);
        for (int a = 0; a < g.dim; ++a) v[lin] += amp * std::cos(kPi * g.coordinate(idx[a]));
      }
      return ScalarField::from_values(g, std::move(v));
    };
    if (ic.rho_amplitude > 0.0) s.rho = add(s.rho, cos_sum(ic.rho_amplitude));
    if (ic.b_amplitude > 0.0) s.b = add(s.b, cos_sum(ic.b_amplitude));
    if (ic.u_amplitude > 0.0) {
      for (int a = 0; a < g.dim; ++a) {
        std::vector<double> v(g.num_points());
        for (std::size_t lin = 0; lin < v.size(); ++lin) {
          auto idx = axis_indices(g, lin);
          v[lin] = ic.u_amplitude * std::sin(kPi * g.coordinate(idx[a]));
        }
        s.u[a] = ScalarField::from_values(g, std::move(v));
      }
    }
  } else if (ic.kind == InitialKind::seeded_random) {
    // disjoint seed blocks so the three fields never share a stream
    if (ic.rho_amplitude > 0.0)
      s.rho = add(s.rho, random_band_limited(g, ic.support, ic.rho_amplitude, ic.seed));
    if (ic.u_amplitude > 0.0)
      s.u = random_band_limited_vector(g, ic.support, ic.u_amplitude, ic.seed + 16);
    if (ic.b_amplitude > 0.0)
      s.b = add(s.b, random_band_limited(g, ic.support, ic.b_amplitude, ic.seed + 32));
  }

  std::vector<std::string> bad;
  if (!(min_value(s.rho) > 0.0)) bad.push_back("initial: density perturbation reaches zero or below");
  if (!(min_value(s.b) > 0.0)) bad.push_back("initial: b perturbation reaches zero or below");
  if (!bad.empty()) {
    std::string msg;
    for (const auto& m : bad) msg += (msg.empty() ? "" : "\n") + m;
    throw ValidationError(msg);
  }
  return s;
}

}  // namespace sdflow
