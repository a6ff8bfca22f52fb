#include "sdflow/derivation.hpp"

#include <cmath>
#include <cstddef>
#include <random>
#include <stdexcept>
#include <vector>

#include "sdflow/constitutive.hpp"
#include "sdflow/diagnostics.hpp"
#include "sdflow/errors.hpp"
#include "sdflow/spectral.hpp"

namespace sdflow {

Mat3 Mat3::identity() {
  Mat3 r;
  r.m = {1, 0, 0, 0, 1, 0, 0, 0, 1};
  return r;
}

Mat3 Mat3::operator+(const Mat3& o) const {
  Mat3 r;
  for (int i = 0; i < 9; ++i) r.m[static_cast<std::size_t>(i)] = m[static_cast<std::size_t>(i)] + o.m[static_cast<std::size_t>(i)];
  return r;
}

Mat3 Mat3::operator-(const Mat3& o) const {
  Mat3 r;
  for (int i = 0; i < 9; ++i) r.m[static_cast<std::size_t>(i)] = m[static_cast<std::size_t>(i)] - o.m[static_cast<std::size_t>(i)];
  return r;
}

Mat3 Mat3::operator*(const Mat3& o) const {
  Mat3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += at(i, k) * o.at(k, j);
      r.at(i, j) = s;
    }
  return r;
}

Mat3 Mat3::scaled(double s) const {
  Mat3 r;
  for (int i = 0; i < 9; ++i) r.m[static_cast<std::size_t>(i)] = s * m[static_cast<std::size_t>(i)];
  return r;
}

Mat3 Mat3::transpose() const {
  Mat3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r.at(i, j) = at(j, i);
  return r;
}

Mat3 Mat3::sym() const { return (*this + transpose()).scaled(0.5); }

double Mat3::trace() const { return at(0, 0) + at(1, 1) + at(2, 2); }

double Mat3::det() const {
  return at(0, 0) * (at(1, 1) * at(2, 2) - at(1, 2) * at(2, 1)) -
         at(0, 1) * (at(1, 0) * at(2, 2) - at(1, 2) * at(2, 0)) +
         at(0, 2) * (at(1, 0) * at(2, 1) - at(1, 1) * at(2, 0));
}

Mat3 Mat3::inverse() const {
  const double d = det();
  if (!(std::abs(d) > 1e-300)) throw std::domain_error("Mat3::inverse: singular matrix");
  Mat3 adj;
  adj.at(0, 0) = at(1, 1) * at(2, 2) - at(1, 2) * at(2, 1);
  adj.at(0, 1) = at(0, 2) * at(2, 1) - at(0, 1) * at(2, 2);
  adj.at(0, 2) = at(0, 1) * at(1, 2) - at(0, 2) * at(1, 1);
  adj.at(1, 0) = at(1, 2) * at(2, 0) - at(1, 0) * at(2, 2);
  adj.at(1, 1) = at(0, 0) * at(2, 2) - at(0, 2) * at(2, 0);
  adj.at(1, 2) = at(0, 2) * at(1, 0) - at(0, 0) * at(1, 2);
  adj.at(2, 0) = at(1, 0) * at(2, 1) - at(1, 1) * at(2, 0);
  adj.at(2, 1) = at(0, 1) * at(2, 0) - at(0, 0) * at(2, 1);
  adj.at(2, 2) = at(0, 0) * at(1, 1) - at(0, 1) * at(1, 0);
  return adj.scaled(1.0 / d);
}

double Mat3::frobenius() const {
  double s = 0.0;
  for (double v : m) s += v * v;
  return std::sqrt(s);
}

double Mat3::dot(const Mat3& o) const {
  double s = 0.0;
  for (int i = 0; i < 9; ++i) s += m[static_cast<std::size_t>(i)] * o.m[static_cast<std::size_t>(i)];
  return s;
}

namespace {

double unit_uniform(std::mt19937_64& eng) {
  // 53 mantissa bits straight from the engine; identical across platforms.
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

double symmetric_uniform(std::mt19937_64& eng, double amp) {
  return amp * (2.0 * unit_uniform(eng) - 1.0);
}

Mat3 random_mat(std::mt19937_64& eng, double amp) {
  Mat3 r;
  for (int i = 0; i < 9; ++i) r.m[static_cast<std::size_t>(i)] = symmetric_uniform(eng, amp);
  return r;
}

// I + t C1 + t^2 C2 + t^3 C3, coefficients shrunk by `scale`.
struct MatPoly {
  std::array<Mat3, 3> c;
  Mat3 at(double t, double scale) const {
    Mat3 r = Mat3::identity();
    double tk = 1.0;
    for (int k = 0; k < 3; ++k) {
      tk *= t;
      r = r + c[static_cast<std::size_t>(k)].scaled(scale * tk);
    }
    return r;
  }
};

MatPoly random_poly(std::mt19937_64& eng, double amp) {
  MatPoly p;
  for (int k = 0; k < 3; ++k)
    p.c[static_cast<std::size_t>(k)] = random_mat(eng, amp / static_cast<double>(k + 1));
  return p;
}

std::vector<double> uniform_times(int samples, double spacing) {
  if (samples < 3) throw std::invalid_argument("trajectory needs at least 3 samples");
  if (!(spacing > 0.0)) throw std::invalid_argument("trajectory spacing must be positive");
  std::vector<double> t(static_cast<std::size_t>(samples));
  for (int i = 0; i < samples; ++i) t[static_cast<std::size_t>(i)] = spacing * i;
  return t;
}

double min_det_on(const std::function<Mat3(double)>& fn, const std::vector<double>& times) {
  double lo = fn(times.front()).det();
  // probe between samples too: the checks evaluate at sample times only, but
  // the determinant should stay positive on the whole window
  for (std::size_t i = 1; i < times.size(); ++i) {
    lo = std::min(lo, fn(times[i]).det());
    lo = std::min(lo, fn(0.5 * (times[i - 1] + times[i])).det());
  }
  return lo;
}

// Orthogonal matrix from a skew one: (I - S)^{-1} (I + S). Smooth in t and
// exactly orthogonal, determinant +1.
Mat3 cayley(const Mat3& skew) {
  Mat3 id = Mat3::identity();
  return (id - skew).inverse() * (id + skew);
}

// Shrink polynomial coefficients until both factors keep positive volume.
DeformationTrajectory conditioned(std::vector<double> times, MatPoly fp, MatPoly gp) {
  double scale = 1.0;
  for (int tries = 0; tries < 60; ++tries) {
    auto total = [fp, scale](double t) { return fp.at(t, scale); };
    auto relaxing = [gp, scale](double t) { return gp.at(t, scale); };
    if (min_det_on(total, times) > 0.15 && min_det_on(relaxing, times) > 0.15)
      return DeformationTrajectory{std::move(times), total, relaxing};
    scale *= 0.5;
  }
  throw std::runtime_error("trajectory conditioning failed to converge");
}

void require_samples(const DeformationTrajectory& traj) {
  if (traj.sample_times.size() < 3)
    throw std::invalid_argument("kinematic checks need at least 3 sample times");
}

}  // namespace

DeformationTrajectory random_trajectory(std::uint64_t seed, int samples, double spacing) {
  auto times = uniform_times(samples, spacing);
  std::mt19937_64 eng(seed);
  MatPoly fp = random_poly(eng, 0.35);
  MatPoly gp = random_poly(eng, 0.3);
  return conditioned(std::move(times), fp, gp);
}

DeformationTrajectory elastic_trajectory(std::uint64_t seed, int samples, double spacing) {
  auto times = uniform_times(samples, spacing);
  std::mt19937_64 eng(seed);
  MatPoly fp = random_poly(eng, 0.35);
  MatPoly gp;  // zero coefficients: G stays the identity
  return conditioned(std::move(times), fp, gp);
}

DeformationTrajectory relaxed_trajectory(std::uint64_t seed, int samples, double spacing) {
  auto times = uniform_times(samples, spacing);
  std::mt19937_64 eng(seed);
  MatPoly fp = random_poly(eng, 0.35);
  return conditioned(std::move(times), fp, fp);
}

DeformationTrajectory spherical_trajectory(std::uint64_t seed, int samples, double spacing) {
  auto times = uniform_times(samples, spacing);
  std::mt19937_64 eng(seed);
  // b(t): cubic kept well away from zero; w: skew generator coefficients.
  std::array<double, 3> bc{};
  for (auto& c : bc) c = symmetric_uniform(eng, 0.3);
  std::array<std::array<double, 3>, 3> wc{};
  for (auto& row : wc)
    for (auto& c : row) c = symmetric_uniform(eng, 0.4);
  MatPoly gp = random_poly(eng, 0.3);

  double scale = 1.0;
  for (int tries = 0; tries < 60; ++tries) {
    auto bval = [bc, scale](double t) {
      return 0.9 + scale * (bc[0] * t + bc[1] * t * t + bc[2] * t * t * t);
    };
    auto elastic = [bc, wc, scale, bval](double t) {
      std::array<double, 3> w{};
      for (int a = 0; a < 3; ++a) {
        const auto& c = wc[static_cast<std::size_t>(a)];
        w[static_cast<std::size_t>(a)] = scale * (c[0] * t + c[1] * t * t + c[2] * t * t * t);
      }
      Mat3 s;
      s.at(0, 1) = -w[2];
      s.at(1, 0) = w[2];
      s.at(0, 2) = w[1];
      s.at(2, 0) = -w[1];
      s.at(1, 2) = -w[0];
      s.at(2, 1) = w[0];
      return cayley(s).scaled(std::sqrt(bval(t)));
    };
    auto relaxing = [gp, scale](double t) { return gp.at(t, scale); };
    auto total = [elastic, relaxing](double t) { return elastic(t) * relaxing(t); };

    double bmin = bval(times.front());
    for (std::size_t i = 1; i < times.size(); ++i) {
      bmin = std::min(bmin, bval(times[i]));
      bmin = std::min(bmin, bval(0.5 * (times[i - 1] + times[i])));
    }
    if (bmin > 0.1 && min_det_on(relaxing, times) > 0.15)
      return DeformationTrajectory{std::move(times), total, relaxing};
    scale *= 0.5;
  }
  throw std::runtime_error("trajectory conditioning failed to converge");
}

double check_bp_evolution(const DeformationTrajectory& traj) {
  require_samples(traj);
  const auto& ts = traj.sample_times;
  double worst = 0.0;
  for (std::size_t i = 1; i + 1 < ts.size(); ++i) {
    const double tm = ts[i - 1], t0 = ts[i], tp = ts[i + 1];
    const double inv2h = 1.0 / (tp - tm);

    const Mat3 f = traj.total(t0);
    const Mat3 g = traj.relaxing(t0);
    const Mat3 fdot = (traj.total(tp) - traj.total(tm)).scaled(inv2h);
    const Mat3 gdot = (traj.relaxing(tp) - traj.relaxing(tm)).scaled(inv2h);

    const Mat3 ginv = g.inverse();
    const Mat3 fe = f * ginv;
    const Mat3 gradv = fdot * f.inverse();
    const Mat3 drelax = (gdot * ginv).sym();

    auto bp_at = [&](double t) {
      const Mat3 fe_t = traj.total(t) * traj.relaxing(t).inverse();
      return fe_t * fe_t.transpose();
    };
    const Mat3 bdot = (bp_at(tp) - bp_at(tm)).scaled(inv2h);
    const Mat3 bp = fe * fe.transpose();

    const Mat3 rhs = gradv * bp + bp * gradv.transpose() - (fe * drelax * fe.transpose()).scaled(2.0);
    worst = std::max(worst, (bdot - rhs).frobenius());
  }
  return worst;
}

double check_trace_identity(const DeformationTrajectory& traj) {
  require_samples(traj);
  const auto& ts = traj.sample_times;
  double worst = 0.0;
  for (std::size_t i = 1; i + 1 < ts.size(); ++i) {
    const double tm = ts[i - 1], t0 = ts[i], tp = ts[i + 1];
    const double inv2h = 1.0 / (tp - tm);

    const Mat3 f = traj.total(t0);
    const Mat3 g = traj.relaxing(t0);
    const Mat3 fdot = (traj.total(tp) - traj.total(tm)).scaled(inv2h);
    const Mat3 gdot = (traj.relaxing(tp) - traj.relaxing(tm)).scaled(inv2h);

    const Mat3 ginv = g.inverse();
    const Mat3 fe = f * ginv;
    const Mat3 bp = fe * fe.transpose();
    const Mat3 cp = fe.transpose() * fe;
    const Mat3 dsym = (fdot * f.inverse()).sym();
    const Mat3 drelax = (gdot * ginv).sym();

    auto trbp_at = [&](double t) {
      const Mat3 fe_t = traj.total(t) * traj.relaxing(t).inverse();
      return (fe_t * fe_t.transpose()).trace();
    };
    const double lhs = (trbp_at(tp) - trbp_at(tm)) * inv2h;
    const double rhs = 2.0 * dsym.dot(bp) - 2.0 * cp.dot(drelax);
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  return worst;
}

double check_spherical_reduction(const DeformationTrajectory& traj) {
  require_samples(traj);
  const auto& ts = traj.sample_times;

  auto b_at = [&](double t) {
    const Mat3 fe = traj.total(t) * traj.relaxing(t).inverse();
    const Mat3 bp = fe * fe.transpose();
    const double b = bp.trace() / 3.0;
    Mat3 dev = bp - Mat3::identity().scaled(b);
    if (dev.frobenius() > 1e-10 * std::max(1.0, bp.frobenius()))
      throw std::invalid_argument("spherical reduction needs an isotropic elastic tensor");
    return b;
  };

  double worst = 0.0;
  for (std::size_t i = 1; i + 1 < ts.size(); ++i) {
    const double tm = ts[i - 1], t0 = ts[i], tp = ts[i + 1];
    const double inv2h = 1.0 / (tp - tm);

    const Mat3 f = traj.total(t0);
    const Mat3 g = traj.relaxing(t0);
    const Mat3 fdot = (traj.total(tp) - traj.total(tm)).scaled(inv2h);
    const Mat3 gdot = (traj.relaxing(tp) - traj.relaxing(tm)).scaled(inv2h);

    const double divv = (fdot * f.inverse()).trace();
    const double tr_relax = (gdot * g.inverse()).trace();
    const double b = b_at(t0);
    const double bdot = (b_at(tp) - b_at(tm)) * inv2h;

    worst = std::max(worst, std::abs(bdot - (2.0 / 3.0) * b * (divv - tr_relax)));
  }
  return worst;
}

namespace {

// Uniformly spaced, strictly increasing window of at least `min_size` states.
double window_spacing(const std::vector<State>& window, std::size_t min_size) {
  if (window.size() < min_size) throw WindowTooShort("state window too short for the check");
  const double dt0 = window[1].time - window[0].time;
  if (!(dt0 > 0.0)) throw std::invalid_argument("window times must be strictly increasing");
  for (std::size_t i = 1; i + 1 < window.size(); ++i) {
    const double dt = window[i + 1].time - window[i].time;
    if (!(dt > 0.0)) throw std::invalid_argument("window times must be strictly increasing");
    if (std::abs(dt - dt0) > 1e-9 * dt0)
      throw std::invalid_argument("window times must be uniformly spaced");
  }
  return dt0;
}

std::vector<double> pointwise_sq_sum(const VectorField& v) {
  std::vector<double> out(v.grid().num_points(), 0.0);
  for (int a = 0; a < v.dim(); ++a) {
    const auto& c = v[a].values();
    for (std::size_t q = 0; q < out.size(); ++q) out[q] += c[q] * c[q];
  }
  return out;
}

// psi = Psi(rho)/rho + (e(b) + (sigma/2)|grad b|^2)/rho
ScalarField specific_free_energy(const State& s, const Parameters& p) {
  const auto gb2 = pointwise_sq_sum(gradient(s.b));
  const auto& rv = s.rho.values();
  const auto& bv = s.b.values();
  std::vector<double> out(rv.size());
  for (std::size_t q = 0; q < out.size(); ++q)
    out[q] = (pressure_potential(rv[q], p) + elastic_energy(bv[q], p) + 0.5 * p.sigma * gb2[q]) / rv[q];
  return ScalarField::from_values(s.grid(), std::move(out));
}

// Material time derivative via centered differences plus spectral transport.
ScalarField material_rate(const ScalarField& prev, const ScalarField& cur, const ScalarField& next,
                          const VectorField& u, double dt) {
  std::vector<double> out(cur.grid().num_points());
  const auto& pv = prev.values();
  const auto& nv = next.values();
  const double inv2dt = 0.5 / dt;
  for (std::size_t q = 0; q < out.size(); ++q) out[q] = (nv[q] - pv[q]) * inv2dt;
  for (int a = 0; a < u.dim(); ++a) {
    const auto da = derivative(cur, a);
    const auto& dv = da.values();
    const auto& uv = u[a].values();
    for (std::size_t q = 0; q < out.size(); ++q) out[q] += uv[q] * dv[q];
  }
  return ScalarField::from_values(cur.grid(), std::move(out));
}

struct RatePieces {
  ScalarField lhs;        // rho d(psi)/dt
  ScalarField capillary;  // Div(sigma db/dt grad b)
  ScalarField composite_work;  // (p_fl + p_el - (sigma/2)|grad b|^2 + (2/3) sigma b lap b) div u
  ScalarField grad_b_work;     // sigma (grad b x grad b) : D
  ScalarField relax_work;      // (2/3) (b e' - sigma b lap b) tr D_relax
  ScalarField stress_power;    // S : grad u
  ScalarField dissipation;     // xi with the evolved relaxation exponent
};

RatePieces rate_pieces(const State& prev, const State& cur, const State& next, double dt,
                       const Parameters& p) {
  const GridSpec& g = cur.grid();
  const int d = g.dim;
  const std::size_t npts = g.num_points();

  RatePieces out;

  const auto psi_prev = specific_free_energy(prev, p);
  const auto psi_cur = specific_free_energy(cur, p);
  const auto psi_next = specific_free_energy(next, p);
  auto psidot = material_rate(psi_prev, psi_cur, psi_next, cur.u, dt);
  {
    const auto& rv = cur.rho.values();
    std::vector<double> lhs(npts);
    const auto& pd = psidot.values();
    for (std::size_t q = 0; q < npts; ++q) lhs[q] = rv[q] * pd[q];
    out.lhs = ScalarField::from_values(g, std::move(lhs));
  }

  const auto bdot = material_rate(prev.b, cur.b, next.b, cur.u, dt);
  const auto gb = gradient(cur.b);
  {
    VectorField flux = VectorField::zeros(g);
    const auto& bd = bdot.values();
    for (int a = 0; a < d; ++a) {
      std::vector<double> fv(npts);
      const auto& gv = gb[a].values();
      for (std::size_t q = 0; q < npts; ++q) fv[q] = p.sigma * bd[q] * gv[q];
      flux[a] = ScalarField::from_values(g, std::move(fv));
    }
    out.capillary = divergence(flux);
  }

  const auto lap_b = laplacian(cur.b);
  const auto divu = divergence(cur.u);
  const auto gb2 = pointwise_sq_sum(gb);
  {
    const auto& rv = cur.rho.values();
    const auto& bv = cur.b.values();
    const auto& lb = lap_b.values();
    const auto& dv = divu.values();
    std::vector<double> w(npts);
    for (std::size_t q = 0; q < npts; ++q) {
      const double composite = fluid_pressure(rv[q], p) + elastic_pressure(bv[q], p) -
                               0.5 * p.sigma * gb2[q] + (2.0 / 3.0) * p.sigma * bv[q] * lb[q];
      w[q] = composite * dv[q];
    }
    out.composite_work = ScalarField::from_values(g, std::move(w));
  }

  TensorField gu = TensorField::zeros(g);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) gu.at(i, j) = derivative(cur.u[i], j);
  {
    std::vector<double> w(npts, 0.0);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        const auto& gi = gb[i].values();
        const auto& gj = gb[j].values();
        const auto& dij = gu.at(i, j).values();
        const auto& dji = gu.at(j, i).values();
        for (std::size_t q = 0; q < npts; ++q)
          w[q] += p.sigma * gi[q] * gj[q] * 0.5 * (dij[q] + dji[q]);
      }
    out.grad_b_work = ScalarField::from_values(g, std::move(w));
  }

  // The evolved b equation fixes tr D_relax = (3/(2 nu)) (e'(b) - sigma lap b)/b,
  // the exponent-2 member of the admissible family.
  {
    const auto& bv = cur.b.values();
    const auto& lb = lap_b.values();
    std::vector<double> w(npts);
    for (std::size_t q = 0; q < npts; ++q) {
      const double relax = elastic_energy_prime(bv[q], p) - p.sigma * lb[q];
      const double tr_relax = 1.5 / p.nu * relax / bv[q];
      w[q] = (2.0 / 3.0) * bv[q] * relax * tr_relax;
    }
    out.relax_work = ScalarField::from_values(g, std::move(w));
  }

  {
    const auto s = viscous_stress(gu, p);
    std::vector<double> w(npts, 0.0);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        const auto& sv = s.at(i, j).values();
        const auto& gv = gu.at(i, j).values();
        for (std::size_t q = 0; q < npts; ++q) w[q] += sv[q] * gv[q];
      }
    out.stress_power = ScalarField::from_values(g, std::move(w));
  }

  Parameters evolved = p;
  evolved.s = 2.0;
  out.dissipation = rate_of_dissipation(gu, cur.b, lap_b, evolved);

  return out;
}

void require_unregularized(const Parameters& p) {
  if (p.epsilon != 0.0)
    throw std::invalid_argument("rate identities hold only for unregularized runs (epsilon = 0)");
}

}  // namespace

double check_free_energy_rate(const std::vector<State>& window, const Parameters& p) {
  require_unregularized(p);
  const double dt = window_spacing(window, 3);
  double worst = 0.0;
  for (std::size_t i = 1; i + 1 < window.size(); ++i) {
    const auto pieces = rate_pieces(window[i - 1], window[i], window[i + 1], dt, p);
    const auto& lhs = pieces.lhs.values();
    const auto& cap = pieces.capillary.values();
    const auto& cw = pieces.composite_work.values();
    const auto& gw = pieces.grad_b_work.values();
    const auto& rw = pieces.relax_work.values();
    for (std::size_t q = 0; q < lhs.size(); ++q)
      worst = std::max(worst, std::abs(lhs[q] - (cap[q] - cw[q] - gw[q] - rw[q])));
  }
  return worst;
}

double check_stress_power(const std::vector<State>& window, const Parameters& p) {
  require_unregularized(p);
  const double dt = window_spacing(window, 3);
  double worst = 0.0;
  for (std::size_t i = 1; i + 1 < window.size(); ++i) {
    const auto pieces = rate_pieces(window[i - 1], window[i], window[i + 1], dt, p);
    const auto& lhs = pieces.lhs.values();
    const auto& cap = pieces.capillary.values();
    const auto& cw = pieces.composite_work.values();
    const auto& gw = pieces.grad_b_work.values();
    const auto& sp = pieces.stress_power.values();
    const auto& xi = pieces.dissipation.values();
    for (std::size_t q = 0; q < lhs.size(); ++q) {
      const double t_dot_d = sp[q] - cw[q] - gw[q];
      worst = std::max(worst, std::abs(t_dot_d - lhs[q] - xi[q] + cap[q]));
    }
  }
  return worst;
}

EnergyIdentityReport check_energy_identity(const std::vector<State>& window, const Parameters& p) {
  require_unregularized(p);
  const double dt = window_spacing(window, 2);

  const std::size_t n = window.size();
  std::vector<double> energy(n), dissipation(n);
  EnergyIdentityReport rep;

  for (std::size_t j = 0; j < n; ++j) {
    const State& s = window[j];
    const GridSpec& g = s.grid();
    const int d = g.dim;
    const std::size_t npts = g.num_points();

    const auto& rv = s.rho.values();
    const auto& bv = s.b.values();
    const auto u2 = pointwise_sq_sum(s.u);
    const auto gb2 = pointwise_sq_sum(gradient(s.b));

    double e_sum = 0.0;
    for (std::size_t q = 0; q < npts; ++q)
      e_sum += 0.5 * rv[q] * u2[q] + pressure_potential(rv[q], p) + elastic_energy(bv[q], p) +
               0.5 * p.sigma * gb2[q];
    energy[j] = e_sum * g.cell_volume();

    // 2 mu |D_dev|^2 + lambda (div u)^2 via the closed form |D_dev|^2 =
    // |D|^2 - (div u)^2 / 3 over the three-dimensional embedding.
    const auto lap_b = laplacian(s.b);
    const auto& lb = lap_b.values();
    std::vector<std::vector<double>> gu(static_cast<std::size_t>(d * d));
    for (int i = 0; i < d; ++i)
      for (int k = 0; k < d; ++k) gu[static_cast<std::size_t>(i * d + k)] = derivative(s.u[i], k).values();
    double d_sum = 0.0;
    for (std::size_t q = 0; q < npts; ++q) {
      double div = 0.0, dd = 0.0;
      for (int i = 0; i < d; ++i) div += gu[static_cast<std::size_t>(i * d + i)][q];
      for (int i = 0; i < d; ++i)
        for (int k = 0; k < d; ++k) {
          const double dik = 0.5 * (gu[static_cast<std::size_t>(i * d + k)][q] +
                                    gu[static_cast<std::size_t>(k * d + i)][q]);
          dd += dik * dik;
        }
      const double relax = elastic_energy_prime(bv[q], p) - p.sigma * lb[q];
      d_sum += 2.0 * p.mu * (dd - div * div / 3.0) + p.lambda * div * div + relax * relax / p.nu;
    }
    dissipation[j] = d_sum * g.cell_volume();

    const auto led = energy_ledger(s, p);
    rep.max_ledger_mismatch = std::max(rep.max_ledger_mismatch, std::abs(energy[j] - led.total));
    rep.max_ledger_mismatch = std::max(
        rep.max_ledger_mismatch,
        std::abs(dissipation[j] - (led.viscous_dissipation + led.relaxation_dissipation)));
  }

  for (std::size_t j = 0; j + 1 < n; ++j) {
    const double r = (energy[j + 1] - energy[j]) + dt * 0.5 * (dissipation[j] + dissipation[j + 1]);
    rep.max_residual = std::max(rep.max_residual, std::abs(r));
  }
  return rep;
}

}  // namespace sdflow
