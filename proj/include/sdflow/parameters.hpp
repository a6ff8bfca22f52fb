#pragma once

#include <string>
#include <vector>

#include "sdflow/errors.hpp"
#include "sdflow/grid.hpp"

namespace sdflow {

// Elastic energy law.  power_log: e(b) = a1 b^alpha - a2 log b (the default).
// linear_log: e(b) = a1 (b - 1) - a2 log b; with a1 = a2 = 3 mu / 2 this is the
// Kelvin-Voigt-type energy used by the kinematics checks.
enum class ElasticModel { power_log, linear_log };

struct Parameters {
  double mu = 1.0;       // shear viscosity, > 0
  double lambda = 0.0;   // bulk viscosity, >= 0
  double nu = 1.0;       // relaxation time, > 0
  double sigma = 1.0;    // stress diffusion coefficient, > 0
  double a0 = 1.0;       // fluid pressure scale, > 0
  double a1 = 1.0;       // elastic energy coefficients, > 0
  double a2 = 1.0;
  double gamma = 4.0;    // adiabatic exponent, > 1
  double alpha = 2.0;    // elastic exponent, >= 1
  double s = 2.0;        // dissipation exponent (diagnostics only), >= 0
  double epsilon = 0.0;  // parabolic regularization, >= 0
  int m_cutoff = 0;      // Galerkin cutoff; 0 means "full dealiased band"
  ElasticModel elastic = ElasticModel::power_log;

  bool operator==(const Parameters&) const = default;

  // gamma > 3 and alpha >= 1 is the regime the existence theory covers.
  // Informational only; nothing blocks runs outside it.
  bool theorem_mode() const { return gamma > 3.0 && alpha >= 1.0; }

  int effective_cutoff(const GridSpec& g) const {
    return m_cutoff > 0 ? m_cutoff : g.m_max();
  }

  std::vector<std::string> violations() const {
    std::vector<std::string> v;
    if (!(mu > 0.0)) v.push_back("params: mu must be > 0");
    if (!(lambda >= 0.0)) v.push_back("params: lambda must be >= 0");
    if (!(nu > 0.0)) v.push_back("params: nu must be > 0");
    if (!(sigma > 0.0)) v.push_back("params: sigma must be > 0");
    if (!(a0 > 0.0)) v.push_back("params: a0 must be > 0");
    if (!(a1 > 0.0)) v.push_back("params: a1 must be > 0");
    if (!(a2 > 0.0)) v.push_back("params: a2 must be > 0");
    if (!(gamma > 1.0)) v.push_back("params: gamma must be > 1");
    if (!(alpha >= 1.0)) v.push_back("params: alpha must be >= 1");
    if (!(s >= 0.0)) v.push_back("params: s must be >= 0");
    if (!(epsilon >= 0.0)) v.push_back("params: epsilon must be >= 0");
    if (m_cutoff < 0) v.push_back("params: m_cutoff must be >= 0");
    return v;
  }

  void validate() const {
    auto v = violations();
    if (!v.empty()) {
      std::string msg;
      for (const auto& line : v) msg += (msg.empty() ? "" : "\n") + line;
      throw ValidationError(msg);
    }
  }
};

}  // namespace sdflow
