#include "perhom/time_stepping.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace perhom {

EtdCoefficients etd_coefficients(const Eigen::ArrayXd& psi, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("etd_coefficients: step must be positive");
  EtdCoefficients c;
  c.h = h;
  c.decay.resize(psi.size());
  c.phi1.resize(psi.size());
  c.phi2.resize(psi.size());
  for (Index k = 0; k < psi.size(); ++k) {
    const double z = -h * psi[k];
    c.decay[k] = std::exp(z);
    c.phi1[k] = h * etd_phi1(z);
    c.phi2[k] = h * etd_phi2(z);
  }
  return c;
}

PeriodicField etd2rk_step(const EtdCoefficients& c, const PeriodicField& u, const FieldMap& nonlinear) {
  const PeriodicField nu = nonlinear(u);
  PeriodicField a = apply_multiplier(u, c.decay);
  a += apply_multiplier(nu, c.phi1);
  PeriodicField out = a;
  out += apply_multiplier(nonlinear(a) - nu, c.phi2);
  return out;
}

int stable_step_count(const LevySymbol& sym, double drift_sup, double horizon, int min_steps, double safety) {
  if (!(horizon > 0.0)) throw std::invalid_argument("stable_step_count: horizon must be positive");
  const auto& g = sym.grid();
  const auto& psi = sym.table();
  int steps = std::max(1, min_steps);
  for (int guard = 0; guard < 40; ++guard) {
    const double h = horizon / steps;
    bool ok = true;
    for (Index k = 1; k < g.size() && ok; ++k) {
      if (g.is_nyquist(k)) continue;
      const double transport = h * drift_sup * 2.0 * std::numbers::pi * g.radius(k);
      ok = transport <= safety * std::max(1.0, h * psi[k]);
    }
    if (ok) return steps;
    steps *= 2;
  }
  throw std::runtime_error("stable_step_count: no admissible step found");
}

}  // namespace perhom
