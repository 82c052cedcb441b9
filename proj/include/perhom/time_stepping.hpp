#pragma once

#include <functional>

#include <Eigen/Core>

#include "perhom/levy.hpp"

namespace perhom {

/// Per-mode factors of one step of size h for u' = -psi u + N(u).
struct EtdCoefficients {
  double h = 0.0;
  Eigen::ArrayXd decay;  // e^{-h psi}
  Eigen::ArrayXd phi1;   // h phi_1(-h psi)
  Eigen::ArrayXd phi2;   // h phi_2(-h psi)
};

EtdCoefficients etd_coefficients(const Eigen::ArrayXd& psi, double h);

using FieldMap = std::function<PeriodicField(const PeriodicField&)>;

/// Cox-Matthews ETD2RK:
///   a = e^{-h psi} u + h phi_1 N(u),  u_+ = a + h phi_2 (N(a) - N(u)).
/// Fixed points of the Galerkin system are fixed points of the step.
PeriodicField etd2rk_step(const EtdCoefficients& c, const PeriodicField& u, const FieldMap& nonlinear);

/// Step count for covering `horizon` so that the explicitly treated transport
/// of speed `drift_sup` stays below `safety` relative to max(1, h psi(k)) on
/// every mode. Heuristic; at least `min_steps`.
int stable_step_count(const LevySymbol& sym, double drift_sup, double horizon, int min_steps = 16,
                      double safety = 0.5);

}  // namespace perhom
