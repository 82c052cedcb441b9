#pragma once

#include <optional>
#include <vector>

#include <Eigen/Core>

#include "perhom/drift.hpp"
#include "perhom/fokker_planck.hpp"
#include "perhom/levy.hpp"

namespace perhom {

/// <F^i>_pi from the paracontrolled product F rho_inf.
struct MeanUnderPi {
  Eigen::VectorXd value;
  Eigen::VectorXd direct;  // mode 0 of the dealiased lattice product
  double difference = 0.0;  // max |value - direct|
};
MeanUnderPi mean_under_pi(const EnhancedDrift& drift, const LevySymbol& sym, const InvariantDensity& inv);

/// <u>_pi for real band-limited u (exact lattice quadrature).
double pi_mean(const PeriodicField& u, const PeriodicField& rho);
/// ||u||_{L2(pi)}, Euclidean over components.
double l2_pi_norm(const PeriodicField& u, const PeriodicField& rho);

/// Right-hand side G = G# + sum_c G'_c < F^c.
struct ResolventRhs {
  PeriodicField sharp;       // scalar
  PeriodicField derivative;  // d components
};

struct ResolventOptions {
  double tolerance = 1e-10;           // successive iterates in C^theta_2, relative to max(1, ||g||)
  double residual_tolerance = 1e-8;   // ||(lambda - L)g - G||_{C^beta_2}, relative to max(1, ||G||)
  int max_iterations = 5000;
  ProductMode mode = ProductMode::automatic;
  const PeriodicField* initial_guess = nullptr;
};

struct ResolventSolution {
  ParacontrolledField g;  // derivative G' + grad g, reference I_lambda(F)
  double lambda = 0.0;
  int iterations = 0;
  double residual = 0.0;
  double contraction = 0.0;  // measured Picard factor at lambda
};

/// theta = beta + alpha - 0.05.
double resolvent_regularity(const EnhancedDrift& drift);

/// Spectral radius of v -> I_lambda(F.grad v), by power iteration.
double picard_contraction(const DriftOperator& op, const LevySymbol& sym, double lambda);
/// Smallest lambda = 2^k >= 1 with measured Picard factor <= 1/2.
double resolvent_lambda_min(const DriftOperator& op, const LevySymbol& sym);

/// (lambda - L)g = G with L = -L_nu + F.grad, by Picard iteration g <- I_lambda(G + F.grad g).
/// Throws ConvergenceError naming lambda_min when the iteration cannot contract.
ResolventSolution solve_resolvent(const EnhancedDrift& drift, const LevySymbol& sym, const ResolventRhs& rhs,
                                  double lambda, const ResolventOptions& opts = {});
/// Same with a prebuilt drift operator.
ResolventSolution solve_resolvent(const DriftOperator& op, const EnhancedDrift& drift, const LevySymbol& sym,
                                  const ResolventRhs& rhs, double lambda, const ResolventOptions& opts = {});

struct Corrector {
  PeriodicField chi;    // d components
  PeriodicField sharp;  // chi^i - (e_i + grad chi^i) < I_lambda(F)
  Eigen::VectorXd mean_F;
  double lambda_used = 0.0;
  double residual_norm = 0.0;  // max_i ||L chi^i + F^i - <F^i>_pi||_{C^beta_2}
  int outer_iterations = 0;
  Eigen::VectorXd pi_means;  // <chi^i>_pi after normalization
  std::vector<int> ladder_levels;
  std::vector<double> ladder_errors;  // ||chi^m - chi||_{L2(pi)}
};

struct PoissonOptions {
  double tolerance = 1e-9;  // outer iterates in C^theta_2
  int max_outer = 20000;
  bool ladder = true;
  std::optional<double> lambda;  // default: resolvent_lambda_min
  ProductMode mode = ProductMode::automatic;
  InvariantOptions invariant;  // for the ladder drifts
};

/// Corrector chi^i with (-L)chi^i = F^i - <F^i>_pi and <chi^i>_pi = 0, by the
/// outer iteration chi <- R_lambda(lambda chi + F - <F>_pi).
Corrector solve_poisson(const EnhancedDrift& drift, const LevySymbol& sym, const InvariantDensity& inv,
                        const PoissonOptions& opts = {});

/// sum_k |f^(k)|^2 psi(k).
double gamma_norm(const PeriodicField& f, const LevySymbol& sym);
/// Gamma(f) = (2 f L f - L(f^2))/2 on the 2N lattice (exact for band-limited f).
PeriodicField carre_du_champ(const PeriodicField& f, const LevySymbol& sym);
/// <Gamma(f)>_pi.
double h1_pi_seminorm(const PeriodicField& f, const LevySymbol& sym, const InvariantDensity& inv);

struct EffectiveModel {
  double alpha = 2.0;
  Eigen::MatrixXd D;  // empty for alpha < 2
  Eigen::VectorXd mean_F;
  std::optional<double> gap_rate;
  std::optional<LevySymbol> psi;  // stable limit law for alpha < 2
};

/// D(i,j) = int (e_i + grad chi^i).(e_j + grad chi^j) d pi. Throws for alpha < 2.
EffectiveModel effective_diffusivity(const Corrector& chi, const InvariantDensity& inv, const LevySymbol& sym);
/// The alpha < 2 model (psi and <F>_pi, no D).
EffectiveModel stable_limit_model(const Corrector& chi, const LevySymbol& sym);

struct GapEstimate {
  double rate = 0.0;               // min over probes
  std::vector<double> probe_rates;  // NaN for excluded probes
  std::vector<int> fitted_points;
};

/// Fits log ||T_t f - <f>_pi||_{L2(pi)} over the window [1e-8, 1e-2] x initial.
GapEstimate spectral_gap_estimate(const EnhancedDrift& drift, const LevySymbol& sym, const InvariantDensity& inv,
                                  const std::vector<PeriodicField>& probes, double horizon, int steps = 0,
                                  ProductMode mode = ProductMode::automatic);

}  // namespace perhom
