#pragma once

#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "perhom/drift.hpp"
#include "perhom/levy.hpp"
#include "perhom/periodic_field.hpp"

namespace perhom {

/// u = u# + sum_c u'_c < R_c.
struct ParacontrolledField {
  PeriodicField value;
  PeriodicField gubinelli_derivative;
  PeriodicField sharp;
  PeriodicField reference;
};

/// Fills in the sharp part from value, derivative and reference.
ParacontrolledField paracontrolled(PeriodicField value, PeriodicField derivative, PeriodicField reference);
/// L2 norm of value - sharp - sum_c u'_c < R_c.
double decomposition_defect(const ParacontrolledField& u);

enum class ProductMode {
  automatic,       // paracontrolled assembly in the rough regime, direct product otherwise
  direct,          // dealiased lattice product
  paracontrolled,  // always assemble through the enhancement and C1
};

/// The drift terms F.grad u (backward) and -div(F rho) (forward). The
/// paracontrolled assembly splits every product into paraproducts, a resonant
/// product of a remainder, the precomputed enhancement and a C1 commutator,
/// all referenced to I_inf; at finite N it agrees with the direct product up
/// to rounding, and the difference is exposed as a diagnostic.
class DriftOperator {
 public:
  DriftOperator(const EnhancedDrift& drift, const LevySymbol& sym, ProductMode mode = ProductMode::automatic);

  bool uses_enhancement() const { return paracontrolled_; }
  const GridPtr& grid_ptr() const { return field_.grid_ptr(); }
  const PeriodicField& field() const { return field_; }
  /// max_x |F(x)| on the collocation grid.
  double sup_norm() const { return sup_norm_; }

  PeriodicField transport(const PeriodicField& u) const;
  PeriodicField transport_direct(const PeriodicField& u) const;
  /// Vector field F rho (d components).
  PeriodicField flux(const PeriodicField& rho) const;
  PeriodicField flux_direct(const PeriodicField& rho) const;
  /// -div(F rho).
  PeriodicField forward(const PeriodicField& rho) const;
  PeriodicField forward_direct(const PeriodicField& rho) const;

  /// I_inf(-div F).
  const PeriodicField& divergence_reference() const { return div_reference_; }

 private:
  int d_;
  bool paracontrolled_;
  PeriodicField field_;
  std::vector<PeriodicField> comps_;
  std::vector<PeriodicField> integrated_;  // I_inf(d_i F^j) at i * d + j
  std::vector<PeriodicField> enhancement_;
  PeriodicField div_reference_;
  std::vector<PeriodicField> div_resonant_;  // I_inf(-div F) (.) F^k
  double sup_norm_ = 0.0;
};

struct DensityPath {
  std::vector<double> times;
  std::vector<ParacontrolledField> states;
  std::vector<double> mass;  // mode-0 coefficient at every step, not only recorded ones
  double max_mass_deviation = 0.0;
  double t0 = 0.0;  // length of the exact smoothing step for Dirac data
  int steps = 0;
  /// ||assembled - direct||_L2 of the drift term at the final state.
  double product_diagnostic = 0.0;

  const PeriodicField& final_value() const { return states.back().value; }
};

struct EvolutionOptions {
  /// Record every k-th step (the endpoints are always recorded).
  int record_every = 1;
  ProductMode mode = ProductMode::automatic;
  /// Called after every step with (elapsed time, state).
  std::function<void(double, const PeriodicField&)> observer;
};

/// Mild solution of d_t rho = -L rho - div(F rho) by ETD2RK with `steps` steps.
/// Tracks rho = rho# + rho < I_t(-div F).
DensityPath solve_fokker_planck(const EnhancedDrift& drift, const LevySymbol& sym, const PeriodicField& mu, double T,
                                int steps, const EvolutionOptions& opts = {});
/// Same from a Dirac mass at x0: the first step of length t0 = T/steps is the
/// exact semigroup P_{t0} delta_x0.
DensityPath solve_fokker_planck_from_point(const EnhancedDrift& drift, const LevySymbol& sym,
                                           const Eigen::Ref<const Eigen::VectorXd>& x0, double T, int steps,
                                           const EvolutionOptions& opts = {});

/// u_s = T_{T-s} f for s in [0, T]; path times are s, so states.front() = T_T f.
/// u is tracked with derivative grad u and reference I_{T-s}(F). The observer
/// sees elapsed time T - s.
DensityPath solve_backward_kolmogorov(const EnhancedDrift& drift, const LevySymbol& sym, const PeriodicField& f,
                                      double T, int steps, const EvolutionOptions& opts = {});

struct InvariantOptions {
  double t_step = 0.5;
  int substeps = 0;  // 0: stable_step_count
  int max_iterations = 2000;
  double tolerance = 1e-9;  // L1 change between iterates
  bool dense_check = true;
  Index dense_limit = 512;  // active modes up to which the dense null space is solved
  ProductMode mode = ProductMode::automatic;
};

struct InvariantDensity {
  PeriodicField rho;
  PeriodicField sharp;      // rho - rho < I_inf(-div F)
  PeriodicField reference;  // I_inf(-div F)
  double min_value = 0.0;
  Eigen::VectorXd argmin;
  double residual = 0.0;  // ||L* rho||_{C^{beta-1}_2}
  int iterations = 0;
  double last_change = 0.0;
  std::optional<double> dense_difference;  // L2 distance to the dense null vector
};

InvariantDensity invariant_density(const EnhancedDrift& drift, const LevySymbol& sym,
                                   const InvariantOptions& opts = {});

/// L* rho = -L rho - div(F rho).
PeriodicField apply_adjoint_generator(const DriftOperator& op, const LevySymbol& sym, const PeriodicField& rho);
/// L u = -L u + F.grad u.
PeriodicField apply_full_generator(const DriftOperator& op, const LevySymbol& sym, const PeriodicField& u);

struct PositivityReport {
  double min_value = 0.0;
  Eigen::VectorXd argmin;
};
PositivityReport positivity_report(const PeriodicField& rho, int oversample = 4);

}  // namespace perhom
