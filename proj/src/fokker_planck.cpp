#include "perhom/fokker_planck.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "perhom/besov.hpp"
#include "perhom/dense_galerkin.hpp"
#include "perhom/errors.hpp"
#include "perhom/paracalc.hpp"
#include "perhom/time_stepping.hpp"

namespace perhom {

namespace {

constexpr double kBlowup = 1e6;

void check_blowup(const PeriodicField& u, double t) {
  const double n = l2_norm(u);
  if (!(n <= kBlowup))
    throw ConvergenceError("time stepping diverged at t = " + std::to_string(t) + " (L2 norm " + std::to_string(n) +
                           "); use more steps");
}

double l1_collocation(const PeriodicField& u) { return u.values().cwiseAbs().mean(); }

}  // namespace

ParacontrolledField paracontrolled(PeriodicField value, PeriodicField derivative, PeriodicField reference) {
  if (derivative.components() != reference.components())
    throw std::invalid_argument("paracontrolled: derivative and reference component counts differ");
  PeriodicField sharp = value;
  for (int c = 0; c < derivative.components(); ++c)
    sharp -= para_lt(derivative.component(c), reference.component(c));
  return {std::move(value), std::move(derivative), std::move(sharp), std::move(reference)};
}

double decomposition_defect(const ParacontrolledField& u) {
  PeriodicField r = u.value - u.sharp;
  for (int c = 0; c < u.gubinelli_derivative.components(); ++c)
    r -= para_lt(u.gubinelli_derivative.component(c), u.reference.component(c));
  return l2_norm(r);
}

// ---- DriftOperator -----------------------------------------------------------

DriftOperator::DriftOperator(const EnhancedDrift& drift, const LevySymbol& sym, ProductMode mode)
    : d_(drift.dim()), field_(drift.field) {
  require_same_grid(sym.grid(), field_.grid());
  paracontrolled_ = mode == ProductMode::paracontrolled || (mode == ProductMode::automatic && drift.regime == Regime::rough);
  for (int k = 0; k < d_; ++k) comps_.push_back(field_.component(k));
  div_reference_ = PeriodicField(field_.grid_ptr(), 1, true);
  for (int i = 0; i < d_; ++i)
    for (int j = 0; j < d_; ++j) {
      integrated_.push_back(steady_integral(sym, partial_derivative(comps_[static_cast<std::size_t>(j)], i)));
      if (i == j) div_reference_ -= integrated_.back();
    }
  enhancement_ = drift.enhancement;
  if (static_cast<int>(enhancement_.size()) != d_ * d_ * d_)
    throw std::invalid_argument("DriftOperator: enhancement has the wrong number of entries");
  for (int k = 0; k < d_; ++k) div_resonant_.push_back(drift.divergence_resonant(k));
  const Eigen::MatrixXd vals = oversampled_values(field_, 2);
  sup_norm_ = vals.rowwise().norm().maxCoeff();
}

PeriodicField DriftOperator::transport_direct(const PeriodicField& u) const {
  PeriodicField out(field_.grid_ptr(), 1, u.is_real());
  for (int j = 0; j < d_; ++j) out += multiply(comps_[static_cast<std::size_t>(j)], partial_derivative(u, j));
  return out;
}

PeriodicField DriftOperator::transport(const PeriodicField& u) const {
  if (!paracontrolled_) return transport_direct(u);
  PeriodicField out(field_.grid_ptr(), 1, u.is_real());
  std::vector<PeriodicField> du;
  for (int i = 0; i < d_; ++i) du.push_back(partial_derivative(u, i));
  for (int j = 0; j < d_; ++j) {
    const auto& fj = comps_[static_cast<std::size_t>(j)];
    const auto& duj = du[static_cast<std::size_t>(j)];
    const BonyParts parts = bony(fj, duj);
    out += parts.low_high;
    out += parts.high_low;
    PeriodicField remainder = duj;
    for (int i = 0; i < d_; ++i)
      remainder -= para_lt(du[static_cast<std::size_t>(i)], integrated_[static_cast<std::size_t>(j * d_ + i)]);
    out += resonant(fj, remainder);
    for (int i = 0; i < d_; ++i) {
      const auto& dui = du[static_cast<std::size_t>(i)];
      const auto& e = enhancement_[static_cast<std::size_t>((j * d_ + i) * d_ + j)];
      out += multiply(dui, e);
      out += commutator_c1(dui, integrated_[static_cast<std::size_t>(j * d_ + i)], fj, e);
    }
  }
  return out;
}

PeriodicField DriftOperator::flux_direct(const PeriodicField& rho) const { return multiply(field_, rho); }

PeriodicField DriftOperator::flux(const PeriodicField& rho) const {
  if (!paracontrolled_) return flux_direct(rho);
  const PeriodicField sharp = rho - para_lt(rho, div_reference_);
  std::vector<PeriodicField> parts;
  for (int k = 0; k < d_; ++k) {
    const auto& fk = comps_[static_cast<std::size_t>(k)];
    const auto& rk = div_resonant_[static_cast<std::size_t>(k)];
    const BonyParts b = bony(fk, rho);
    PeriodicField p = b.low_high + b.high_low;
    p += resonant(fk, sharp);
    p += multiply(rho, rk);
    p += commutator_c1(rho, div_reference_, fk, rk);
    parts.push_back(std::move(p));
  }
  return PeriodicField::stack(parts);
}

PeriodicField DriftOperator::forward(const PeriodicField& rho) const { return -1.0 * divergence(flux(rho)); }

PeriodicField DriftOperator::forward_direct(const PeriodicField& rho) const {
  return -1.0 * divergence(flux_direct(rho));
}

PeriodicField apply_adjoint_generator(const DriftOperator& op, const LevySymbol& sym, const PeriodicField& rho) {
  return op.forward(rho) - apply_generator(sym, rho);
}

PeriodicField apply_full_generator(const DriftOperator& op, const LevySymbol& sym, const PeriodicField& u) {
  return op.transport(u) - apply_generator(sym, u);
}

// ---- Forward and backward evolution ------------------------------------------

namespace {

void validate_steps(int steps, double T) {
  if (steps < 16) throw std::invalid_argument("time stepping needs at least 16 steps, got " + std::to_string(steps));
  if (!(T > 0.0)) throw std::invalid_argument("time stepping needs a positive horizon");
}

// Evolves rho over [t_start, t_end] and appends to path.
void evolve_forward(const DriftOperator& op, const LevySymbol& sym, PeriodicField rho, double t_start, double t_end,
                    int steps, const EvolutionOptions& opts, DensityPath& path) {
  const PeriodicField neg_div = -1.0 * divergence(op.field());
  const double mass0 = rho.mean().real();
  const auto record = [&](double t, const PeriodicField& u) {
    path.times.push_back(t);
    path.states.push_back(paracontrolled(u, u, finite_integral(sym, neg_div, t)));
  };
  record(t_start, rho);
  path.mass.push_back(mass0);
  const double h = (t_end - t_start) / steps;
  const EtdCoefficients c = etd_coefficients(sym.table(), h);
  const FieldMap rhs = [&op](const PeriodicField& u) { return op.forward(u); };
  const int every = std::max(1, opts.record_every);
  for (int n = 1; n <= steps; ++n) {
    rho = etd2rk_step(c, rho, rhs);
    const double t = t_start + n * h;
    check_blowup(rho, t);
    path.mass.push_back(rho.mean().real());
    path.max_mass_deviation = std::max(path.max_mass_deviation, std::abs(path.mass.back() - mass0));
    if (opts.observer) opts.observer(t, rho);
    if (n % every == 0 || n == steps) record(t, rho);
  }
  path.steps += steps;
  path.product_diagnostic = l2_norm(op.forward(rho) - op.forward_direct(rho));
}

void check_probability(const PeriodicField& mu) {
  if (mu.components() != 1) throw std::invalid_argument("solve_fokker_planck: initial law must be scalar");
  if (!mu.is_real() || mu.hermitian_defect() > 1e-12)
    throw std::invalid_argument("solve_fokker_planck: initial density must be real");
  if (std::abs(mu.mean() - Complex(1.0)) > 1e-10)
    throw std::invalid_argument("solve_fokker_planck: initial density must have unit mass");
}

}  // namespace

DensityPath solve_fokker_planck(const EnhancedDrift& drift, const LevySymbol& sym, const PeriodicField& mu, double T,
                                int steps, const EvolutionOptions& opts) {
  validate_steps(steps, T);
  require_same_grid(mu.grid(), drift.field.grid());
  check_probability(mu);
  const DriftOperator op(drift, sym, opts.mode);
  DensityPath path;
  evolve_forward(op, sym, mu, 0.0, T, steps, opts, path);
  return path;
}

DensityPath solve_fokker_planck_from_point(const EnhancedDrift& drift, const LevySymbol& sym,
                                           const Eigen::Ref<const Eigen::VectorXd>& x0, double T, int steps,
                                           const EvolutionOptions& opts) {
  validate_steps(steps, T);
  const double t0 = T / steps;
  const PeriodicField mu = semigroup(sym, dirac(drift.field.grid_ptr(), x0), t0);
  const DriftOperator op(drift, sym, opts.mode);
  DensityPath path;
  path.t0 = t0;
  evolve_forward(op, sym, mu, t0, T, std::max(1, steps - 1), opts, path);
  path.steps += 1;
  return path;
}

DensityPath solve_backward_kolmogorov(const EnhancedDrift& drift, const LevySymbol& sym, const PeriodicField& f,
                                      double T, int steps, const EvolutionOptions& opts) {
  validate_steps(steps, T);
  require_same_grid(f.grid(), drift.field.grid());
  if (f.components() != 1) throw std::invalid_argument("solve_backward_kolmogorov: terminal data must be scalar");
  const DriftOperator op(drift, sym, opts.mode);
  DensityPath path;
  const auto record = [&](double tau, const PeriodicField& u) {
    path.times.push_back(T - tau);
    path.states.push_back(paracontrolled(u, gradient(u), finite_integral(sym, drift.field, tau)));
  };
  PeriodicField u = f;
  const double mass0 = u.mean().real();
  record(0.0, u);
  path.mass.push_back(mass0);
  const double h = T / steps;
  const EtdCoefficients c = etd_coefficients(sym.table(), h);
  const FieldMap rhs = [&op](const PeriodicField& v) { return op.transport(v); };
  const int every = std::max(1, opts.record_every);
  for (int n = 1; n <= steps; ++n) {
    u = etd2rk_step(c, u, rhs);
    const double tau = n * h;
    check_blowup(u, tau);
    path.mass.push_back(u.mean().real());
    path.max_mass_deviation = std::max(path.max_mass_deviation, std::abs(path.mass.back() - mass0));
    if (opts.observer) opts.observer(tau, u);
    if (n % every == 0 || n == steps) record(tau, u);
  }
  std::reverse(path.times.begin(), path.times.end());
  std::reverse(path.states.begin(), path.states.end());
  std::reverse(path.mass.begin(), path.mass.end());
  path.steps = steps;
  path.product_diagnostic = l2_norm(op.transport(u) - op.transport_direct(u));
  return path;
}

// ---- Invariant density -------------------------------------------------------

InvariantDensity invariant_density(const EnhancedDrift& drift, const LevySymbol& sym, const InvariantOptions& opts) {
  if (!(opts.t_step > 0.0)) throw std::invalid_argument("invariant_density: t_step must be positive");
  const DriftOperator op(drift, sym, opts.mode);
  const GridPtr& grid = drift.field.grid_ptr();
  const int substeps = opts.substeps > 0 ? opts.substeps : stable_step_count(sym, op.sup_norm(), opts.t_step);
  const EtdCoefficients c = etd_coefficients(sym.table(), opts.t_step / substeps);
  const FieldMap rhs = [&op](const PeriodicField& u) { return op.forward(u); };

  InvariantDensity out;
  PeriodicField rho = PeriodicField::constant(grid, 1.0);
  bool converged = false;
  for (int it = 1; it <= opts.max_iterations; ++it) {
    PeriodicField next = rho;
    for (int s = 0; s < substeps; ++s) next = etd2rk_step(c, next, rhs);
    check_blowup(next, it * opts.t_step);
    next *= 1.0 / next.mean().real();
    out.last_change = l1_collocation(next - rho);
    rho = std::move(next);
    out.iterations = it;
    if (out.last_change < opts.tolerance) {
      converged = true;
      break;
    }
  }
  if (!converged)
    throw ConvergenceError("invariant_density: no convergence after " + std::to_string(opts.max_iterations) +
                           " iterations (last L1 change " + std::to_string(out.last_change) + ")");

  out.rho = rho;
  out.reference = op.divergence_reference();
  out.sharp = rho - para_lt(rho, out.reference);
  const auto pos = positivity_report(rho, 4);
  out.min_value = pos.min_value;
  out.argmin = pos.argmin;
  out.residual = besov_norm(apply_adjoint_generator(op, sym, rho), drift.beta - 1.0, 2.0,
                            std::numeric_limits<double>::infinity());

  const auto modes = active_modes(*grid);
  if (opts.dense_check && static_cast<Index>(modes.size()) <= opts.dense_limit) {
    const Eigen::MatrixXcd a =
        dense_matrix(grid, [&](const PeriodicField& u) { return apply_adjoint_generator(op, sym, u); });
    const Eigen::VectorXcd null = normalized_null_vector(a, modes);
    out.dense_difference = (to_active(rho, modes) - null).norm();
  }
  return out;
}

PositivityReport positivity_report(const PeriodicField& rho, int oversample) {
  if (oversample < 1) throw std::invalid_argument("positivity_report: oversample must be >= 1");
  const Eigen::MatrixXd vals = oversampled_values(rho, oversample);
  Index at = 0;
  PositivityReport r;
  r.min_value = vals.col(0).minCoeff(&at);
  const int d = rho.grid().dim();
  const Index m = static_cast<Index>(rho.grid().modes()) * oversample;
  r.argmin.resize(d);
  for (int a = d - 1; a >= 0; --a) {
    r.argmin[a] = static_cast<double>(at % m) / static_cast<double>(m);
    at /= m;
  }
  return r;
}

}  // namespace perhom
