#include "perhom/cell_problem.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "perhom/besov.hpp"
#include "perhom/errors.hpp"
#include "perhom/paracalc.hpp"
#include "perhom/philox.hpp"
#include "perhom/time_stepping.hpp"

namespace perhom {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double holder(const PeriodicField& u, double theta) { return besov_norm(u, theta, 2.0, kInf); }

PeriodicField unit_vector_field(const GridPtr& grid, int d, int i) {
  PeriodicField e(grid, d, true);
  e.coeffs()(0, i) = 1.0;
  return e;
}

PeriodicField assemble_rhs(const ResolventRhs& rhs, const PeriodicField& F) {
  PeriodicField G = rhs.sharp;
  for (int c = 0; c < rhs.derivative.components(); ++c) G += para_lt(rhs.derivative.component(c), F.component(c));
  return G;
}

std::string lambda_message(const DriftOperator& op, const LevySymbol& sym, double lambda, double q) {
  std::ostringstream os;
  os << "Picard map does not contract at lambda = " << lambda << " (measured factor " << q << ")";
  try {
    os << "; required lambda_min = " << resolvent_lambda_min(op, sym);
  } catch (const std::exception&) {
    os << "; no lambda_min found";
  }
  return os.str();
}

// Picard iteration with a known contraction factor.
ResolventSolution picard(const DriftOperator& op, const EnhancedDrift& drift, const LevySymbol& sym,
                         const ResolventRhs& rhs, double lambda, double q, const ResolventOptions& opts) {
  const double theta = resolvent_regularity(drift);
  const PeriodicField G = assemble_rhs(rhs, drift.field);
  PeriodicField g = opts.initial_guess ? *opts.initial_guess : resolvent_integral(sym, G, lambda);
  ResolventSolution sol;
  sol.lambda = lambda;
  sol.contraction = q;
  bool converged = false;
  for (int it = 1; it <= opts.max_iterations; ++it) {
    PeriodicField next = resolvent_integral(sym, G + op.transport(g), lambda);
    const double diff = holder(next - g, theta);
    g = std::move(next);
    sol.iterations = it;
    if (!std::isfinite(diff) || diff > 1e12) throw ConvergenceError("solve_resolvent: " + lambda_message(op, sym, lambda, q));
    if (diff <= opts.tolerance * std::max(1.0, holder(g, theta))) {
      converged = true;
      break;
    }
  }
  if (!converged)
    throw ConvergenceError("solve_resolvent: no convergence after " + std::to_string(opts.max_iterations) +
                           " iterations; " + lambda_message(op, sym, lambda, q));
  const PeriodicField residual = lambda * g - apply_full_generator(op, sym, g) - G;
  sol.residual = holder(residual, drift.beta);
  if (sol.residual > opts.residual_tolerance * std::max(1.0, holder(G, drift.beta)))
    throw ConvergenceError("solve_resolvent: residual " + std::to_string(sol.residual) + " above tolerance");
  sol.g = paracontrolled(g, rhs.derivative + gradient(g), resolvent_integral(sym, drift.field, lambda));
  return sol;
}

}  // namespace

double pi_mean(const PeriodicField& u, const PeriodicField& rho) { return inner_product(u, rho); }

double l2_pi_norm(const PeriodicField& u, const PeriodicField& rho) {
  double s = 0.0;
  for (int c = 0; c < u.components(); ++c) {
    const PeriodicField uc = u.component(c);
    s += integrate_triple(uc, uc, rho);
  }
  return std::sqrt(std::max(0.0, s));
}

MeanUnderPi mean_under_pi(const EnhancedDrift& drift, const LevySymbol& sym, const InvariantDensity& inv) {
  require_same_grid(drift.field.grid(), inv.rho.grid());
  const DriftOperator op(drift, sym, ProductMode::paracontrolled);
  const PeriodicField assembled = op.flux(inv.rho);
  const PeriodicField direct = op.flux_direct(inv.rho);
  MeanUnderPi out;
  const int d = drift.dim();
  out.value.resize(d);
  out.direct.resize(d);
  for (int i = 0; i < d; ++i) {
    out.value[i] = assembled.mean(i).real();
    out.direct[i] = direct.mean(i).real();
  }
  out.difference = (out.value - out.direct).cwiseAbs().maxCoeff();
  return out;
}

double resolvent_regularity(const EnhancedDrift& drift) { return drift.beta + drift.alpha - 0.05; }

double picard_contraction(const DriftOperator& op, const LevySymbol& sym, double lambda) {
  const auto& g = sym.grid();
  PeriodicField v(op.grid_ptr(), 1, true);
  PhiloxStream rng(0x5eed, 0);
  for (Index i = 0; i < g.size(); ++i) v.coeffs()(i, 0) = Complex(rng.normal(), rng.normal());
  v.enforce_hermitian();
  v.coeffs()(0, 0) = 0.0;
  v *= 1.0 / l2_norm(v);
  constexpr int kIterations = 60;
  constexpr int kAveraged = 12;
  double log_sum = 0.0;
  for (int it = 0; it < kIterations; ++it) {
    PeriodicField w = resolvent_integral(sym, op.transport(v), lambda);
    const double r = l2_norm(w);
    if (!(r > 1e-300)) return 0.0;
    if (it >= kIterations - kAveraged) log_sum += std::log(r);
    v = w * (1.0 / r);
  }
  return std::exp(log_sum / kAveraged);
}

double resolvent_lambda_min(const DriftOperator& op, const LevySymbol& sym) {
  double lambda = 1.0;
  for (int k = 0; k < 80; ++k) {
    if (picard_contraction(op, sym, lambda) <= 0.5) return lambda;
    lambda *= 2.0;
  }
  throw ConvergenceError("resolvent_lambda_min: no contracting lambda up to 2^80");
}

ResolventSolution solve_resolvent(const DriftOperator& op, const EnhancedDrift& drift, const LevySymbol& sym,
                                  const ResolventRhs& rhs, double lambda, const ResolventOptions& opts) {
  if (!(lambda > 0.0)) throw std::invalid_argument("solve_resolvent: lambda must be positive");
  require_same_grid(rhs.sharp.grid(), drift.field.grid());
  if (rhs.sharp.components() != 1 || rhs.derivative.components() != drift.dim())
    throw std::invalid_argument("solve_resolvent: G# must be scalar and G' must have d components");
  const double q = picard_contraction(op, sym, lambda);
  if (q >= 1.0) throw ConvergenceError("solve_resolvent: " + lambda_message(op, sym, lambda, q));
  return picard(op, drift, sym, rhs, lambda, q, opts);
}

ResolventSolution solve_resolvent(const EnhancedDrift& drift, const LevySymbol& sym, const ResolventRhs& rhs,
                                  double lambda, const ResolventOptions& opts) {
  const DriftOperator op(drift, sym, opts.mode);
  return solve_resolvent(op, drift, sym, rhs, lambda, opts);
}

Corrector solve_poisson(const EnhancedDrift& drift, const LevySymbol& sym, const InvariantDensity& inv,
                        const PoissonOptions& opts) {
  require_same_grid(drift.field.grid(), inv.rho.grid());
  const DriftOperator op(drift, sym, opts.mode);
  const GridPtr& grid = drift.field.grid_ptr();
  const int d = drift.dim();
  const double theta = resolvent_regularity(drift);

  Corrector out;
  out.mean_F = mean_under_pi(drift, sym, inv).value;
  const double lambda = opts.lambda ? *opts.lambda : resolvent_lambda_min(op, sym);
  const double q = picard_contraction(op, sym, lambda);
  if (q >= 1.0) throw ConvergenceError("solve_poisson: " + lambda_message(op, sym, lambda, q));
  out.lambda_used = lambda;

  ResolventOptions ropts;
  ropts.mode = opts.mode;
  const PeriodicField one = PeriodicField::constant(grid, 1.0);
  const PeriodicField reference = resolvent_integral(sym, drift.field, lambda);
  std::vector<PeriodicField> chis, sharps;
  out.pi_means.resize(d);
  for (int i = 0; i < d; ++i) {
    const PeriodicField Fi = drift.field.component(i);
    // G = G# + e_i < F = lambda chi + F^i - <F^i>_pi.
    PeriodicField base = Fi - para_lt(one, Fi);
    base.coeffs()(0, 0) -= out.mean_F[i];
    const PeriodicField ei = unit_vector_field(grid, d, i);
    PeriodicField chi(grid, 1, true);
    double last = kInf, before = kInf;
    bool converged = false;
    for (int k = 1; k <= opts.max_outer; ++k) {
      ropts.initial_guess = &chi;
      const ResolventSolution sol = picard(op, drift, sym, {base + lambda * chi, ei}, lambda, q, ropts);
      before = last;
      last = holder(sol.g.value - chi, theta);
      chi = sol.g.value;
      out.outer_iterations = std::max(out.outer_iterations, k);
      if (last < opts.tolerance) {
        converged = true;
        break;
      }
    }
    if (!converged) {
      std::ostringstream os;
      os << "solve_poisson: outer iteration did not converge (last two changes " << before << ", " << last << ")";
      throw ConvergenceError(os.str());
    }
    chi.coeffs()(0, 0) -= pi_mean(chi, inv.rho);
    out.pi_means[i] = pi_mean(chi, inv.rho);
    PeriodicField sharp = chi;
    const PeriodicField deriv = ei + gradient(chi);
    for (int c = 0; c < d; ++c) sharp -= para_lt(deriv.component(c), reference.component(c));
    PeriodicField residual = apply_full_generator(op, sym, chi) + Fi;
    residual.coeffs()(0, 0) -= out.mean_F[i];
    out.residual_norm = std::max(out.residual_norm, holder(residual, drift.beta));
    chis.push_back(std::move(chi));
    sharps.push_back(std::move(sharp));
  }
  out.chi = PeriodicField::stack(chis);
  out.sharp = PeriodicField::stack(sharps);

  if (opts.ladder) {
    PoissonOptions sub = opts;
    sub.ladder = false;
    sub.lambda.reset();
    for (int m = 0; m + 1 < static_cast<int>(drift.ladder.size()); ++m) {
      const EnhancedDrift dm = enhance(drift.ladder[static_cast<std::size_t>(m)], sym, drift.beta, drift.gamma);
      const InvariantDensity inv_m = invariant_density(dm, sym, opts.invariant);
      const Corrector cm = solve_poisson(dm, sym, inv_m, sub);
      out.ladder_levels.push_back(m);
      out.ladder_errors.push_back(l2_pi_norm(cm.chi - out.chi, inv.rho));
    }
  }
  return out;
}

double gamma_norm(const PeriodicField& f, const LevySymbol& sym) {
  require_same_grid(f.grid(), sym.grid());
  double s = 0.0;
  for (int c = 0; c < f.components(); ++c) s += (f.coeffs().col(c).array().abs2() * sym.table()).sum();
  return s;
}

PeriodicField carre_du_champ(const PeriodicField& f, const LevySymbol& sym) {
  require_same_grid(f.grid(), sym.grid());
  if (f.components() != 1) throw std::invalid_argument("carre_du_champ: scalar field required");
  const GridPtr fine = make_grid(f.grid().dim(), 2 * f.grid().modes());
  const LevySymbol fine_sym = sym.on(fine);
  const PeriodicField f2 = resample(f, fine);
  const PeriodicField lf = apply_generator(fine_sym, f2);
  PeriodicField gamma = multiply(f2, lf);
  gamma -= 0.5 * apply_generator(fine_sym, multiply(f2, f2));
  return gamma;
}

double h1_pi_seminorm(const PeriodicField& f, const LevySymbol& sym, const InvariantDensity& inv) {
  const PeriodicField gamma = carre_du_champ(f, sym);
  return inner_product(gamma, resample(inv.rho, gamma.grid_ptr()));
}

EffectiveModel effective_diffusivity(const Corrector& chi, const InvariantDensity& inv, const LevySymbol& sym) {
  if (sym.alpha() < 2.0)
    throw std::domain_error("effective_diffusivity: D is only defined for alpha = 2; use stable_limit_model");
  const int d = chi.chi.components();
  std::vector<PeriodicField> a;
  for (int i = 0; i < d; ++i) {
    PeriodicField ai = gradient(chi.chi.component(i));
    ai.coeffs()(0, i) += 1.0;
    a.push_back(std::move(ai));
  }
  Eigen::MatrixXd D(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      double s = 0.0;
      for (int c = 0; c < d; ++c)
        s += integrate_triple(a[static_cast<std::size_t>(i)].component(c), a[static_cast<std::size_t>(j)].component(c),
                              inv.rho);
      D(i, j) = s;
    }
  const double asym = (D - D.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-8) throw InternalError("effective_diffusivity: asymmetric D (" + std::to_string(asym) + ")");
  EffectiveModel m;
  m.alpha = sym.alpha();
  m.D = 0.5 * (D + D.transpose());
  m.mean_F = chi.mean_F;
  return m;
}

EffectiveModel stable_limit_model(const Corrector& chi, const LevySymbol& sym) {
  EffectiveModel m;
  m.alpha = sym.alpha();
  m.mean_F = chi.mean_F;
  m.psi = sym;
  return m;
}

GapEstimate spectral_gap_estimate(const EnhancedDrift& drift, const LevySymbol& sym, const InvariantDensity& inv,
                                  const std::vector<PeriodicField>& probes, double horizon, int steps,
                                  ProductMode mode) {
  if (probes.empty()) throw std::invalid_argument("spectral_gap_estimate: no probes");
  const DriftOperator op(drift, sym, mode);
  const int n_steps = std::max(steps, stable_step_count(sym, op.sup_norm(), horizon, 1024));
  GapEstimate out;
  double best = kInf;
  for (const auto& probe : probes) {
    PeriodicField p = probe;
    p.coeffs()(0, 0) -= pi_mean(p, inv.rho);
    const double n0 = l2_pi_norm(p, inv.rho);
    if (!(n0 > 1e-12 * std::max(1.0, l2_norm(probe)))) {
      out.probe_rates.push_back(std::numeric_limits<double>::quiet_NaN());
      out.fitted_points.push_back(0);
      continue;
    }
    std::vector<double> ts, logs;
    EvolutionOptions eo;
    eo.mode = mode;
    eo.record_every = n_steps;
    eo.observer = [&](double tau, const PeriodicField& u) {
      // The step map preserves <u>_pi only to O(h^2); the constant mode is not part of the decay.
      PeriodicField c = u;
      c.coeffs()(0, 0) -= pi_mean(u, inv.rho);
      const double r = l2_pi_norm(c, inv.rho) / n0;
      if (r <= 1e-2 && r >= 1e-8) {
        ts.push_back(tau);
        logs.push_back(std::log(r));
      }
    };
    solve_backward_kolmogorov(drift, sym, p, horizon, n_steps, eo);
    if (ts.size() < 3)
      throw ConvergenceError("spectral_gap_estimate: fewer than 3 samples in the fit window; adjust the horizon");
    const Eigen::Map<const Eigen::VectorXd> t(ts.data(), static_cast<Index>(ts.size()));
    const Eigen::Map<const Eigen::VectorXd> y(logs.data(), static_cast<Index>(logs.size()));
    const double tm = t.mean(), ym = y.mean();
    const double slope = ((t.array() - tm) * (y.array() - ym)).sum() / (t.array() - tm).square().sum();
    const double rate = -slope;
    if (!(rate > 0.0)) throw ConvergenceError("spectral_gap_estimate: non-decaying probe (fitted rate " +
                                              std::to_string(rate) + ")");
    out.probe_rates.push_back(rate);
    out.fitted_points.push_back(static_cast<int>(ts.size()));
    best = std::min(best, rate);
  }
  if (!std::isfinite(best)) throw std::invalid_argument("spectral_gap_estimate: every probe is constant");
  out.rate = best;
  return out;
}

}  // namespace perhom
