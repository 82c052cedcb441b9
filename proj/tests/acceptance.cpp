// Acceptance criteria C1..C14. Usage: acceptance <n> [<n> ...]; prints one
// "PASS Cn" or "FAIL Cn" line per criterion and exits nonzero on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "perhom/besov.hpp"
#include "perhom/cell_problem.hpp"
#include "perhom/fokker_planck.hpp"
#include "perhom/paracalc.hpp"
#include "perhom/pipeline.hpp"
#include "perhom/sde_mc.hpp"
#include "test_support.hpp"

using namespace perhom;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Outcome {
  bool pass = false;
  std::string summary;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

void note(const std::string& s) { std::printf("  %s\n", s.c_str()); }

PeriodicField cosine_drift(const GridPtr& g, double a) {
  DriftSpec s;
  s.terms.push_back({{1, 0, 0}, 0, a, 0.0});
  return build_drift(s, g);
}

/// Gradient spec of the potential sum_m (c_m cos 2 pi m x + s_m sin 2 pi m x).
DriftSpec potential_1d(std::vector<FourierTerm> terms) {
  DriftSpec s;
  s.kind = DriftSpec::Kind::gradient_of;
  s.terms = std::move(terms);
  return s;
}

std::vector<DriftSpec> test_potentials() {
  return {potential_1d({{{1, 0, 0}, 0, 0.0, 0.3}}),
          potential_1d({{{1, 0, 0}, 0, 0.25, 0.0}, {{2, 0, 0}, 0, 0.0, 0.15}}),
          potential_1d({{{1, 0, 0}, 0, 0.0, -0.2}, {{3, 0, 0}, 0, 0.15, 0.0}, {{5, 0, 0}, 0, 0.05, 0.05}})};
}

Eigen::ArrayXd grid_values(const PeriodicField& u) { return u.values().col(0).array(); }

PeriodicField white_noise(const GridPtr& g, std::uint64_t seed) {
  DriftSpec s;
  s.kind = DriftSpec::Kind::white_noise;
  s.seed = seed;
  return build_drift(s, g);
}

// ---------------------------------------------------------------------------

Outcome c1() {
  const GridPtr g = make_grid(1, 128);
  double worst = 0.0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    const PeriodicField u = test::random_field(g, 1, 31, 2 * s + 1, 0.0, true);
    const PeriodicField v = test::random_field(g, 1, 31, 2 * s + 2, 0.0, true);
    // Direct convolution of the coefficients.
    PeriodicField uv(g, 1, true);
    for (int k = -31; k <= 31; ++k)
      for (int l = -31; l <= 31; ++l)
        uv.coeffs()(g->index_of({k + l, 0, 0}), 0) += u.coeff({k, 0, 0}) * v.coeff({l, 0, 0});
    const BonyParts b = bony(u, v);
    const double err = l2_norm(b.low_high + b.resonant + b.high_low - uv) / l2_norm(uv);
    worst = std::max(worst, err);
  }
  return {worst <= 1e-11, fmt("max relative L2 defect %.3e over 100 pairs (limit 1e-11)", worst)};
}

Outcome c2() {
  double worst = 0.0;
  for (int d : {1, 2}) {
    const GridPtr g = make_grid(d, d == 1 ? 64 : 32);
    for (double alpha : {1.2, 1.5, 1.8}) {
      const LevySymbol sym(SphericalMeasure::fractional_laplacian(alpha, d), g);
      double e = 0.0;
      for (Index i = 1; i < g->size(); ++i) {
        const double exact = std::pow(kTwoPi * g->radius(i), alpha);
        e = std::max(e, std::abs(sym(i) - exact) / exact);
      }
      note(fmt("d=%d alpha=%.1f max relative symbol error %.3e", d, alpha, e));
      worst = std::max(worst, e);
    }
  }
  return {worst <= 1e-3, fmt("max relative error %.3e (limit 1e-3)", worst)};
}

Outcome c3() {
  bool ok = true;
  double worst_ratio = 0.0;
  for (int d : {1, 2}) {
    const GridPtr g = make_grid(d, d == 1 ? 64 : 16);
    for (double alpha : {1.5, 2.0}) {
      const LevySymbol sym(SphericalMeasure::fractional_laplacian(alpha, d), g);
      for (std::uint64_t s = 0; s < 20; ++s) {
        const PeriodicField u = test::random_field(g, 1, g->modes() / 2 - 1, 100 + s);
        for (double t : {0.1, 1.0, 10.0}) {
          const PeriodicField p = semigroup(sym, u, t);
          const double bound = std::exp(-sym.c_gap() * t);
          for (Index i = 1; i < g->size(); ++i) {
            const double a = std::abs(u.coeffs()(i, 0));
            if (a == 0.0) continue;
            const double r = std::abs(p.coeffs()(i, 0)) / (a * bound);
            worst_ratio = std::max(worst_ratio, r);
            if (r > 1.0 + 1e-12) ok = false;
          }
          if (l2_norm(p) > bound * l2_norm(u) * (1.0 + 1e-12)) ok = false;
        }
      }
    }
  }
  return {ok, fmt("max mode-wise |P_t g^(k)| / (e^{-c t} |g^(k)|) = %.6f (limit 1)", worst_ratio)};
}

Outcome c4() {
  const GridPtr g = make_grid(1, 64);
  const double T = 0.5;
  const int steps = 4096;
  bool ok = true;
  std::string s;
  for (double alpha : {1.5, 2.0}) {
    const auto t0 = std::chrono::steady_clock::now();
    const LevySymbol sym(SphericalMeasure::fractional_laplacian(alpha, 1), g);
    const PeriodicField F = cosine_drift(g, 0.5);
    const EnhancedDrift drift = enhance(F, sym, -0.1, 0.0);
    const PeriodicField mu = test::random_density(g, 10, 7, 0.5);
    const test::DenseGalerkin1d dense(F, alpha);
    const PeriodicField ref = dense.unpack(g, test::DenseGalerkin1d::propagate(dense.forward, dense.pack(mu), T));
    const DensityPath path = solve_fokker_planck(drift, sym, mu, T, steps);
    const double err = l2_norm(path.final_value() - ref);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    note(fmt("alpha=%.1f steps=%d L2 error %.3e, max mass deviation %.3e, %.1f s", alpha, steps, err,
             path.max_mass_deviation, secs));
    ok = ok && err < 1e-6 && path.max_mass_deviation <= 1e-10 && secs < 60.0;
    s += fmt("alpha=%.1f err=%.2e mass=%.1e; ", alpha, err, path.max_mass_deviation);
  }
  return {ok, s + "(limits 1e-6, 1e-10, 60 s)"};
}

/// rho(x) = exp(2 int_0^x F) / Z by 8-point Gauss-Legendre on each lattice cell.
Eigen::ArrayXd zero_flux_oracle(const PeriodicField& F) {
  static const double nodes[8] = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                                  -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                                  0.7966664774136267,  0.9602898564975363};
  static const double weights[8] = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
                                    0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
                                    0.2223810344533745, 0.1012285362903763};
  const int n = F.grid().modes();
  Eigen::ArrayXd logrho(n);
  logrho[0] = 0.0;
  Eigen::VectorXd x(1);
  for (int j = 1; j < n; ++j) {
    const double a = (j - 1.0) / n, h = 1.0 / n;
    double s = 0.0;
    for (int q = 0; q < 8; ++q) {
      x[0] = a + 0.5 * h * (nodes[q] + 1.0);
      s += weights[q] * F.evaluate(x);
    }
    logrho[j] = logrho[j - 1] + 2.0 * 0.5 * h * s;
  }
  const Eigen::ArrayXd rho = logrho.exp();
  return rho / rho.mean();
}

Outcome c5() {
  const GridPtr g = make_grid(1, 64);
  const LevySymbol sym(SphericalMeasure::fractional_laplacian(2.0, 1), g);
  bool ok = true;
  double worst = 0.0;
  int idx = 0;
  for (const DriftSpec& spec : test_potentials()) {
    const PeriodicField F = build_drift(spec, g);
    const InvariantDensity inv = invariant_density(enhance(F, sym, -0.1, 0.0), sym);
    const Eigen::ArrayXd oracle = zero_flux_oracle(F);
    const double err = (grid_values(inv.rho) - oracle).abs().maxCoeff();
    worst = std::max(worst, err);
    ok = ok && err <= 1e-7 && inv.min_value > 0.0;
    const Eigen::ArrayXd f = grid_values(build_potential(spec, g));
    std::string cand;
    bool candidates_fail = true;
    for (double c : {-1.0, 1.0, -2.0}) {
      const Eigen::ArrayXd e = (c * f).exp();
      const double d = (e / e.mean() - oracle).abs().maxCoeff();
      cand += fmt(" e^{%+gf}:%.2e", c, d);
      candidates_fail = candidates_fail && d > 1e-3;
    }
    const Eigen::ArrayXd e2 = (2.0 * f).exp();
    note(fmt("potential %d: solver vs oracle %.3e, e^{2f} vs oracle %.3e, min rho %.4f; rejected:%s", ++idx, err,
             (e2 / e2.mean() - oracle).abs().maxCoeff(), inv.min_value, cand.c_str()));
    ok = ok && candidates_fail;
  }
  return {ok, fmt("max L-inf error %.3e (limit 1e-7); rho = e^{2f}/Z, other candidates rejected", worst)};
}

Outcome c6() {
  const GridPtr g = make_grid(1, 64);
  const LevySymbol sym(SphericalMeasure::fractional_laplacian(2.0, 1), g);
  bool ok = true;
  double worst_chi = 0.0, worst_d = 0.0;
  for (const DriftSpec& spec : test_potentials()) {
    const EnhancedDrift drift = enhance(build_drift(spec, g), sym, -0.1, 0.0);
    const InvariantDensity inv = invariant_density(drift, sym);
    const Corrector chi = solve_poisson(drift, sym, inv);
    const EffectiveModel model = effective_diffusivity(chi, inv, sym);
    const Eigen::ArrayXd f = grid_values(build_potential(spec, g));
    const Eigen::ArrayXd em = (-2.0 * f).exp(), ep = (2.0 * f).exp();
    const double e_chi = ((1.0 + grid_values(partial_derivative(chi.chi, 0))) - em / em.mean()).abs().maxCoeff();
    const double d_exact = 1.0 / (ep.mean() * em.mean());
    const double e_d = std::abs(model.D(0, 0) - d_exact);
    note(fmt("D = %.12f, closed form %.12f, |1+chi' - oracle| = %.3e", model.D(0, 0), d_exact, e_chi));
    worst_chi = std::max(worst_chi, e_chi);
    worst_d = std::max(worst_d, e_d);
  }
  ok = worst_chi <= 1e-6 && worst_d <= 1e-6;
  for (int d : {1, 2}) {
    const GridPtr gz = make_grid(d, 16);
    const LevySymbol sz(SphericalMeasure::fractional_laplacian(2.0, d), gz);
    const EnhancedDrift zero = enhance(PeriodicField(gz, d, true), sz, -0.1, 0.0);
    const InvariantDensity inv = invariant_density(zero, sz);
    const EffectiveModel m = effective_diffusivity(solve_poisson(zero, sz, inv), inv, sz);
    const double e = (m.D - Eigen::MatrixXd::Identity(d, d)).norm();
    note(fmt("F = 0, d = %d: |D - I| = %.3e", d, e));
    ok = ok && e <= 1e-12;
  }
  return {ok, fmt("max |1+chi' - oracle| %.3e, max |D - oracle| %.3e (limits 1e-6); D = I for F = 0", worst_chi,
                  worst_d)};
}

Outcome c7() {
  struct Case {
    int d;
    int n;
    double alpha, beta;
    std::uint64_t seed;
    bool white;
  };
  const std::vector<Case> cases{{1, 64, 2.0, -0.55, 1, true},
                                {1, 64, 1.5, -0.3, 2, true},
                                {1, 32, 1.8, -0.45, 3, true},
                                {2, 16, 1.8, -0.35, 4, false},
                                {2, 16, 2.0, -0.1, 5, false}};
  double worst_res = 0.0, worst_id = 0.0;
  int solves = 0;
  for (const Case& c : cases) {
    const GridPtr g = make_grid(c.d, c.n);
    const LevySymbol sym(SphericalMeasure::fractional_laplacian(c.alpha, c.d), g);
    const PeriodicField F =
        c.white ? white_noise(g, c.seed) : 0.5 * test::random_field(g, c.d, c.n / 2 - 1, c.seed, 1.0);
    const EnhancedDrift drift = enhance(F, sym, c.beta, 0.0);
    const DriftOperator op(drift, sym);
    const double l1 = resolvent_lambda_min(op, sym), l2 = 4.0 * l1;
    const ResolventRhs rhs{test::random_field(g, 1, 6, 10 + c.seed, 1.0, true), PeriodicField(g, c.d, true)};
    auto residual = [&](const ResolventSolution& s, const PeriodicField& G) {
      ++solves;
      return holder2_norm(s.lambda * s.g.value - apply_full_generator(op, sym, s.g.value) - G, drift.beta);
    };
    const ResolventSolution a = solve_resolvent(drift, sym, rhs, l1);
    const ResolventSolution b = solve_resolvent(drift, sym, rhs, l2);
    const ResolventSolution ab = solve_resolvent(drift, sym, ResolventRhs{b.g.value, PeriodicField(g, c.d, true)}, l1);
    const double r = std::max({residual(a, rhs.sharp), residual(b, rhs.sharp), residual(ab, b.g.value)});
    const double id = l2_norm(a.g.value - b.g.value - (l2 - l1) * ab.g.value);
    note(fmt("d=%d N=%d alpha=%.1f beta=%.2f lambda=%g: max residual %.3e, identity defect %.3e", c.d, c.n, c.alpha,
             c.beta, l1, r, id));
    worst_res = std::max(worst_res, r);
    worst_id = std::max(worst_id, id);
  }
  return {worst_res < 1e-8 && worst_id < 1e-7,
          fmt("%d solves: max C^beta_2 residual %.3e (limit 1e-8), resolvent identity defect %.3e (limit 1e-7)",
              solves, worst_res, worst_id)};
}

/// <Gamma(f)> from the pointwise definition (1/2)(L(f^2) - 2 f L f) with -L the
/// noise generator, every term summed mode by mode at the points of a 4N lattice.
double gamma_pointwise(const PeriodicField& f, const LevySymbol& sym) {
  const SpectralGrid& g = sym.grid();
  const int d = g.dim();
  std::vector<std::pair<WaveVector, Complex>> modes;
  for (Index i = 0; i < g.size(); ++i)
    if (std::abs(f.coeffs()(i, 0)) > 0.0) modes.emplace_back(g.wavevector(i), f.coeffs()(i, 0));
  // Coefficients of f^2 by direct convolution, symbol evaluated off the lattice.
  std::vector<std::pair<Eigen::VectorXd, Complex>> sq;
  std::vector<std::pair<Eigen::VectorXd, Complex>> lf;
  for (const auto& [k, c] : modes) {
    Eigen::VectorXd kv(d);
    for (int a = 0; a < d; ++a) kv[a] = k[static_cast<std::size_t>(a)];
    lf.emplace_back(kv, symbol(sym.measure(), kv) * c);
    for (const auto& [l, e] : modes) {
      Eigen::VectorXd s(d);
      for (int a = 0; a < d; ++a) s[a] = k[static_cast<std::size_t>(a)] + l[static_cast<std::size_t>(a)];
      sq.emplace_back(s, c * e);
    }
  }
  const int m = 4 * g.modes();
  Index points = 1;
  for (int a = 0; a < d; ++a) points *= m;
  auto eval = [](const auto& terms, const Eigen::VectorXd& x) {
    Complex s = 0.0;
    for (const auto& [k, c] : terms) s += c * std::polar(1.0, kTwoPi * k.dot(x));
    return s.real();
  };
  std::vector<std::pair<Eigen::VectorXd, Complex>> lsq;
  for (const auto& [k, c] : sq) lsq.emplace_back(k, symbol(sym.measure(), k) * c);
  std::vector<std::pair<Eigen::VectorXd, Complex>> fm;
  for (const auto& [k, c] : modes) {
    Eigen::VectorXd kv(d);
    for (int a = 0; a < d; ++a) kv[a] = k[static_cast<std::size_t>(a)];
    fm.emplace_back(kv, c);
  }
  double total = 0.0;
  Eigen::VectorXd x(d);
  for (Index p = 0; p < points; ++p) {
    Index r = p;
    for (int a = 0; a < d; ++a) {
      x[a] = static_cast<double>(r % m) / m;
      r /= m;
    }
    // Gamma = f L f - (1/2) L(f^2) with L the positive operator.
    total += eval(fm, x) * eval(lf, x) - 0.5 * eval(lsq, x);
  }
  return total / static_cast<double>(points);
}

Outcome c8() {
  double worst = 0.0;
  for (int s = 0; s < 50; ++s) {
    const int d = s % 2 == 0 ? 1 : 2;
    const GridPtr g = make_grid(d, d == 1 ? 32 : 16);
    const double alpha = s % 5 == 0 ? 2.0 : 1.2 + 0.1 * (s % 5);
    const LevySymbol sym(SphericalMeasure::fractional_laplacian(alpha, d), g);
    const PeriodicField f = test::random_field(g, 1, d == 1 ? 6 : 3, 500 + static_cast<std::uint64_t>(s), 0.5, true);
    const double a = gamma_norm(f, sym), b = gamma_pointwise(f, sym);
    worst = std::max(worst, std::abs(a - b) / std::max(1.0, std::abs(b)));
  }
  return {worst <= 1e-10, fmt("max relative difference %.3e over 50 polynomials (limit 1e-10)", worst)};
}

std::vector<PeriodicField> gap_probes(const GridPtr& g) {
  std::vector<PeriodicField> out;
  for (int k = 1; k <= 2; ++k)
    for (int cs = 0; cs < 2; ++cs) {
      DriftSpec s;
      s.kind = DriftSpec::Kind::gradient_of;
      s.terms.push_back({{k, 0, 0}, 0, cs == 0 ? 1.0 : 0.0, cs == 1 ? 1.0 : 0.0});
      out.push_back(build_potential(s, g));
    }
  return out;
}

Outcome c9() {
  bool ok = true;
  std::string s;
  {
    const GridPtr g = make_grid(1, 64);
    for (double alpha : {1.5, 2.0}) {
      const LevySymbol sym(SphericalMeasure::fractional_laplacian(alpha, 1), g);
      const EnhancedDrift zero = enhance(PeriodicField(g, 1, true), sym, -0.1, 0.0);
      const InvariantDensity inv = invariant_density(zero, sym);
      const GapEstimate e = spectral_gap_estimate(zero, sym, inv, gap_probes(g), 25.0 / sym.c_gap());
      const double rel = std::abs(e.rate - sym.c_gap()) / sym.c_gap();
      note(fmt("F = 0, alpha=%.1f: fitted rate %.6f, min psi %.6f, relative error %.2e", alpha, e.rate, sym.c_gap(),
               rel));
      ok = ok && rel <= 0.01;
      s += fmt("F=0 alpha=%.1f rel=%.1e; ", alpha, rel);
    }
  }
  const GridPtr g = make_grid(1, 64);
  const LevySymbol sym(SphericalMeasure::fractional_laplacian(2.0, 1), g);
  double lowest = INFINITY;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const EnhancedDrift drift = enhance(white_noise(g, seed), sym, -0.55, 0.0);
    const InvariantDensity inv = invariant_density(drift, sym);
    const GapEstimate e = spectral_gap_estimate(drift, sym, inv, gap_probes(g), 25.0 / sym.c_gap());
    note(fmt("Brox seed %llu: fitted rate %.5f, min rho %.4f", static_cast<unsigned long long>(seed), e.rate,
             inv.min_value));
    lowest = std::min(lowest, e.rate);
    ok = ok && e.rate > 0.0;
  }
  return {ok, s + fmt("Brox min fitted rate %.5f over 5 seeds (must be > 0)", lowest)};
}

struct CorrectorBundle {
  EnhancedDrift drift;
  InvariantDensity inv;
  Corrector chi;
};

CorrectorBundle corrector_for(const PeriodicField& F, const LevySymbol& sym) {
  EnhancedDrift drift = enhance(F, sym, -0.1, 0.0);
  InvariantDensity inv = invariant_density(drift, sym);
  PoissonOptions po;
  po.ladder = false;
  Corrector chi = solve_poisson(drift, sym, inv, po);
  return {std::move(drift), std::move(inv), std::move(chi)};
}

Outcome c10() {
  const GridPtr g = make_grid(1, 64);
  const auto m = SphericalMeasure::fractional_laplacian(2.0, 1);
  const LevySymbol sym(m, g);
  // F = f' with f = 2 sin(2 pi x) / (2 pi); D is about 0.81.
  const DriftSpec spec = potential_1d({{{1, 0, 0}, 0, 0.0, 2.0 / kTwoPi}});
  const PeriodicField F = build_drift(spec, g);
  const CorrectorBundle b = corrector_for(F, sym);
  const EffectiveModel model = effective_diffusivity(b.chi, b.inv, sym);
  const double n = 64.0, t = 0.25;
  SimConfig cfg;
  cfg.x0 = Eigen::VectorXd::Zero(1);
  cfg.T = n * t;
  cfg.dt = 1e-3;
  cfg.paths = 100000;
  cfg.seed = 10;
  cfg.checkpoints = 4;
  const auto t0 = std::chrono::steady_clock::now();
  const TrajectoryEnsemble ens = simulate_paths(cfg, m, F);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const CltReport rep = clt_statistics(ens, model, n);
  const CltCheck& c = rep.checks.back();
  const double rel = std::abs(c.covariance(0, 0) - c.reference(0, 0)) / c.reference(0, 0);
  note(fmt("D = %.6f; rescaled variance %.6f +- %.6f vs t D = %.6f at t = %.2f; simulation %.0f s", model.D(0, 0),
           c.covariance(0, 0), c.standard_error(0, 0), c.reference(0, 0), c.time, secs));
  return {rel <= 0.05 && secs < 600.0, fmt("relative variance error %.3e (limit 5e-2), %.0f s", rel, secs)};
}

Outcome c11() {
  const GridPtr g = make_grid(1, 64);
  const auto m = SphericalMeasure::fractional_laplacian(1.5, 1);
  const LevySymbol sym(m, g);
  // F(-x - 1/2) = -F(x), so <F>_pi = 0.
  const PeriodicField F = cosine_drift(g, 0.3);
  const CorrectorBundle b = corrector_for(F, sym);
  const EffectiveModel model = stable_limit_model(b.chi, sym);
  note(fmt("<F>_pi = %.3e", b.chi.mean_F[0]));
  const double t = 0.03;
  std::vector<CltCheck> finals;
  for (double n : {16.0, 64.0}) {
    SimConfig cfg;
    cfg.x0 = Eigen::VectorXd::Zero(1);
    cfg.T = n * t;
    cfg.dt = 1e-3;
    cfg.paths = 100000;
    cfg.seed = 11;
    cfg.checkpoints = 1;
    const CltReport rep = clt_statistics(simulate_paths(cfg, m, F), model, n);
    finals.push_back(rep.checks.back());
    const CltCheck& c = finals.back();
    for (std::size_t i = 0; i < c.probes.size(); ++i)
      note(fmt("n=%g z=%g: |cf - e^{-t psi}| = %.3e, batch SE %.3e (%.2f SE)", n, c.probes[i][0], c.cf_error[i],
               c.cf_standard_error[i], c.cf_error[i] / c.cf_standard_error[i]));
  }
  bool ok = true;
  double worst_z = 0.0;
  for (std::size_t i = 0; i < finals[0].probes.size(); ++i) {
    ok = ok && finals[1].cf_error[i] < finals[0].cf_error[i];
    const double z = finals[1].cf_error[i] / finals[1].cf_standard_error[i];
    worst_z = std::max(worst_z, z);
    ok = ok && z < 4.0;
  }
  return {ok, fmt("CF error decreases from n=16 to n=64 at z=1,2,3; final max %.2f batch SE (limit 4)", worst_z)};
}

Outcome c12() {
  const GridPtr g = make_grid(1, 64);
  const auto m = SphericalMeasure::fractional_laplacian(1.5, 1);
  const LevySymbol sym(m, g);
  const PeriodicField F = cosine_drift(g, 1.0);
  const CorrectorBundle b = corrector_for(F, sym);
  const EffectiveModel model = stable_limit_model(b.chi, sym);
  std::vector<double> ns, moments;
  for (double n : {4.0, 16.0, 64.0}) {
    SimConfig cfg;
    cfg.x0 = Eigen::VectorXd::Zero(1);
    cfg.T = n;
    cfg.dt = 1e-3;
    cfg.paths = 4000;
    cfg.seed = 12;
    cfg.checkpoints = 64;
    const MartingaleReport mr = martingale_diagnostics(simulate_paths(cfg, m, F), b.chi, model);
    note(fmt("n=%g (horizon %g): E sup |M|^2 = %.5e, max |mean| z = %.2f", n, cfg.T, mr.sup_moment, mr.max_z));
    ns.push_back(n);
    moments.push_back(mr.sup_moment);
  }
  const double slope = log_log_slope(ns, moments);
  return {slope > 0.7 && slope < 1.3, fmt("log-log slope %.4f (range (0.7, 1.3))", slope)};
}

Outcome c13() {
  const auto t0 = std::chrono::steady_clock::now();
  const GridPtr g = make_grid(1, 32);
  bool ok = true;
  std::string s;
  for (double alpha : {2.0, 1.5}) {
    const auto m = SphericalMeasure::fractional_laplacian(alpha, 1);
    const LevySymbol sym(m, g);
    const PeriodicField F =
        alpha == 2.0 ? build_drift(potential_1d({{{1, 0, 0}, 0, 0.0, 0.8 / kTwoPi}}), g) : cosine_drift(g, 0.8);
    const CorrectorBundle b = corrector_for(F, sym);
    const EffectiveModel model =
        alpha == 2.0 ? effective_diffusivity(b.chi, b.inv, sym) : stable_limit_model(b.chi, sym);
    PdeSettings ps;
    ps.epsilons = {0.5, 0.25, 0.125};
    const PdeTable tab = pde_homogenization_experiment(F, m, -0.1, 0.0, model, ps, 1e-8);
    for (std::size_t i = 0; i < tab.rows.size(); ++i) {
      note(fmt("alpha=%.1f eps=%.4f N=%d steps=%d probe error %.4e", alpha, tab.rows[i].epsilon, tab.rows[i].modes,
               tab.rows[i].steps, tab.rows[i].error));
      if (i > 0 && !(tab.rows[i].error < tab.rows[i - 1].error)) ok = false;
    }
    s += fmt("alpha=%.1f errors %.2e > %.2e > %.2e; ", alpha, tab.rows[0].error, tab.rows[1].error,
             tab.rows[2].error);
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  ok = ok && secs < 300.0;
  return {ok, s + fmt("%.0f s", secs)};
}

Outcome c14() {
  const GridPtr g = make_grid(1, 64);
  const auto m = SphericalMeasure::fractional_laplacian(2.0, 1);
  const LevySymbol sym(m, g);
  const PeriodicField F = build_drift(potential_1d({{{1, 0, 0}, 0, 0.0, 0.5 / kTwoPi}}), g);
  const InvariantDensity inv = invariant_density(enhance(F, sym, -0.1, 0.0), sym);
  const PeriodicField bobs = build_potential(potential_1d({{{1, 0, 0}, 0, 1.0, 0.0}}), g);
  const double mean = pi_mean(bobs, inv.rho);
  SimConfig cfg;
  cfg.x0 = Eigen::VectorXd::Zero(1);
  cfg.T = 256.0;
  cfg.dt = 1e-3;
  cfg.paths = 2000;
  cfg.seed = 14;
  cfg.checkpoints = 16;
  cfg.observable = bobs;
  const TrajectoryEnsemble ens = simulate_paths(cfg, m, F);
  std::vector<double> ns, errs;
  for (int c = 0; c < ens.checkpoints; ++c) {
    const double t = ens.times[static_cast<std::size_t>(c)];
    if (std::abs(t - 16.0) > 1e-9 && std::abs(t - 64.0) > 1e-9 && std::abs(t - 256.0) > 1e-9) continue;
    const double e = ergodic_l2_error(ens, c, mean);
    note(fmt("n=%g: L2 error of the time average %.5e", t, e));
    ns.push_back(t);
    errs.push_back(e);
  }
  if (ns.size() != 3) return {false, "checkpoints at 16, 64, 256 missing"};
  const double slope = log_log_slope(ns, errs);
  return {std::abs(slope + 0.5) <= 0.15, fmt("<b>_pi = %.6f, log-log slope %.4f (range -0.5 +- 0.15)", mean, slope)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::function<Outcome()>> criteria{c1, c2, c3, c4, c5, c6, c7, c8, c9, c10, c11, c12, c13, c14};
  std::vector<int> which;
  for (int i = 1; i < argc; ++i) which.push_back(std::atoi(argv[i]));
  if (which.empty())
    for (int i = 1; i <= 14; ++i) which.push_back(i);
  bool all = true;
  for (int c : which) {
    if (c < 1 || c > 14) {
      std::fprintf(stderr, "unknown criterion %d\n", c);
      return 2;
    }
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[static_cast<std::size_t>(c - 1)]();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s C%d %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", c, o.summary.c_str(), secs);
    std::fflush(stdout);
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
