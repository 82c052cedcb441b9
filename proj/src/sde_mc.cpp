#include "perhom/sde_mc.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <thread>

namespace perhom {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

bool is_canonical(const WaveVector& k) {
  for (int v : k) {
    if (v > 0) return true;
    if (v < 0) return false;
  }
  return false;
}

// Mean and batch-means standard error of per-path values.
struct BatchStat {
  double mean = 0.0;
  double se = 0.0;
};

BatchStat batch_stat(const std::vector<double>& v, int batches) {
  const auto m = static_cast<std::int64_t>(v.size());
  std::vector<double> sums(static_cast<std::size_t>(batches), 0.0);
  std::vector<std::int64_t> counts(static_cast<std::size_t>(batches), 0);
  double total = 0.0;
  for (std::int64_t p = 0; p < m; ++p) {
    const auto b = static_cast<std::size_t>(p * batches / m);
    sums[b] += v[static_cast<std::size_t>(p)];
    ++counts[b];
    total += v[static_cast<std::size_t>(p)];
  }
  BatchStat s;
  s.mean = total / static_cast<double>(m);
  double var = 0.0;
  for (std::size_t b = 0; b < sums.size(); ++b) {
    const double bm = sums[b] / static_cast<double>(counts[b]);
    var += (bm - s.mean) * (bm - s.mean);
  }
  var /= static_cast<double>(batches - 1);
  s.se = std::sqrt(var / static_cast<double>(batches));
  return s;
}

void check_batches(std::int64_t paths, int batches) {
  if (batches < 30) throw std::invalid_argument("batch means need at least 30 batches");
  if (paths < 1000 || paths < 10 * static_cast<std::int64_t>(batches))
    throw std::invalid_argument("insufficient paths for batch-means statistics: " + std::to_string(paths));
}

template <class Body>
void parallel_paths(std::int64_t paths, int threads, Body body) {
  int nt = threads > 0 ? threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  nt = static_cast<int>(std::min<std::int64_t>(nt, std::max<std::int64_t>(1, paths)));
  if (nt == 1) {
    body(0, paths);
    return;
  }
  std::vector<std::thread> pool;
  for (int t = 0; t < nt; ++t) {
    const std::int64_t lo = paths * t / nt, hi = paths * (t + 1) / nt;
    pool.emplace_back([=, &body] { body(lo, hi); });
  }
  for (auto& th : pool) th.join();
}

}  // namespace

// ---- Stable increments -------------------------------------------------------

double standard_stable(double alpha, PhiloxStream& rng) {
  const double v = std::numbers::pi * (rng.uniform() - 0.5);
  const double w = -std::log(rng.uniform());
  if (alpha == 2.0) return std::sqrt(2.0) * rng.normal();
  return std::sin(alpha * v) / std::pow(std::cos(v), 1.0 / alpha) *
         std::pow(std::cos((1.0 - alpha) * v) / w, (1.0 - alpha) / alpha);
}

StableSampler::StableSampler(const SphericalMeasure& measure, int quadrature)
    : dim_(measure.dim()), alpha_(measure.alpha()) {
  if (!(alpha_ > 1.0 && alpha_ <= 2.0)) throw std::invalid_argument("StableSampler: alpha must lie in (1, 2]");
  if (alpha_ == 2.0) return;
  const auto atoms = measure.atoms(quadrature);
  std::vector<bool> used(atoms.size(), false);
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (used[i]) continue;
    std::size_t j = i + 1;
    while (j < atoms.size() && (used[j] || (atoms[j].direction + atoms[i].direction).norm() > 1e-12)) ++j;
    if (j == atoms.size()) throw std::invalid_argument("StableSampler: atom without antipode");
    used[i] = used[j] = true;
    directions.push_back(atoms[i].direction);
    scales.push_back(std::pow(2.0 * atoms[i].weight, 1.0 / alpha_) / kTwoPi);
  }
}

void StableSampler::add_increment(double dt, PhiloxStream& rng, double* out) const {
  if (dt == 0.0) return;
  if (alpha_ == 2.0) {
    const double s = std::sqrt(dt);
    for (int a = 0; a < dim_; ++a) out[a] += s * rng.normal();
    return;
  }
  const double t = std::pow(dt, 1.0 / alpha_);
  for (std::size_t p = 0; p < directions.size(); ++p) {
    const double c = scales[p] * t * standard_stable(alpha_, rng);
    for (int a = 0; a < dim_; ++a) out[a] += c * directions[p][a];
  }
}

Eigen::VectorXd sample_stable_increment(const SphericalMeasure& measure, double dt, PhiloxStream& rng) {
  if (dt < 0.0) throw std::invalid_argument("sample_stable_increment: negative dt");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(measure.dim());
  StableSampler(measure).add_increment(dt, rng, out.data());
  return out;
}

// ---- Mode summation ----------------------------------------------------------

ModeSum::ModeSum(const PeriodicField& field, double cutoff)
    : dim_(field.grid().dim()), components_(field.components()) {
  if (!field.is_real()) throw std::invalid_argument("ModeSum: real field required");
  const auto& g = field.grid();
  const double scale = field.coeffs().cwiseAbs().maxCoeff();
  for (int c = 0; c < components_; ++c) mean_.push_back(field.coeffs()(0, c).real());
  for (Index i = 1; i < g.size(); ++i) {
    if (g.is_nyquist(i) || !is_canonical(g.wavevector(i))) continue;
    if (field.coeffs().row(i).cwiseAbs().maxCoeff() <= cutoff * scale) continue;
    if (field.coeffs().row(i).cwiseAbs().maxCoeff() == 0.0) continue;
    modes_.push_back(g.wavevector(i));
    for (int c = 0; c < components_; ++c) coeffs_.push_back(2.0 * field.coeffs()(i, c));
    for (int a = 0; a < dim_; ++a) max_k_ = std::max(max_k_, std::abs(g.wavevector(i)[static_cast<std::size_t>(a)]));
  }
}

void ModeSum::evaluate(const double* x, double* out) const {
  thread_local std::vector<Complex> powers;
  const int span = 2 * max_k_ + 1;
  powers.resize(static_cast<std::size_t>(dim_ * span));
  for (int a = 0; a < dim_; ++a) {
    const double xa = x[a] - std::floor(x[a]);
    const Complex z(std::cos(kTwoPi * xa), std::sin(kTwoPi * xa));
    Complex* row = powers.data() + a * span + max_k_;
    row[0] = 1.0;
    for (int n = 1; n <= max_k_; ++n) {
      row[n] = row[n - 1] * z;
      row[-n] = std::conj(row[n]);
    }
  }
  for (int c = 0; c < components_; ++c) out[c] = mean_[static_cast<std::size_t>(c)];
  for (std::size_t m = 0; m < modes_.size(); ++m) {
    Complex e = powers[static_cast<std::size_t>(modes_[m][0] + max_k_)];
    for (int a = 1; a < dim_; ++a)
      e *= powers[static_cast<std::size_t>(a * span + modes_[m][static_cast<std::size_t>(a)] + max_k_)];
    for (int c = 0; c < components_; ++c)
      out[c] += (coeffs_[m * static_cast<std::size_t>(components_) + static_cast<std::size_t>(c)] * e).real();
  }
}

// ---- Simulation --------------------------------------------------------------

TrajectoryEnsemble simulate_paths(const SimConfig& cfg, const SphericalMeasure& measure, const PeriodicField& drift) {
  const int d = drift.grid().dim();
  if (drift.components() != d) throw std::invalid_argument("simulate_paths: drift must have d components");
  if (measure.dim() != d) throw std::invalid_argument("simulate_paths: measure dimension differs from drift");
  if (cfg.x0.size() != d) throw std::invalid_argument("simulate_paths: x0 has the wrong dimension");
  if (!(cfg.dt > 0.0) || cfg.dt > cfg.T / 100.0 * (1.0 + 1e-12))
    throw std::invalid_argument("simulate_paths: dt must satisfy 0 < dt <= T/100");
  if (cfg.paths < 1) throw std::invalid_argument("simulate_paths: need at least one path");
  if (cfg.checkpoints < 1) throw std::invalid_argument("simulate_paths: need at least one checkpoint");
  if (cfg.observable && cfg.observable->components() != 1)
    throw std::invalid_argument("simulate_paths: observable must be scalar");

  const auto steps = static_cast<std::int64_t>(std::llround(cfg.T / cfg.dt));
  std::vector<std::int64_t> marks;
  TrajectoryEnsemble ens;
  ens.dim = d;
  ens.paths = cfg.paths;
  ens.checkpoints = cfg.checkpoints;
  ens.dt = cfg.dt;
  ens.x0 = cfg.x0;
  ens.seed = cfg.seed;
  for (int c = 0; c < cfg.checkpoints; ++c) {
    marks.push_back(std::max<std::int64_t>(1, steps * (c + 1) / cfg.checkpoints));
    ens.times.push_back(static_cast<double>(marks.back()) * cfg.dt);
  }
  const std::size_t slots = static_cast<std::size_t>(cfg.paths) * static_cast<std::size_t>(cfg.checkpoints);
  ens.drift_integral.assign(slots * static_cast<std::size_t>(d), 0.0);
  ens.levy.assign(slots * static_cast<std::size_t>(d), 0.0);
  if (cfg.observable) ens.observable.assign(slots, 0.0);

  const ModeSum field(drift);
  const std::optional<ModeSum> obs = cfg.observable ? std::optional<ModeSum>(ModeSum(*cfg.observable)) : std::nullopt;
  const StableSampler sampler(measure);
  const double dt = cfg.dt;

  parallel_paths(cfg.paths, cfg.threads, [&](std::int64_t lo, std::int64_t hi) {
    std::vector<double> x(static_cast<std::size_t>(d)), z(static_cast<std::size_t>(d)), l(static_cast<std::size_t>(d)),
        f(static_cast<std::size_t>(d));
    double b = 0.0;
    for (std::int64_t p = lo; p < hi; ++p) {
      PhiloxStream rng(cfg.seed, static_cast<std::uint64_t>(p));
      std::fill(z.begin(), z.end(), 0.0);
      std::fill(l.begin(), l.end(), 0.0);
      double integral = 0.0;
      std::size_t next = 0;
      for (std::int64_t n = 1; n <= steps; ++n) {
        for (int a = 0; a < d; ++a) x[static_cast<std::size_t>(a)] = cfg.x0[a] + z[static_cast<std::size_t>(a)] + l[static_cast<std::size_t>(a)];
        field.evaluate(x.data(), f.data());
        if (obs) {
          obs->evaluate(x.data(), &b);
          integral += b * dt;
        }
        for (int a = 0; a < d; ++a) z[static_cast<std::size_t>(a)] += f[static_cast<std::size_t>(a)] * dt;
        sampler.add_increment(dt, rng, l.data());
        while (next < marks.size() && marks[next] == n) {
          const std::size_t at = ens.at(p, static_cast<int>(next));
          for (int a = 0; a < d; ++a) {
            ens.drift_integral[at + static_cast<std::size_t>(a)] = z[static_cast<std::size_t>(a)];
            ens.levy[at + static_cast<std::size_t>(a)] = l[static_cast<std::size_t>(a)];
          }
          if (obs) ens.observable[static_cast<std::size_t>(p) * static_cast<std::size_t>(cfg.checkpoints) + next] = integral;
          ++next;
        }
      }
    }
  });
  return ens;
}

// ---- Statistics --------------------------------------------------------------

CltReport clt_statistics(const TrajectoryEnsemble& ens, const EffectiveModel& model, double n,
                         const CltOptions& opts) {
  check_batches(ens.paths, opts.batches);
  if (!(n > 0.0)) throw std::invalid_argument("clt_statistics: n must be positive");
  const int d = ens.dim;
  const bool brownian = model.alpha == 2.0;
  if (brownian && (model.D.rows() != d || model.D.cols() != d))
    throw std::invalid_argument("clt_statistics: Brownian branch needs D");
  if (!brownian && !model.psi) throw std::invalid_argument("clt_statistics: stable branch needs psi");
  const Eigen::VectorXd meanF = model.mean_F.size() == d ? model.mean_F : Eigen::VectorXd::Zero(d);

  CltReport rep;
  rep.regime = brownian ? CltReport::Regime::brownian : CltReport::Regime::stable;
  rep.n = n;
  rep.batches = opts.batches;
  std::vector<int> idx = opts.checkpoint_indices;
  if (idx.empty()) {
    for (double frac : {0.25, 0.5, 1.0}) {
      const double target = frac * ens.times.back();
      int best = 0;
      for (int c = 1; c < ens.checkpoints; ++c)
        if (std::abs(ens.times[static_cast<std::size_t>(c)] - target) <
            std::abs(ens.times[static_cast<std::size_t>(best)] - target))
          best = c;
      if (std::find(idx.begin(), idx.end(), best) == idx.end()) idx.push_back(best);
    }
  }
  std::vector<Eigen::VectorXd> probes = opts.probes;
  if (probes.empty())
    for (int k = 1; k <= 3; ++k) probes.push_back(Eigen::VectorXd::Unit(d, 0) * k);

  const double scale = brownian ? std::sqrt(n) : std::pow(n, 1.0 / model.alpha);
  const auto m = static_cast<std::size_t>(ens.paths);
  rep.pass = true;
  for (int c : idx) {
    CltCheck chk;
    const double tau = ens.times[static_cast<std::size_t>(c)];
    chk.time = tau / n;
    std::vector<Eigen::VectorXd> y(m, Eigen::VectorXd(d));
    for (std::size_t p = 0; p < m; ++p)
      for (int a = 0; a < d; ++a)
        y[p][a] = (ens.position(static_cast<std::int64_t>(p), c, a) - ens.x0[a] - tau * meanF[a]) / scale;
    chk.pass = true;
    if (brownian) {
      chk.covariance.resize(d, d);
      chk.standard_error.resize(d, d);
      chk.reference = chk.time * model.D;
      Eigen::VectorXd mu = Eigen::VectorXd::Zero(d);
      for (const auto& v : y) mu += v;
      mu /= static_cast<double>(m);
      std::vector<double> prod(m);
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) {
          for (std::size_t p = 0; p < m; ++p) prod[p] = (y[p][a] - mu[a]) * (y[p][b] - mu[b]);
          const BatchStat s = batch_stat(prod, opts.batches);
          chk.covariance(a, b) = s.mean * static_cast<double>(m) / static_cast<double>(m - 1);
          chk.standard_error(a, b) = s.se;
          const double ref = chk.reference(a, b);
          if (std::abs(chk.covariance(a, b) - ref) > opts.z_tolerance * s.se + opts.rel_tolerance * std::abs(ref))
            chk.pass = false;
        }
    } else {
      std::vector<double> cs(m), sn(m);
      for (const auto& z : probes) {
        for (std::size_t p = 0; p < m; ++p) {
          const double phase = kTwoPi * z.dot(y[p]);
          cs[p] = std::cos(phase);
          sn[p] = std::sin(phase);
        }
        const BatchStat sc = batch_stat(cs, opts.batches), ss = batch_stat(sn, opts.batches);
        const double ref = std::exp(-chk.time * symbol(model.psi->measure(), z));
        const Complex cf(sc.mean, ss.mean);
        chk.probes.push_back(z);
        chk.cf.push_back(cf);
        chk.cf_reference.push_back(ref);
        chk.cf_error.push_back(std::abs(cf - ref));
        chk.cf_standard_error.push_back(std::hypot(sc.se, ss.se));
        if (chk.cf_error.back() > opts.z_tolerance * chk.cf_standard_error.back() + opts.rel_tolerance * ref)
          chk.pass = false;
      }
    }
    rep.pass = rep.pass && chk.pass;
    rep.checks.push_back(std::move(chk));
  }
  return rep;
}

MartingaleReport martingale_diagnostics(const TrajectoryEnsemble& ens, const Corrector& chi,
                                        const EffectiveModel& model, int batches) {
  if (chi.chi.components() != ens.dim) throw std::invalid_argument("martingale_diagnostics: missing corrector");
  check_batches(ens.paths, batches);
  const int d = ens.dim;
  const int nc = ens.checkpoints;
  const auto m = static_cast<std::size_t>(ens.paths);
  const Eigen::VectorXd meanF = model.mean_F.size() == d ? model.mean_F : Eigen::VectorXd::Zero(d);
  const ModeSum chis(chi.chi);
  std::vector<double> mart(m * static_cast<std::size_t>(nc) * static_cast<std::size_t>(d));
  std::vector<double> chi0(static_cast<std::size_t>(d)), chit(static_cast<std::size_t>(d)), x(static_cast<std::size_t>(d));
  chis.evaluate(ens.x0.data(), chi0.data());
  MartingaleReport rep;
  rep.times = ens.times;
  for (std::size_t p = 0; p < m; ++p) {
    double sup = 0.0;
    for (int c = 0; c < nc; ++c) {
      for (int a = 0; a < d; ++a) x[static_cast<std::size_t>(a)] = ens.position(static_cast<std::int64_t>(p), c, a);
      chis.evaluate(x.data(), chit.data());
      const std::size_t at = ens.at(static_cast<std::int64_t>(p), c);
      double sq = 0.0;
      for (int a = 0; a < d; ++a) {
        const auto ua = static_cast<std::size_t>(a);
        const double v = ens.drift_integral[at + ua] - ens.times[static_cast<std::size_t>(c)] * meanF[a] - chi0[ua] + chit[ua];
        mart[at + ua] = v;
        sq += v * v;
        rep.max_abs = std::max(rep.max_abs, std::abs(v));
      }
      sup = std::max(sup, sq);
    }
    rep.sup_moment += sup;
  }
  rep.sup_moment /= static_cast<double>(m);

  std::vector<double> col(m);
  for (int c = 0; c < nc; ++c)
    for (int a = 0; a < d; ++a) {
      for (std::size_t p = 0; p < m; ++p) col[p] = mart[ens.at(static_cast<std::int64_t>(p), c) + static_cast<std::size_t>(a)];
      const BatchStat s = batch_stat(col, batches);
      if (a == 0) {
        rep.mean.push_back(s.mean);
        rep.standard_error.push_back(s.se);
      }
      if (s.se > 0.0) rep.max_z = std::max(rep.max_z, std::abs(s.mean) / s.se);
    }

  // Lag-1 correlation of consecutive checkpoint increments, component 0.
  std::vector<double> u, v;
  for (std::size_t p = 0; p < m; ++p)
    for (int c = 1; c < nc; ++c) {
      const double cur = mart[ens.at(static_cast<std::int64_t>(p), c)] - mart[ens.at(static_cast<std::int64_t>(p), c - 1)];
      const double prev = c == 1 ? mart[ens.at(static_cast<std::int64_t>(p), 0)]
                                 : mart[ens.at(static_cast<std::int64_t>(p), c - 1)] -
                                       mart[ens.at(static_cast<std::int64_t>(p), c - 2)];
      u.push_back(prev);
      v.push_back(cur);
    }
  if (!u.empty()) {
    const Eigen::Map<Eigen::VectorXd> a(u.data(), static_cast<Index>(u.size())), b(v.data(), static_cast<Index>(v.size()));
    const Eigen::ArrayXd ac = a.array() - a.mean(), bc = b.array() - b.mean();
    const double den = std::sqrt(ac.square().sum() * bc.square().sum());
    rep.autocorrelation = den > 0.0 ? (ac * bc).sum() / den : 0.0;
    rep.autocorrelation_se = 1.0 / std::sqrt(static_cast<double>(u.size()));
  }
  return rep;
}

double log_log_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("log_log_slope: need two aligned points");
  Eigen::ArrayXd lx(static_cast<Index>(x.size())), ly(static_cast<Index>(y.size()));
  for (std::size_t i = 0; i < x.size(); ++i) {
    lx[static_cast<Index>(i)] = std::log(x[i]);
    ly[static_cast<Index>(i)] = std::log(y[i]);
  }
  const Eigen::ArrayXd cx = lx - lx.mean();
  return (cx * (ly - ly.mean())).sum() / cx.square().sum();
}

double ergodic_l2_error(const TrajectoryEnsemble& ens, int checkpoint, double mean) {
  if (ens.observable.empty()) throw std::invalid_argument("ergodic_l2_error: no observable recorded");
  const double t = ens.times.at(static_cast<std::size_t>(checkpoint));
  double s = 0.0;
  for (std::int64_t p = 0; p < ens.paths; ++p) {
    const double e =
        ens.observable[static_cast<std::size_t>(p) * static_cast<std::size_t>(ens.checkpoints) +
                       static_cast<std::size_t>(checkpoint)] / t - mean;
    s += e * e;
  }
  return std::sqrt(s / static_cast<double>(ens.paths));
}

HistogramTest torus_histogram_test(const TrajectoryEnsemble& ens, int checkpoint, const PeriodicField& rho, int bins) {
  if (ens.dim != 1 || rho.grid().dim() != 1) throw std::invalid_argument("torus_histogram_test: d = 1 only");
  const auto& g = rho.grid();
  std::vector<double> expected(static_cast<std::size_t>(bins), 0.0);
  for (int b = 0; b < bins; ++b) {
    const double lo = static_cast<double>(b) / bins, hi = static_cast<double>(b + 1) / bins;
    double mass = rho.coeffs()(0, 0).real() * (hi - lo);
    for (Index i = 1; i < g.size(); ++i) {
      const int k = g.wavevector(i)[0];
      const Complex ik(0.0, kTwoPi * k);
      mass += (rho.coeffs()(i, 0) * (std::exp(ik * hi) - std::exp(ik * lo)) / ik).real();
    }
    expected[static_cast<std::size_t>(b)] = mass * static_cast<double>(ens.paths);
  }
  std::vector<double> observed(static_cast<std::size_t>(bins), 0.0);
  for (std::int64_t p = 0; p < ens.paths; ++p) {
    const double x = ens.position(p, checkpoint, 0);
    const int b = std::min(bins - 1, static_cast<int>((x - std::floor(x)) * bins));
    observed[static_cast<std::size_t>(b)] += 1.0;
  }
  HistogramTest t;
  for (int b = 0; b < bins; ++b) {
    const double e = expected[static_cast<std::size_t>(b)];
    const double o = observed[static_cast<std::size_t>(b)];
    t.statistic += (o - e) * (o - e) / e;
  }
  t.dof = bins - 1;
  const double k = t.dof;
  const double z = (std::cbrt(t.statistic / k) - (1.0 - 2.0 / (9.0 * k))) / std::sqrt(2.0 / (9.0 * k));
  t.p_value = 0.5 * std::erfc(z / std::sqrt(2.0));
  return t;
}

}  // namespace perhom
