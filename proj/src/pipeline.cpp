#include "perhom/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "perhom/besov.hpp"
#include "perhom/errors.hpp"
#include "perhom/fokker_planck.hpp"
#include "perhom/sde_mc.hpp"
#include "perhom/serialization.hpp"
#include "perhom/time_stepping.hpp"

namespace perhom {

namespace fs = std::filesystem;
using nlohmann::json;

std::optional<std::string> admissibility_violation(double alpha, double beta) {
  std::ostringstream os;
  os << std::setprecision(6);
  if (!(alpha > 1.0)) {
    os << "alpha <= 1 (alpha = " << alpha << ")";
    return os.str();
  }
  if (!(alpha <= 2.0)) {
    os << "alpha > 2 (alpha = " << alpha << ")";
    return os.str();
  }
  const double lower = (2.0 - 2.0 * alpha) / 3.0;
  if (!(beta > lower)) {
    os << "beta <= (2-2alpha)/3 (beta = " << beta << ", (2-2alpha)/3 = " << lower << ")";
    return os.str();
  }
  if (!(beta < 0.0)) {
    os << "beta >= 0 (beta = " << beta << ")";
    return os.str();
  }
  return std::nullopt;
}

namespace {

/// a cos(2 pi k.x) + b sin(2 pi k.x) as a real scalar field.
PeriodicField trig(const GridPtr& grid, const WaveVector& k, double a, double b) {
  DriftSpec spec;
  spec.kind = DriftSpec::Kind::gradient_of;
  spec.dim = grid->dim();
  spec.terms.push_back({k, 0, a, b});
  return build_potential(spec, grid);
}

const std::set<std::string> kSubcommands{"enhance", "invariant", "corrector", "diffusivity", "gap", "clt", "pde", "all"};

[[noreturn]] void schema_error(const std::string& path, const std::string& what) {
  throw std::invalid_argument("config " + path + ": " + what);
}

void allow_keys(const json& j, const std::string& path, const std::set<std::string>& keys) {
  if (!j.is_object()) schema_error(path, "expected an object");
  for (const auto& [key, value] : j.items())
    if (!keys.count(key)) schema_error(path + "." + key, "unknown key");
}

template <class T>
void read(const json& j, const std::string& path, const char* key, T& out) {
  if (!j.contains(key)) return;
  const json& v = j.at(key);
  const std::string at = path + "." + key;
  if constexpr (std::is_same_v<T, std::string>) {
    if (!v.is_string()) schema_error(at, "expected a string");
  } else if constexpr (std::is_same_v<T, bool>) {
    if (!v.is_boolean()) schema_error(at, "expected a boolean");
  } else if constexpr (std::is_integral_v<T>) {
    if (!v.is_number_integer()) schema_error(at, "expected an integer");
    if constexpr (std::is_unsigned_v<T>)
      if (v.is_number_integer() && !v.is_number_unsigned()) schema_error(at, "expected a non-negative integer");
  } else if constexpr (std::is_floating_point_v<T>) {
    if (!v.is_number()) schema_error(at, "expected a number");
  } else {
    if (!v.is_array()) schema_error(at, "expected an array");
    for (const auto& e : v)
      if (!e.is_number()) schema_error(at, "expected an array of numbers");
  }
  out = v.get<T>();
}

void require_positive(double v, const std::string& path) {
  if (!(v > 0.0) || !std::isfinite(v)) schema_error(path, "must be positive");
}

DriftSpec parse_drift(const json& j, int dim, std::uint64_t seed) {
  allow_keys(j, "drift", {"kind", "terms", "seed", "regularity_target", "amplitude", "centered"});
  if (!j.contains("kind") || !j.at("kind").is_string()) schema_error("drift.kind", "required string");
  if (j.contains("terms")) {
    if (!j.at("terms").is_array()) schema_error("drift.terms", "expected an array");
    for (std::size_t i = 0; i < j.at("terms").size(); ++i) {
      const auto& t = j.at("terms")[i];
      const std::string at = "drift.terms[" + std::to_string(i) + "]";
      allow_keys(t, at, {"k", "component", "cos", "sin"});
      if (!t.contains("k") || !t.at("k").is_array()) schema_error(at + ".k", "required integer array");
      int component = 0;
      read(t, at, "component", component);
      if (component < 0 || component >= dim) schema_error(at + ".component", "out of range");
      double c = 0.0;
      read(t, at, "cos", c);
      read(t, at, "sin", c);
    }
  }
  json patched = j;
  if (!patched.contains("seed")) patched["seed"] = seed;
  return drift_spec_from_json(patched, dim);
}

std::vector<double> read_numbers(const json& j, const std::string& path, const char* key, std::vector<double> def) {
  read(j, path, key, def);
  return def;
}

void write_csv(const fs::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
  os << "\n" << std::setprecision(17);
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
    os << "\n";
  }
}

json to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json r = json::array();
    for (Index j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
    rows.push_back(r);
  }
  return rows;
}

json to_json(const Eigen::VectorXd& v) {
  return json(std::vector<double>(v.data(), v.data() + v.size()));
}

}  // namespace

ExperimentConfig parse_config(const json& j) {
  allow_keys(j, "", {"subcommand", "dimension", "N", "alpha", "beta", "gamma", "measure", "drift", "seed", "threads",
                     "mc", "pde", "gap", "tolerances", "out"});
  ExperimentConfig c;
  read(j, "", "subcommand", c.subcommand);
  if (!kSubcommands.count(c.subcommand)) schema_error(".subcommand", "unknown subcommand '" + c.subcommand + "'");
  read(j, "", "dimension", c.dim);
  if (c.dim < 1 || c.dim > 3) schema_error(".dimension", "must be 1, 2 or 3");
  read(j, "", "N", c.N);
  if (c.N < 8 || (c.N & (c.N - 1)) != 0) schema_error(".N", "must be a power of two >= 8");
  read(j, "", "alpha", c.alpha);
  read(j, "", "beta", c.beta);
  if (j.contains("gamma")) {
    double g = 0.0;
    read(j, "", "gamma", g);
    c.gamma = g;
  }
  if (auto bad = admissibility_violation(c.alpha, c.beta)) throw std::invalid_argument("inadmissible parameters: " + *bad);
  read(j, "", "seed", c.seed);
  read(j, "", "threads", c.threads);
  if (c.threads < 0) schema_error(".threads", "must be non-negative");
  read(j, "", "out", c.out);
  if (j.contains("measure")) {
    c.measure = j.at("measure");
    allow_keys(c.measure, "measure", {"alpha", "atoms", "uniform", "fractional_laplacian"});
    c.measure["alpha"] = c.alpha;
    measure_from_json(c.measure, c.dim);
  }
  if (j.contains("drift")) {
    c.drift = parse_drift(j.at("drift"), c.dim, c.seed);
  } else {
    c.drift.dim = c.dim;
  }
  if (j.contains("mc")) {
    const auto& m = j.at("mc");
    allow_keys(m, "mc", {"paths", "dt", "t", "n", "checkpoints", "batches", "level_paths"});
    read(m, "mc", "paths", c.mc.paths);
    read(m, "mc", "dt", c.mc.dt);
    read(m, "mc", "t", c.mc.t);
    c.mc.n = read_numbers(m, "mc", "n", c.mc.n);
    read(m, "mc", "checkpoints", c.mc.checkpoints);
    read(m, "mc", "batches", c.mc.batches);
    read(m, "mc", "level_paths", c.mc.level_paths);
  }
  require_positive(c.mc.dt, "mc.dt");
  require_positive(c.mc.t, "mc.t");
  if (c.mc.paths < 1000) schema_error("mc.paths", "must be at least 1000");
  if (c.mc.batches < 30) schema_error("mc.batches", "must be at least 30");
  if (c.mc.checkpoints < 4) schema_error("mc.checkpoints", "must be at least 4");
  if (c.mc.n.empty()) schema_error("mc.n", "must not be empty");
  for (double n : c.mc.n) require_positive(n, "mc.n");
  if (j.contains("pde")) {
    const auto& p = j.at("pde");
    allow_keys(p, "pde", {"epsilons", "t", "steps"});
    c.pde.epsilons = read_numbers(p, "pde", "epsilons", c.pde.epsilons);
    read(p, "pde", "t", c.pde.t);
    read(p, "pde", "steps", c.pde.steps);
  }
  require_positive(c.pde.t, "pde.t");
  for (double e : c.pde.epsilons) {
    const double inv = 1.0 / e;
    const auto m = static_cast<int>(std::lround(inv));
    if (!(e > 0.0) || std::abs(inv - m) > 1e-12 || (m & (m - 1)) != 0)
      schema_error("pde.epsilons", "each epsilon must be 1/2^k");
  }
  if (j.contains("gap")) {
    const auto& g = j.at("gap");
    allow_keys(g, "gap", {"horizon", "steps"});
    read(g, "gap", "horizon", c.gap.horizon);
    read(g, "gap", "steps", c.gap.steps);
  }
  if (j.contains("tolerances")) {
    const auto& t = j.at("tolerances");
    allow_keys(t, "tolerances", {"mass", "invariant_change", "invariant_residual", "dense_difference", "resolvent",
                                 "resolvent_residual", "poisson", "poisson_residual", "mean_zero", "clt_z"});
    read(t, "tolerances", "mass", c.tol.mass);
    read(t, "tolerances", "invariant_change", c.tol.invariant_change);
    read(t, "tolerances", "invariant_residual", c.tol.invariant_residual);
    read(t, "tolerances", "dense_difference", c.tol.dense_difference);
    read(t, "tolerances", "resolvent", c.tol.resolvent);
    read(t, "tolerances", "resolvent_residual", c.tol.resolvent_residual);
    read(t, "tolerances", "poisson", c.tol.poisson);
    read(t, "tolerances", "poisson_residual", c.tol.poisson_residual);
    read(t, "tolerances", "mean_zero", c.tol.mean_zero);
    read(t, "tolerances", "clt_z", c.tol.clt_z);
  }
  c.source = j.dump();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::invalid_argument("cannot open config " + path);
  std::stringstream buf;
  buf << is.rdbuf();
  json j;
  try {
    j = json::parse(buf.str());
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("config " + path + " is not valid JSON: " + e.what());
  }
  ExperimentConfig c = parse_config(j);
  c.source = buf.str();
  return c;
}

json config_to_json(const ExperimentConfig& c) {
  json j;
  j["subcommand"] = c.subcommand;
  j["dimension"] = c.dim;
  j["N"] = c.N;
  j["alpha"] = c.alpha;
  j["beta"] = c.beta;
  j["gamma"] = c.gamma.value_or(2.0 * c.beta + c.alpha - 1.0);
  if (!c.measure.is_null()) j["measure"] = c.measure;
  j["drift"] = drift_spec_to_json(c.drift);
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  j["mc"] = {{"paths", c.mc.paths}, {"dt", c.mc.dt}, {"t", c.mc.t}, {"n", c.mc.n},
             {"checkpoints", c.mc.checkpoints}, {"batches", c.mc.batches}, {"level_paths", c.mc.level_paths}};
  j["pde"] = {{"epsilons", c.pde.epsilons}, {"t", c.pde.t}, {"steps", c.pde.steps}};
  j["gap"] = {{"horizon", c.gap.horizon}, {"steps", c.gap.steps}};
  j["tolerances"] = {{"mass", c.tol.mass},
                     {"invariant_change", c.tol.invariant_change},
                     {"invariant_residual", c.tol.invariant_residual},
                     {"dense_difference", c.tol.dense_difference},
                     {"resolvent", c.tol.resolvent},
                     {"resolvent_residual", c.tol.resolvent_residual},
                     {"poisson", c.tol.poisson},
                     {"poisson_residual", c.tol.poisson_residual},
                     {"mean_zero", c.tol.mean_zero},
                     {"clt_z", c.tol.clt_z}};
  j["out"] = c.out;
  return j;
}

std::vector<Eigen::VectorXd> pde_probe_points(int dim) {
  // Weyl sequence with irrational steps per axis, shifted off x = 0.
  static constexpr double kSteps[3] = {0.6180339887498949, 0.4142135623730950, 0.7320508075688772};
  std::vector<Eigen::VectorXd> out;
  for (int j = 0; j < 8; ++j) {
    Eigen::VectorXd x(dim);
    for (int a = 0; a < dim; ++a) {
      const double v = 0.0371 * (a + 1) + (j + 0.5) * kSteps[a];
      x[a] = v - std::floor(v);
    }
    out.push_back(x);
  }
  return out;
}

PdeTable pde_homogenization_experiment(const PeriodicField& drift, const SphericalMeasure& measure, double beta,
                                       double gamma, const EffectiveModel& model, const PdeSettings& settings,
                                       double mean_tolerance) {
  const double mean_norm = model.mean_F.size() ? model.mean_F.cwiseAbs().maxCoeff() : 0.0;
  if (!(mean_norm <= mean_tolerance)) {
    std::ostringstream os;
    os << "pde_homogenization_experiment: |<F>_pi| = " << mean_norm << " exceeds " << mean_tolerance
       << "; the homogenization limit requires a centered drift";
    throw std::invalid_argument(os.str());
  }
  const int d = drift.grid().dim();
  const int n = drift.grid().modes();
  const double alpha = measure.alpha();
  PdeTable table;
  table.t = settings.t;
  table.probes = pde_probe_points(d);
  if (alpha >= 2.0) {
    if (model.D.rows() != d) throw std::invalid_argument("pde_homogenization_experiment: missing D");
    table.decay_rate = 0.5 * model.D(0, 0) * 4.0 * M_PI * M_PI;
  } else {
    Eigen::VectorXd e1 = Eigen::VectorXd::Zero(d);
    e1[0] = 1.0;
    table.decay_rate = symbol(measure, e1);
  }
  const double decay = std::exp(-settings.t * table.decay_rate);
  for (double eps : settings.epsilons) {
    const int m = static_cast<int>(std::lround(1.0 / eps));
    const GridPtr fine = make_grid(d, n * m);
    const LevySymbol sym(measure, fine);
    PeriodicField f_eps(fine, d, true);
    const double scale = std::pow(eps, 1.0 - alpha);
    const auto& coarse = drift.grid();
    for (Index i = 0; i < coarse.size(); ++i) {
      const WaveVector& k = coarse.wavevector(i);
      const WaveVector km{k[0] * m, k[1] * m, k[2] * m};
      const Index at = fine->index_of(km);
      for (int c = 0; c < d; ++c) f_eps.coeffs()(at, c) = scale * drift.coeffs()(i, c);
    }
    const EnhancedDrift enhanced = enhance(f_eps, sym, beta, gamma);
    const DriftOperator op(enhanced, sym);
    const int steps = std::max(settings.steps, stable_step_count(sym, op.sup_norm(), settings.t, settings.steps));
    const PeriodicField f = trig(fine, WaveVector{1, 0, 0}, 0.0, 1.0);
    EvolutionOptions eo;
    eo.record_every = steps;
    const DensityPath path = solve_backward_kolmogorov(enhanced, sym, f, settings.t, steps, eo);
    const PeriodicField& u = path.states.front().value;
    double err = 0.0;
    for (const auto& x : table.probes) {
      const double limit = decay * std::sin(2.0 * M_PI * x[0]);
      err = std::max(err, std::abs(u.evaluate(x) - limit));
    }
    table.rows.push_back({eps, n * m, steps, err});
  }
  return table;
}

namespace {

class Runner {
 public:
  explicit Runner(const ExperimentConfig& cfg) : cfg_(cfg) {}

  PipelineResult run();

 private:
  void stage(const std::string& name, const std::function<void()>& body);
  void check(const std::string& stage, const std::string& name, double value, double limit, bool pass);

  void do_enhance();
  void do_invariant();
  void do_corrector();
  void do_diffusivity();
  void do_gap();
  void do_clt();
  void do_pde();

  const ExperimentConfig& cfg_;
  fs::path out_;
  json report_;
  std::vector<CheckResult> checks_;

  GridPtr grid_;
  std::optional<SphericalMeasure> measure_;
  std::optional<LevySymbol> sym_;
  std::optional<EnhancedDrift> drift_;
  std::optional<InvariantDensity> inv_;
  std::optional<Corrector> chi_;
  std::optional<EffectiveModel> model_;
};

void Runner::check(const std::string& stage, const std::string& name, double value, double limit, bool pass) {
  checks_.push_back({stage, name, value, limit, pass});
}

void Runner::stage(const std::string& name, const std::function<void()>& body) {
  const auto start = std::chrono::steady_clock::now();
  try {
    body();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  report_["stages"][name]["seconds"] = secs;
}

void Runner::do_enhance() {
  grid_ = make_grid(cfg_.dim, cfg_.N);
  measure_ = cfg_.measure.is_null() ? SphericalMeasure::fractional_laplacian(cfg_.alpha, cfg_.dim)
                                    : measure_from_json(cfg_.measure, cfg_.dim);
  sym_.emplace(*measure_, grid_);
  const PeriodicField field = build_drift(cfg_.drift, grid_);
  const double gamma = cfg_.gamma.value_or(2.0 * cfg_.beta + cfg_.alpha - 1.0);
  drift_ = enhance(field, *sym_, cfg_.beta, gamma);
  save_field((out_ / "fields" / "drift.bin").string(), field);

  std::vector<std::vector<double>> rows;
  for (std::size_t m = 0; m < drift_->ladder.size(); ++m)
    rows.push_back({static_cast<double>(m), holder2_norm(drift_->ladder[m] - field, cfg_.beta - 0.05)});
  write_csv(out_ / "tables" / "ladder.csv", {"level", "distance_C_beta_minus_2"}, rows);

  double enh = 0.0;
  for (const auto& e : drift_->enhancement) enh = std::max(enh, holder2_norm(e, 2.0 * cfg_.beta + cfg_.alpha - 1.0));
  json& s = report_["stages"]["enhance"];
  s["regime"] = drift_->regime == Regime::young ? "young" : "rough";
  s["drift_norm_C_beta_2"] = holder2_norm(field, cfg_.beta);
  s["enhancement_norm"] = enh;
  s["j_max"] = grid_->j_max();
  s["c_gap"] = sym_->c_gap();
}

void Runner::do_invariant() {
  InvariantOptions io;
  io.tolerance = cfg_.tol.invariant_change;
  inv_ = invariant_density(*drift_, *sym_, io);
  save_field((out_ / "fields" / "rho.bin").string(), inv_->rho);
  const MeanUnderPi mean = mean_under_pi(*drift_, *sym_, *inv_);
  json& s = report_["stages"]["invariant"];
  s["min_value"] = inv_->min_value;
  s["argmin"] = to_json(inv_->argmin);
  s["residual"] = inv_->residual;
  s["iterations"] = inv_->iterations;
  s["last_change"] = inv_->last_change;
  s["mean_F"] = to_json(mean.value);
  s["mean_F_direct_difference"] = mean.difference;
  if (inv_->dense_difference) s["dense_difference"] = *inv_->dense_difference;
  check("invariant", "min_rho_positive", inv_->min_value, 0.0, inv_->min_value > 0.0);
  check("invariant", "mass", std::abs(inv_->rho.mean().real() - 1.0), cfg_.tol.mass,
        std::abs(inv_->rho.mean().real() - 1.0) <= cfg_.tol.mass);
  check("invariant", "stationary_residual", inv_->residual, cfg_.tol.invariant_residual,
        inv_->residual <= cfg_.tol.invariant_residual);
  if (inv_->dense_difference)
    check("invariant", "dense_null_vector", *inv_->dense_difference, cfg_.tol.dense_difference,
          *inv_->dense_difference <= cfg_.tol.dense_difference);
}

void Runner::do_corrector() {
  PoissonOptions po;
  po.tolerance = cfg_.tol.poisson;
  chi_ = solve_poisson(*drift_, *sym_, *inv_, po);
  save_field((out_ / "fields" / "chi.bin").string(), chi_->chi);
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < chi_->ladder_levels.size(); ++i)
    rows.push_back({static_cast<double>(chi_->ladder_levels[i]), chi_->ladder_errors[i]});
  write_csv(out_ / "tables" / "corrector_ladder.csv", {"level", "l2_pi_error"}, rows);
  json& s = report_["stages"]["corrector"];
  s["lambda"] = chi_->lambda_used;
  s["residual"] = chi_->residual_norm;
  s["outer_iterations"] = chi_->outer_iterations;
  s["pi_means"] = to_json(chi_->pi_means);
  s["l2_pi_norm"] = l2_pi_norm(chi_->chi, inv_->rho);
  check("corrector", "poisson_residual", chi_->residual_norm, cfg_.tol.poisson_residual,
        chi_->residual_norm <= cfg_.tol.poisson_residual);
}

void Runner::do_diffusivity() {
  json& s = report_["stages"]["diffusivity"];
  if (cfg_.alpha >= 2.0) {
    model_ = effective_diffusivity(*chi_, *inv_, *sym_);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(model_->D);
    const double lo = es.eigenvalues().minCoeff();
    s["D"] = to_json(model_->D);
    s["D_eigenvalues"] = to_json(Eigen::VectorXd(es.eigenvalues()));
    check("diffusivity", "D_positive_definite", lo, 0.0, lo > 0.0);
    if (cfg_.dim == 1 && std::abs(drift_->field.mean().real()) <= 1e-12)
      check("diffusivity", "D_at_most_one", model_->D(0, 0), 1.0, model_->D(0, 0) <= 1.0 + 1e-12);
  } else {
    model_ = stable_limit_model(*chi_, *sym_);
    Eigen::VectorXd e1 = Eigen::VectorXd::Zero(cfg_.dim);
    e1[0] = 1.0;
    s["psi_e1"] = symbol(*measure_, e1);
    s["limit"] = "stable";
  }
  s["mean_F"] = to_json(model_->mean_F);
}

void Runner::do_gap() {
  std::vector<PeriodicField> probes;
  for (int a = 0; a < cfg_.dim; ++a) {
    WaveVector k{0, 0, 0};
    k[static_cast<std::size_t>(a)] = 1;
    probes.push_back(trig(grid_, k, 1.0, 0.0));
    probes.push_back(trig(grid_, k, 0.0, 1.0));
  }
  const double horizon = cfg_.gap.horizon > 0.0 ? cfg_.gap.horizon : 25.0 / sym_->c_gap();
  const GapEstimate gap = spectral_gap_estimate(*drift_, *sym_, *inv_, probes, horizon, cfg_.gap.steps);
  if (model_) model_->gap_rate = gap.rate;
  json& s = report_["stages"]["gap"];
  s["rate"] = gap.rate;
  s["probe_rates"] = gap.probe_rates;
  s["fitted_points"] = gap.fitted_points;
  s["c_gap"] = sym_->c_gap();
  s["horizon"] = horizon;
  check("gap", "rate_positive", gap.rate, 0.0, gap.rate > 0.0);
}

void Runner::do_clt() {
  json& s = report_["stages"]["clt"];
  const PeriodicField& field = drift_->field;
  std::vector<std::vector<double>> rows;
  std::vector<double> ns, sup_moments;
  for (std::size_t i = 0; i < cfg_.mc.n.size(); ++i) {
    const double n = cfg_.mc.n[i];
    SimConfig sc;
    sc.x0 = Eigen::VectorXd::Zero(cfg_.dim);
    sc.T = n * cfg_.mc.t;
    sc.dt = cfg_.mc.dt;
    sc.paths = cfg_.mc.paths;
    sc.seed = cfg_.seed + 0x9e3779b97f4a7c15ULL * (i + 1);
    sc.checkpoints = cfg_.mc.checkpoints;
    sc.threads = cfg_.threads;
    sc.level = grid_->j_max();
    const TrajectoryEnsemble ens = simulate_paths(sc, *measure_, field);
    CltOptions co;
    co.batches = cfg_.mc.batches;
    co.z_tolerance = cfg_.tol.clt_z;
    const CltReport clt = clt_statistics(ens, *model_, n, co);
    const MartingaleReport mart = martingale_diagnostics(ens, *chi_, *model_, cfg_.mc.batches);
    json entry;
    entry["n"] = n;
    entry["pass"] = clt.pass;
    entry["martingale_max_z"] = mart.max_z;
    entry["martingale_autocorrelation"] = mart.autocorrelation;
    entry["martingale_autocorrelation_se"] = mart.autocorrelation_se;
    entry["martingale_sup_moment"] = mart.sup_moment;
    for (const auto& c : clt.checks) {
      json cj;
      cj["t"] = c.time;
      cj["pass"] = c.pass;
      if (clt.regime == CltReport::Regime::brownian) {
        cj["covariance"] = to_json(c.covariance);
        cj["reference"] = to_json(c.reference);
        cj["standard_error"] = to_json(c.standard_error);
        rows.push_back({n, c.time, c.covariance(0, 0), c.reference(0, 0), c.standard_error(0, 0)});
      } else {
        cj["cf_error"] = c.cf_error;
        cj["cf_standard_error"] = c.cf_standard_error;
        for (std::size_t p = 0; p < c.probes.size(); ++p)
          rows.push_back({n, c.time, c.probes[p][0], std::real(c.cf[p]), c.cf_reference[p], c.cf_error[p],
                          c.cf_standard_error[p]});
      }
      entry["checks"].push_back(cj);
    }
    s["runs"].push_back(entry);
    check("clt", "limit_law_n" + std::to_string(static_cast<long long>(n)), 0.0, cfg_.tol.clt_z, clt.pass);
    check("clt", "martingale_mean_n" + std::to_string(static_cast<long long>(n)), mart.max_z, cfg_.tol.clt_z,
          mart.max_z <= cfg_.tol.clt_z);
    ns.push_back(n);
    sup_moments.push_back(mart.sup_moment);
  }
  if (cfg_.alpha >= 2.0)
    write_csv(out_ / "tables" / "clt.csv", {"n", "t", "variance", "reference", "standard_error"}, rows);
  else
    write_csv(out_ / "tables" / "clt.csv", {"n", "t", "z", "cf_real", "reference", "error", "standard_error"}, rows);
  if (cfg_.alpha < 2.0 && ns.size() >= 3) {
    const double slope = log_log_slope(ns, sup_moments);
    s["martingale_slope"] = slope;
    check("clt", "martingale_scaling_slope", slope, 1.0, slope > 0.7 && slope < 1.3);
  }

  // Mollification levels j_max - 1 and j_max on common streams.
  if (grid_->j_max() >= 1 && cfg_.mc.level_paths >= 1000) {
    SimConfig sc;
    sc.x0 = Eigen::VectorXd::Zero(cfg_.dim);
    sc.T = cfg_.mc.n.front() * cfg_.mc.t;
    sc.dt = cfg_.mc.dt;
    sc.paths = cfg_.mc.level_paths;
    sc.seed = cfg_.seed;
    sc.checkpoints = 4;
    sc.threads = cfg_.threads;
    double diff = 0.0;
    std::vector<double> means;
    for (int level : {grid_->j_max() - 1, grid_->j_max()}) {
      sc.level = level;
      const TrajectoryEnsemble ens = simulate_paths(sc, *measure_, mollify(field, level));
      double m = 0.0;
      for (std::int64_t p = 0; p < ens.paths; ++p) m += ens.drift_integral[ens.at(p, ens.checkpoints - 1)];
      means.push_back(m / static_cast<double>(ens.paths));
    }
    diff = std::abs(means[1] - means[0]);
    s["level_difference_mean_Z"] = diff;
  }
}

void Runner::do_pde() {
  const double gamma = cfg_.gamma.value_or(2.0 * cfg_.beta + cfg_.alpha - 1.0);
  const PdeTable table =
      pde_homogenization_experiment(drift_->field, *measure_, cfg_.beta, gamma, *model_, cfg_.pde, cfg_.tol.mean_zero);
  std::vector<std::vector<double>> rows;
  json& s = report_["stages"]["pde"];
  for (const auto& r : table.rows) {
    rows.push_back({r.epsilon, static_cast<double>(r.modes), static_cast<double>(r.steps), r.error});
    s["errors"].push_back(r.error);
  }
  s["epsilons"] = cfg_.pde.epsilons;
  s["decay_rate"] = table.decay_rate;
  write_csv(out_ / "tables" / "pde.csv", {"epsilon", "modes", "steps", "max_probe_error"}, rows);
  for (std::size_t i = 1; i < table.rows.size(); ++i)
    check("pde", "error_non_increasing_" + std::to_string(i), table.rows[i].error, table.rows[i - 1].error,
          table.rows[i].error <= table.rows[i - 1].error + 1e-12);
}

PipelineResult Runner::run() {
  out_ = cfg_.out;
  fs::create_directories(out_ / "tables");
  fs::create_directories(out_ / "fields");
  report_["config"] = config_to_json(cfg_);
  report_["input_hash"] = content_hash(cfg_.source.empty() ? report_["config"].dump() : cfg_.source);

  const std::string& sub = cfg_.subcommand;
  const bool all = sub == "all";
  const bool want_clt = all || sub == "clt";
  const bool want_pde = all || sub == "pde";
  const bool want_gap = all || sub == "gap";
  const bool want_diff = all || sub == "diffusivity" || want_clt || want_pde;
  const bool want_chi = want_diff || sub == "corrector";
  const bool want_inv = want_chi || want_gap || sub == "invariant";

  std::optional<StageError> failure;
  try {
    stage("enhance", [&] { do_enhance(); });
    if (want_inv) stage("invariant", [&] { do_invariant(); });
    if (want_chi) stage("corrector", [&] { do_corrector(); });
    if (want_diff) stage("diffusivity", [&] { do_diffusivity(); });
    if (want_gap) stage("gap", [&] { do_gap(); });
    if (want_clt) stage("clt", [&] { do_clt(); });
    if (want_pde) stage("pde", [&] { do_pde(); });
  } catch (const StageError& e) {
    failure = e;
    report_["error"] = {{"stage", e.stage}, {"message", e.what()}};
  }

  PipelineResult result;
  result.checks = checks_;
  for (const auto& c : checks_) {
    report_["checks"].push_back({{"stage", c.stage}, {"name", c.name}, {"value", c.value}, {"limit", c.limit},
                                 {"pass", c.pass}});
    result.pass = result.pass && c.pass;
  }
  result.pass = result.pass && !failure;
  report_["pass"] = result.pass;
  std::ofstream os(out_ / "report.json");
  os << std::setw(2) << report_ << "\n";
  os.close();
  result.report = report_;
  if (failure) throw *failure;
  return result;
}

}  // namespace

PipelineResult run_pipeline(const ExperimentConfig& cfg) { return Runner(cfg).run(); }

}  // namespace perhom
