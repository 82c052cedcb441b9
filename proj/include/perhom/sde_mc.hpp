#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "perhom/cell_problem.hpp"
#include "perhom/levy.hpp"
#include "perhom/periodic_field.hpp"
#include "perhom/philox.hpp"

namespace perhom {

/// Sampler of L_dt for an atomic (or pre-discretized uniform) spherical measure.
/// alpha = 2: sqrt(dt) N(0, I), whose characteristic function E e^{2 pi i z.L}
/// is e^{-dt |2 pi z|^2 / 2}. alpha < 2: sum over antipodal pairs (xi, -xi) of
/// weight w of c S xi with c = (2 w dt)^{1/alpha} / (2 pi) and S symmetric
/// alpha-stable with E e^{iuS} = e^{-|u|^alpha} (Chambers-Mallows-Stuck).
class StableSampler {
 public:
  explicit StableSampler(const SphericalMeasure& measure, int quadrature = SphericalMeasure::kDefaultQuadrature);

  int dim() const { return dim_; }
  double alpha() const { return alpha_; }
  /// Adds one increment over dt to out.
  void add_increment(double dt, PhiloxStream& rng, double* out) const;

 private:
  int dim_;
  double alpha_;
  std::vector<Eigen::VectorXd> directions;  // one per antipodal pair
  std::vector<double> scales;                // (2 w)^{1/alpha} / (2 pi)
};

/// Standard symmetric alpha-stable variate, E e^{iuS} = e^{-|u|^alpha}.
double standard_stable(double alpha, PhiloxStream& rng);

Eigen::VectorXd sample_stable_increment(const SphericalMeasure& measure, double dt, PhiloxStream& rng);

/// Direct evaluation of a real band-limited field by summing its nonzero modes.
class ModeSum {
 public:
  explicit ModeSum(const PeriodicField& field, double cutoff = 0.0);
  int components() const { return components_; }
  std::size_t mode_count() const { return modes_.size(); }
  /// out[c] = field_c(x); x need not be reduced.
  void evaluate(const double* x, double* out) const;

 private:
  int dim_;
  int components_;
  int max_k_ = 0;
  std::vector<WaveVector> modes_;        // canonical half, k != 0
  std::vector<Complex> coeffs_;          // 2 u^(k) per mode and component
  std::vector<double> mean_;
};

struct SimConfig {
  Eigen::VectorXd x0;
  double T = 1.0;
  double dt = 1e-3;
  std::int64_t paths = 1000;
  std::uint64_t seed = 0;
  int checkpoints = 64;  // equally spaced in (0, T]
  int threads = 0;       // 0: hardware concurrency
  int level = -1;        // mollification level of the drift, recorded only
  /// Scalar observable b whose time integral int_0^t b(X_s) ds is accumulated.
  std::optional<PeriodicField> observable;
};

/// Checkpoint data per path; layout [path][checkpoint][component].
struct TrajectoryEnsemble {
  int dim = 1;
  std::int64_t paths = 0;
  int checkpoints = 0;
  double dt = 0.0;
  Eigen::VectorXd x0;
  std::vector<double> times;          // checkpoint times
  std::vector<double> drift_integral;  // Z_t = int_0^t F(X_s) ds
  std::vector<double> levy;            // L_t
  std::vector<double> observable;      // int_0^t b(X_s) ds, [path][checkpoint]
  std::uint64_t seed = 0;

  std::size_t at(std::int64_t p, int c) const {
    return (static_cast<std::size_t>(p) * static_cast<std::size_t>(checkpoints) + static_cast<std::size_t>(c)) *
           static_cast<std::size_t>(dim);
  }
  /// X_t = x0 + Z_t + L_t (lifted, not reduced mod 1).
  double position(std::int64_t p, int c, int a) const { return x0[a] + drift_integral[at(p, c) + a] + levy[at(p, c) + a]; }
};

/// Euler scheme X_{n+1} = X_n + F(X_n) dt + dL_n with per-path Philox streams
/// (stream id = path index), so results do not depend on the thread count.
TrajectoryEnsemble simulate_paths(const SimConfig& cfg, const SphericalMeasure& measure, const PeriodicField& drift);

struct CltCheck {
  double time = 0.0;  // rescaled time t = checkpoint time / n
  // Brownian branch
  Eigen::MatrixXd covariance;
  Eigen::MatrixXd reference;  // t D
  Eigen::MatrixXd standard_error;
  // stable branch
  std::vector<Eigen::VectorXd> probes;
  std::vector<Complex> cf;
  std::vector<double> cf_reference;  // e^{-t psi(z)}
  std::vector<double> cf_error;      // |cf - reference|
  std::vector<double> cf_standard_error;
  bool pass = false;
};

struct CltReport {
  enum class Regime { brownian, stable } regime = Regime::brownian;
  double n = 1.0;
  int batches = 0;
  std::vector<CltCheck> checks;
  bool pass = false;
};

struct CltOptions {
  int batches = 50;
  double z_tolerance = 3.0;     // standard errors
  double rel_tolerance = 0.0;   // allowed relative deviation on top
  std::vector<Eigen::VectorXd> probes;  // default: z = 1, 2, 3 along e_1
  std::vector<int> checkpoint_indices;  // default: those at 1/4, 1/2, 1 of the horizon
};

/// Rescaled statistics of X_{nt} - nt <F>_pi: covariance against t D for
/// alpha = 2, empirical characteristic function against e^{-t psi} otherwise.
CltReport clt_statistics(const TrajectoryEnsemble& ens, const EffectiveModel& model, double n,
                         const CltOptions& opts = {});

struct MartingaleReport {
  std::vector<double> times;
  std::vector<double> mean;            // component 0 mean of M_t per checkpoint
  std::vector<double> standard_error;
  double max_z = 0.0;                  // max over checkpoints and components of |mean| / se
  double autocorrelation = 0.0;        // lag-1 correlation of checkpoint increments
  double autocorrelation_se = 0.0;
  double sup_moment = 0.0;             // E max_c |M_{t_c}|^2
  double max_abs = 0.0;                // max |M| over paths and checkpoints
};

/// M_t = X_t - t <F>_pi - X_0 - (chi(X_0) - chi(X_t)) - L_t.
MartingaleReport martingale_diagnostics(const TrajectoryEnsemble& ens, const Corrector& chi,
                                        const EffectiveModel& model, int batches = 50);

/// Least-squares slope of log y against log x.
double log_log_slope(const std::vector<double>& x, const std::vector<double>& y);

/// sqrt(E |(1/t) int_0^t b(X_s) ds - mean|^2) at a checkpoint.
double ergodic_l2_error(const TrajectoryEnsemble& ens, int checkpoint, double mean);

struct HistogramTest {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 0.0;  // Wilson-Hilferty approximation
};
/// Pearson chi-square of the torus-projected first coordinate at a checkpoint
/// against the bin masses of rho (d = 1).
HistogramTest torus_histogram_test(const TrajectoryEnsemble& ens, int checkpoint, const PeriodicField& rho,
                                   int bins = 32);

}  // namespace perhom
