#pragma once

#include <optional>
#include <vector>

#include <Eigen/Core>

#include "perhom/periodic_field.hpp"

namespace perhom {

struct SphericalAtom {
  Eigen::VectorXd direction;  // unit vector in R^d
  double weight = 0.0;
};

/// The pair (alpha, nu): stability index and a finite symmetric measure on
/// S^{d-1}, either atomic or a multiple of the uniform surface measure.
class SphericalMeasure {
 public:
  static SphericalMeasure atomic(double alpha, std::vector<SphericalAtom> atoms);
  static SphericalMeasure uniform(double alpha, int dim, double total_mass);
  /// Uniform measure scaled so that psi(z) = |2 pi z|^alpha (fractional Laplacian).
  static SphericalMeasure fractional_laplacian(double alpha, int dim);

  double alpha() const { return alpha_; }
  int dim() const { return dim_; }
  bool is_uniform() const { return uniform_mass_.has_value(); }
  double total_mass() const;
  /// Atoms as stored, or the equal-weight symmetric quadrature of the uniform measure.
  std::vector<SphericalAtom> atoms(int quadrature_points = kDefaultQuadrature) const;

  static constexpr int kDefaultQuadrature = 64;

 private:
  SphericalMeasure(double alpha, int dim) : alpha_(alpha), dim_(dim) {}
  void validate() const;

  double alpha_;
  int dim_;
  std::vector<SphericalAtom> atoms_;
  std::optional<double> uniform_mass_;
};

/// psi^alpha_nu(z) = int_S |<z, xi>|^alpha nu(dxi); for alpha = 2 the Brownian
/// convention (1/2)|2 pi z|^2 independent of nu.
double symbol(const SphericalMeasure& measure, const Eigen::Ref<const Eigen::VectorXd>& z);

/// psi tabulated on a lattice.
class LevySymbol {
 public:
  LevySymbol(SphericalMeasure measure, GridPtr grid);

  const SphericalMeasure& measure() const { return measure_; }
  const GridPtr& grid_ptr() const { return grid_; }
  const SpectralGrid& grid() const { return *grid_; }
  double alpha() const { return measure_.alpha(); }
  const Eigen::ArrayXd& table() const { return psi_; }
  double operator()(Index i) const { return psi_[i]; }
  /// min_{k != 0} psi(k) over non-Nyquist lattice points.
  double c_gap() const { return c_gap_; }
  /// Extremes of psi(k)/|k|^alpha over the lattice, k != 0.
  double lower_ratio() const { return lower_ratio_; }
  double upper_ratio() const { return upper_ratio_; }
  /// Same measure tabulated on another grid.
  LevySymbol on(GridPtr grid) const { return LevySymbol(measure_, std::move(grid)); }

 private:
  SphericalMeasure measure_;
  GridPtr grid_;
  Eigen::ArrayXd psi_;
  double c_gap_ = 0.0;
  double lower_ratio_ = 0.0;
  double upper_ratio_ = 0.0;
};

/// L u = F^{-1}(psi u^). Positive operator; the generator of the noise is -L.
PeriodicField apply_generator(const LevySymbol& sym, const PeriodicField& u);
/// P_t u = F^{-1}(e^{-t psi} u^), t >= 0.
PeriodicField semigroup(const LevySymbol& sym, const PeriodicField& u, double t);
/// I_lambda u = int_0^inf e^{-lambda t} P_t u dt = F^{-1}(u^ / (lambda + psi)).
PeriodicField resolvent_integral(const LevySymbol& sym, const PeriodicField& u, double lambda);
/// I_inf u = int_0^inf P_t u dt for mean-zero u.
PeriodicField steady_integral(const LevySymbol& sym, const PeriodicField& u);
/// I_t u = int_0^t P_s u ds; multiplier (1 - e^{-t psi})/psi, equal to t at psi = 0.
PeriodicField finite_integral(const LevySymbol& sym, const PeriodicField& u, double t);

/// Time-sampled field path (t_0 < ... < t_n) for Duhamel integrals.
struct FieldPath {
  std::vector<double> times;
  std::vector<PeriodicField> values;
};

/// int_0^t P_{t-s} v_s ds with v piecewise linear in time between samples,
/// integrated exactly per mode (second-order exponential time differencing).
/// Integration starts at times.front().
PeriodicField duhamel(const LevySymbol& sym, const FieldPath& v, double t);

/// phi_1(z) = (e^z - 1)/z and phi_2(z) = (e^z - 1 - z)/z^2, stable near 0.
double etd_phi1(double z);
double etd_phi2(double z);

}  // namespace perhom
