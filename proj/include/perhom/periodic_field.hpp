#pragma once

#include <complex>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "perhom/spectral_grid.hpp"

namespace perhom {

using Complex = std::complex<double>;

/// A (vector of) periodic function(s) on T^d = [0,1)^d stored as truncated
/// Fourier coefficients u^(k) = int u(x) e^{-2 pi i k.x} dx, one column per
/// component, rows in the grid's FFT order.
///
/// Real fields keep u^(-k) = conj(u^(k)) and carry no Nyquist modes, so the
/// active lattice of a real field is |k_i| <= N/2 - 1.
class PeriodicField {
 public:
  PeriodicField() = default;
  explicit PeriodicField(GridPtr grid, int components = 1, bool real = true);
  PeriodicField(GridPtr grid, Eigen::MatrixXcd coeffs, bool real);

  static PeriodicField constant(GridPtr grid, double value);
  /// Complex exponential amplitude * e^{2 pi i k.x}.
  static PeriodicField exponential(GridPtr grid, const WaveVector& k, Complex amplitude = 1.0);
  /// Real field from samples on the N^d collocation grid (one column per component).
  static PeriodicField from_values(GridPtr grid, const Eigen::MatrixXd& values);
  /// Vector field assembled from scalar components on one grid.
  static PeriodicField stack(std::span<const PeriodicField> parts);

  const SpectralGrid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  int components() const { return static_cast<int>(coeffs_.cols()); }
  bool is_real() const { return real_; }
  void set_real(bool real) { real_ = real; }

  const Eigen::MatrixXcd& coeffs() const { return coeffs_; }
  Eigen::MatrixXcd& coeffs() { return coeffs_; }
  Complex coeff(const WaveVector& k, int component = 0) const;
  /// Mode-0 coefficient, i.e. the Lebesgue mean of the component.
  Complex mean(int component = 0) const { return coeffs_(0, component); }

  PeriodicField component(int c) const;

  /// Samples on the collocation grid x_m = m / N; real part for real fields.
  Eigen::MatrixXd values() const;
  Eigen::MatrixXcd complex_values() const;
  /// Pointwise evaluation by direct mode summation (x reduced mod 1).
  double evaluate(const Eigen::Ref<const Eigen::VectorXd>& x, int component = 0) const;

  /// max_k |u^(k) - conj(u^(-k))| over non-Nyquist modes plus the Nyquist mass.
  double hermitian_defect() const;
  /// Symmetrizes coefficient pairs and removes Nyquist modes.
  void enforce_hermitian();

  PeriodicField& operator+=(const PeriodicField& other);
  PeriodicField& operator-=(const PeriodicField& other);
  PeriodicField& operator*=(double s);

 private:
  GridPtr grid_;
  Eigen::MatrixXcd coeffs_;
  bool real_ = true;
};

PeriodicField operator+(PeriodicField a, const PeriodicField& b);
PeriodicField operator-(PeriodicField a, const PeriodicField& b);
PeriodicField operator*(double s, PeriodicField a);
PeriodicField operator*(PeriodicField a, double s);

// ---- Spectral helpers --------------------------------------------------------

/// Coefficient-wise multiplier m(k) applied to every component.
PeriodicField apply_multiplier(const PeriodicField& u, const Eigen::ArrayXd& multiplier);

/// Dealiased pointwise product on the 3/2-padded grid, truncated to the lattice.
/// Either operand may be scalar, in which case it multiplies every component.
PeriodicField multiply(const PeriodicField& u, const PeriodicField& v);

/// Sum over components of the componentwise products u_c * v_c (dot product field).
PeriodicField dot(const PeriodicField& u, const PeriodicField& v);

PeriodicField partial_derivative(const PeriodicField& u, int axis);
/// Gradient of a scalar field (d components).
PeriodicField gradient(const PeriodicField& u);
/// Divergence of a d-component vector field.
PeriodicField divergence(const PeriodicField& f);

/// L2(T^d) norm by Parseval; Euclidean over components.
double l2_norm(const PeriodicField& u);
/// L2 inner product int u conj(v) dx summed over components (real part).
double inner_product(const PeriodicField& u, const PeriodicField& v);
/// int u v w dx for real band-limited scalars; exact through padded collocation.
double integrate_triple(const PeriodicField& u, const PeriodicField& v, const PeriodicField& w);

/// Embeds into a finer grid or truncates onto a coarser one (same dimension).
PeriodicField resample(const PeriodicField& u, const GridPtr& target);

/// Samples on an oversampled grid with `factor * N` points per axis.
Eigen::MatrixXd oversampled_values(const PeriodicField& u, int factor);

/// Real scalar field whose coefficients are e^{-2 pi i k.x0}, i.e. the lattice
/// truncation of the Dirac mass at x0.
PeriodicField dirac(GridPtr grid, const Eigen::Ref<const Eigen::VectorXd>& x0);

}  // namespace perhom
