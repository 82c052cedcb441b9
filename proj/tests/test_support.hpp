#pragma once

#include <cmath>
#include <random>

#include "perhom/periodic_field.hpp"

namespace perhom::test {

/// Real random trigonometric polynomial with modes |k_a| <= kmax, unit-variance
/// Gaussian coefficients damped by (1 + |k|)^{-decay}, zero mean unless keep_mean.
inline PeriodicField random_field(const GridPtr& grid, int components, int kmax, std::uint64_t seed,
                                  double decay = 0.0, bool keep_mean = false) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd;
  PeriodicField u(grid, components, false);
  for (int c = 0; c < components; ++c)
    for (Index i = 0; i < grid->size(); ++i) {
      const WaveVector& k = grid->wavevector(i);
      bool inside = !grid->is_nyquist(i);
      for (int a = 0; a < grid->dim(); ++a) inside = inside && std::abs(k[static_cast<std::size_t>(a)]) <= kmax;
      if (!inside) continue;
      const double damp = std::pow(1.0 + grid->radius(i), -decay);
      u.coeffs()(i, c) = damp * Complex(nd(gen), nd(gen));
    }
  u.enforce_hermitian();
  u.set_real(true);
  if (!keep_mean)
    for (int c = 0; c < components; ++c) u.coeffs()(0, c) = 0.0;
  return u;
}

/// Probability density 1 + small random perturbation.
inline PeriodicField random_density(const GridPtr& grid, int kmax, std::uint64_t seed, double amplitude = 0.1) {
  PeriodicField u = random_field(grid, 1, kmax, seed, 2.0);
  const double sup = u.values().cwiseAbs().maxCoeff();
  u *= amplitude / sup;
  u.coeffs()(0, 0) = 1.0;
  return u;
}

}  // namespace perhom::test

#include <numbers>

#include <unsupported/Eigen/MatrixFunctions>

namespace perhom::test {

/// Closed-form symbol in d = 1: (1/2)|2 pi k|^2 for alpha = 2, |2 pi k|^alpha otherwise.
inline double psi_1d(double alpha, int k) {
  const double z = 2.0 * std::numbers::pi * std::abs(k);
  return alpha == 2.0 ? 0.5 * z * z : std::pow(z, alpha);
}

/// Galerkin matrices on the modes -(N/2-1)..N/2-1 of a 1D real drift, assembled
/// from the drift coefficients by explicit convolution.
struct DenseGalerkin1d {
  int half = 0;  // N/2 - 1
  Eigen::MatrixXcd forward;   // rho -> -L rho - (F rho)'
  Eigen::MatrixXcd backward;  // u -> -L u + F u'

  Index row(int k) const { return k + half; }

  DenseGalerkin1d(const PeriodicField& F, double alpha) {
    const int n = F.grid().modes();
    half = n / 2 - 1;
    const Index m = 2 * half + 1;
    forward = Eigen::MatrixXcd::Zero(m, m);
    backward = Eigen::MatrixXcd::Zero(m, m);
    for (int k = -half; k <= half; ++k) {
      forward(row(k), row(k)) -= psi_1d(alpha, k);
      backward(row(k), row(k)) -= psi_1d(alpha, k);
      for (int l = -half; l <= half; ++l) {
        const int d = k - l;
        if (std::abs(d) > half) continue;
        const Complex f = F.coeff({d, 0, 0});
        forward(row(k), row(l)) -= Complex(0.0, 2.0 * std::numbers::pi * k) * f;
        backward(row(k), row(l)) += f * Complex(0.0, 2.0 * std::numbers::pi * l);
      }
    }
  }

  Eigen::VectorXcd pack(const PeriodicField& u) const {
    Eigen::VectorXcd v(2 * half + 1);
    for (int k = -half; k <= half; ++k) v[row(k)] = u.coeff({k, 0, 0});
    return v;
  }

  PeriodicField unpack(const GridPtr& grid, const Eigen::VectorXcd& v) const {
    PeriodicField u(grid, 1, true);
    for (int k = -half; k <= half; ++k) u.coeffs()(grid->index_of({k, 0, 0}), 0) = v[row(k)];
    return u;
  }

  static Eigen::VectorXcd propagate(const Eigen::MatrixXcd& a, const Eigen::VectorXcd& v, double t) {
    const Eigen::MatrixXcd at = a * t;
    return at.exp() * v;
  }
};

}  // namespace perhom::test
