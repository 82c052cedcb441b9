#include "perhom/besov.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace perhom {

namespace {

bool is_inf(double v) { return std::isinf(v) && v > 0; }

double block_lp_norm(const PeriodicField& block, double p) {
  if (p == 2.0) return l2_norm(block);
  const Eigen::VectorXd modulus = block.complex_values().rowwise().norm();
  if (is_inf(p)) return modulus.maxCoeff();
  return modulus.mean();
}

double unit_sphere_area(int d) {
  switch (d) {
    case 1: return 2.0;
    case 2: return 2.0 * std::numbers::pi;
    default: return 4.0 * std::numbers::pi;
  }
}

double unit_ball_volume(int d) {
  switch (d) {
    case 1: return 2.0;
    case 2: return std::numbers::pi;
    default: return 4.0 * std::numbers::pi / 3.0;
  }
}

}  // namespace

PeriodicField lp_block(const PeriodicField& u, int j) {
  if (j < -1 || j > u.grid().j_max())
    throw std::out_of_range("lp_block: block index " + std::to_string(j) + " outside [-1, " +
                            std::to_string(u.grid().j_max()) + "]");
  return apply_multiplier(u, u.grid().partition(j));
}

double besov_norm(const PeriodicField& u, double theta, double p, double q) {
  if (!(p == 1.0 || p == 2.0 || is_inf(p))) throw std::invalid_argument("besov_norm: p must be 1, 2 or inf");
  if (!(q == 2.0 || is_inf(q))) throw std::invalid_argument("besov_norm: q must be 2 or inf");
  double acc = 0.0;
  for (int j = -1; j <= u.grid().j_max(); ++j) {
    const double term = std::exp2(j * theta) * block_lp_norm(lp_block(u, j), p);
    acc = is_inf(q) ? std::max(acc, term) : acc + term * term;
  }
  return is_inf(q) ? acc : std::sqrt(acc);
}

double homogeneous_norm(const PeriodicField& u, double s, HomogeneousKind kind) {
  const auto& g = u.grid();
  const Eigen::ArrayXd power = u.coeffs().rowwise().squaredNorm().array();

  if (kind == HomogeneousKind::sobolev || s == 1.0) {
    double acc = 0.0;
    for (Index i = 1; i < g.size(); ++i) acc += std::pow(g.radius(i), 2.0 * s) * power[i];
    return acc;
  }
  if (!(s > 0.0 && s < 1.0)) throw std::invalid_argument("homogeneous_norm: besov_22 needs s in (0, 1]");

  const int d = g.dim();
  const int n = g.modes();
  const double cell = std::pow(static_cast<double>(n), -d);
  double acc = 0.0;

  // Shifts on the grid h = m / N with m in {-N/2, ..., N/2 - 1}^d, excluding h = 0.
  for (Index hi = 1; hi < g.size(); ++hi) {
    const auto& m = g.wavevector(hi);
    double h2 = 0.0;
    for (int a = 0; a < d; ++a) h2 += static_cast<double>(m[static_cast<std::size_t>(a)]) * m[static_cast<std::size_t>(a)];
    const double hnorm = std::sqrt(h2) / n;
    double diff = 0.0;
    for (Index k = 1; k < g.size(); ++k) {
      if (power[k] == 0.0) continue;
      double kh = 0.0;
      for (int a = 0; a < d; ++a)
        kh += static_cast<double>(g.wavevector(k)[static_cast<std::size_t>(a)]) * m[static_cast<std::size_t>(a)];
      const double sn = std::sin(std::numbers::pi * kh / n);
      diff += 4.0 * sn * sn * power[k];
    }
    acc += cell * std::pow(hnorm, -2.0 * s - d) * diff;
  }

  // Origin cell as a ball of equal volume: ||Delta_h u||^2 ~ sum |u^|^2 (2 pi k.h)^2.
  const double r = std::pow(cell / unit_ball_volume(d), 1.0 / d);
  double grad2 = 0.0;
  for (Index k = 1; k < g.size(); ++k) grad2 += g.radius(k) * g.radius(k) * power[k];
  const double radial = unit_sphere_area(d) * std::pow(r, 2.0 - 2.0 * s) / (2.0 - 2.0 * s);
  acc += 4.0 * std::numbers::pi * std::numbers::pi * grad2 / d * radial;
  return acc;
}

}  // namespace perhom
