#include "perhom/levy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/LU>

namespace perhom {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// E|xi_1|^alpha for xi uniform on S^{d-1}.
double sphere_moment(double alpha, int d) {
  return std::tgamma((alpha + 1.0) / 2.0) * std::tgamma(d / 2.0) /
         (std::sqrt(std::numbers::pi) * std::tgamma((alpha + d) / 2.0));
}

std::vector<Eigen::VectorXd> symmetric_sphere_points(int d, int count) {
  std::vector<Eigen::VectorXd> pts;
  if (d == 1) {
    pts.push_back(Eigen::VectorXd::Constant(1, 1.0));
    pts.push_back(Eigen::VectorXd::Constant(1, -1.0));
    return pts;
  }
  const int half = std::max(1, count / 2);
  if (d == 2) {
    for (int m = 0; m < 2 * half; ++m) {
      const double theta = (m + 0.5) * kTwoPi / (2 * half);
      Eigen::VectorXd p(2);
      p << std::cos(theta), std::sin(theta);
      pts.push_back(p);
    }
    return pts;
  }
  // Fibonacci lattice on S^2 plus antipodes.
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < half; ++i) {
    const double z = 1.0 - (2.0 * i + 1.0) / half;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    Eigen::VectorXd p(3);
    p << r * std::cos(golden * i), r * std::sin(golden * i), z;
    pts.push_back(p);
    pts.push_back(-p);
  }
  return pts;
}

}  // namespace

SphericalMeasure SphericalMeasure::atomic(double alpha, std::vector<SphericalAtom> atoms) {
  if (atoms.empty()) throw std::invalid_argument("SphericalMeasure: no atoms");
  SphericalMeasure m(alpha, static_cast<int>(atoms.front().direction.size()));
  for (auto& a : atoms) {
    const double n = a.direction.norm();
    if (n == 0.0) throw std::invalid_argument("SphericalMeasure: zero direction");
    a.direction /= n;
  }
  m.atoms_ = std::move(atoms);
  m.validate();
  return m;
}

SphericalMeasure SphericalMeasure::uniform(double alpha, int dim, double total_mass) {
  SphericalMeasure m(alpha, dim);
  m.uniform_mass_ = total_mass;
  m.validate();
  return m;
}

SphericalMeasure SphericalMeasure::fractional_laplacian(double alpha, int dim) {
  return uniform(alpha, dim, std::pow(kTwoPi, alpha) / sphere_moment(alpha, dim));
}

double SphericalMeasure::total_mass() const {
  if (uniform_mass_) return *uniform_mass_;
  double s = 0.0;
  for (const auto& a : atoms_) s += a.weight;
  return s;
}

std::vector<SphericalAtom> SphericalMeasure::atoms(int quadrature_points) const {
  if (!uniform_mass_) return atoms_;
  const auto pts = symmetric_sphere_points(dim_, quadrature_points);
  std::vector<SphericalAtom> out;
  const double w = *uniform_mass_ / static_cast<double>(pts.size());
  for (const auto& p : pts) out.push_back({p, w});
  return out;
}

void SphericalMeasure::validate() const {
  if (!(alpha_ > 1.0 && alpha_ <= 2.0))
    throw std::invalid_argument("SphericalMeasure: alpha must lie in (1, 2], got " + std::to_string(alpha_));
  if (dim_ < 1 || dim_ > 3) throw std::invalid_argument("SphericalMeasure: dimension must be 1, 2 or 3");
  if (uniform_mass_) {
    if (!(*uniform_mass_ > 0.0)) throw std::invalid_argument("SphericalMeasure: total mass must be positive");
    return;
  }
  double mass = 0.0;
  Eigen::MatrixXd dirs(dim_, static_cast<Index>(atoms_.size()));
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    const auto& a = atoms_[i];
    if (a.direction.size() != dim_) throw std::invalid_argument("SphericalMeasure: mixed atom dimensions");
    if (!(a.weight > 0.0)) throw std::invalid_argument("SphericalMeasure: atom weights must be positive");
    mass += a.weight;
    dirs.col(static_cast<Index>(i)) = a.direction;
    const bool has_antipode = std::any_of(atoms_.begin(), atoms_.end(), [&](const SphericalAtom& b) {
      return (b.direction + a.direction).norm() < 1e-12 && std::abs(b.weight - a.weight) <= 1e-12 * a.weight;
    });
    if (!has_antipode) throw std::invalid_argument("SphericalMeasure: atoms must be symmetric (nu(A) = nu(-A))");
  }
  if (!(mass > 0.0)) throw std::invalid_argument("SphericalMeasure: total mass must be positive");
  Eigen::FullPivLU<Eigen::MatrixXd> lu(dirs);
  if (lu.rank() < dim_)
    throw std::invalid_argument("SphericalMeasure: atom directions must span R^d (non-degeneracy)");
}

double symbol(const SphericalMeasure& measure, const Eigen::Ref<const Eigen::VectorXd>& z) {
  if (z.size() != measure.dim()) throw std::invalid_argument("symbol: dimension mismatch");
  if (measure.alpha() == 2.0) return 0.5 * kTwoPi * kTwoPi * z.squaredNorm();
  double s = 0.0;
  for (const auto& a : measure.atoms()) s += a.weight * std::pow(std::abs(z.dot(a.direction)), measure.alpha());
  return s;
}

LevySymbol::LevySymbol(SphericalMeasure measure, GridPtr grid) : measure_(std::move(measure)), grid_(std::move(grid)) {
  const auto& g = *grid_;
  if (g.dim() != measure_.dim()) throw std::invalid_argument("LevySymbol: measure and grid dimensions differ");
  const double alpha = measure_.alpha();
  const auto atoms = measure_.atoms();
  psi_.resize(g.size());
  c_gap_ = std::numeric_limits<double>::infinity();
  lower_ratio_ = std::numeric_limits<double>::infinity();
  upper_ratio_ = 0.0;
  Eigen::VectorXd z(g.dim());
  for (Index i = 0; i < g.size(); ++i) {
    for (int a = 0; a < g.dim(); ++a) z[a] = g.wavevector(i)[static_cast<std::size_t>(a)];
    double s = 0.0;
    if (alpha == 2.0) {
      s = 0.5 * kTwoPi * kTwoPi * z.squaredNorm();
    } else {
      for (const auto& at : atoms) s += at.weight * std::pow(std::abs(z.dot(at.direction)), alpha);
    }
    psi_[i] = s;
    if (i == 0) continue;
    const double ratio = s / std::pow(g.radius(i), alpha);
    lower_ratio_ = std::min(lower_ratio_, ratio);
    upper_ratio_ = std::max(upper_ratio_, ratio);
    if (!g.is_nyquist(i)) c_gap_ = std::min(c_gap_, s);
  }
}

PeriodicField apply_generator(const LevySymbol& sym, const PeriodicField& u) {
  require_same_grid(sym.grid(), u.grid());
  return apply_multiplier(u, sym.table());
}

PeriodicField semigroup(const LevySymbol& sym, const PeriodicField& u, double t) {
  require_same_grid(sym.grid(), u.grid());
  if (t < 0.0) throw std::invalid_argument("semigroup: negative time");
  if (t == 0.0) return u;
  return apply_multiplier(u, (-t * sym.table()).exp());
}

PeriodicField resolvent_integral(const LevySymbol& sym, const PeriodicField& u, double lambda) {
  require_same_grid(sym.grid(), u.grid());
  if (!(lambda > 0.0)) throw std::invalid_argument("resolvent_integral: lambda must be positive");
  return apply_multiplier(u, (lambda + sym.table()).inverse());
}

PeriodicField steady_integral(const LevySymbol& sym, const PeriodicField& u) {
  require_same_grid(sym.grid(), u.grid());
  const double scale = std::max(1.0, u.coeffs().cwiseAbs().maxCoeff());
  if (u.coeffs().row(0).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw std::domain_error("steady_integral: input must be mean-zero (the time integral diverges at mode 0)");
  Eigen::ArrayXd m = sym.table();
  m[0] = 1.0;
  m = m.inverse();
  m[0] = 0.0;
  return apply_multiplier(u, m);
}

PeriodicField finite_integral(const LevySymbol& sym, const PeriodicField& u, double t) {
  require_same_grid(sym.grid(), u.grid());
  if (t < 0.0) throw std::invalid_argument("finite_integral: negative time");
  const auto& psi = sym.table();
  Eigen::ArrayXd m(psi.size());
  for (Index k = 0; k < psi.size(); ++k) m[k] = t * etd_phi1(-t * psi[k]);
  return apply_multiplier(u, m);
}

double etd_phi1(double z) {
  if (z == 0.0) return 1.0;
  return std::expm1(z) / z;
}

double etd_phi2(double z) {
  if (std::abs(z) < 1e-2) return 0.5 + z * (1.0 / 6.0 + z * (1.0 / 24.0 + z * (1.0 / 120.0 + z / 720.0)));
  return (std::expm1(z) - z) / (z * z);
}

PeriodicField duhamel(const LevySymbol& sym, const FieldPath& v, double t) {
  if (v.times.size() != v.values.size() || v.times.empty())
    throw std::invalid_argument("duhamel: times and values must be non-empty and aligned");
  if (!std::is_sorted(v.times.begin(), v.times.end()))
    throw std::invalid_argument("duhamel: sample times must be increasing");
  if (t < v.times.front() || t > v.times.back())
    throw std::out_of_range("duhamel: t outside the sampled range");
  const auto& psi = sym.table();
  const PeriodicField& first = v.values.front();
  require_same_grid(sym.grid(), first.grid());
  PeriodicField acc(first.grid_ptr(), first.components(), first.is_real());

  for (std::size_t i = 0; i + 1 < v.times.size() && v.times[i] < t; ++i) {
    const double t0 = v.times[i];
    const double t1 = std::min(v.times[i + 1], t);
    const double h = t1 - t0;
    if (h <= 0.0) continue;
    const double full = v.times[i + 1] - t0;
    const double frac = h / full;
    // v at the (possibly truncated) right end of the interval.
    const Eigen::MatrixXcd v0 = v.values[i].coeffs();
    const Eigen::MatrixXcd v1 = v0 + frac * (v.values[i + 1].coeffs() - v0);
    for (Index k = 0; k < psi.size(); ++k) {
      const double z = -h * psi[k];
      const double decay = std::exp(-(t - t1) * psi[k]);
      acc.coeffs().row(k) += decay * h * (etd_phi1(z) * v0.row(k) + etd_phi2(z) * (v1.row(k) - v0.row(k)));
    }
  }
  return acc;
}

}  // namespace perhom
