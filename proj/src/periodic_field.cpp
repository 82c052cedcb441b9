#include "perhom/periodic_field.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "perhom/errors.hpp"
#include "perhom/detail/padded.hpp"
#include "perhom/fft.hpp"

namespace perhom {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kHermitianTolerance = 1e-10;

void require_compatible(const PeriodicField& a, const PeriodicField& b) {
  require_same_grid(a.grid(), b.grid());
}

}  // namespace

namespace detail {

Eigen::VectorXcd padded_values(const SpectralGrid& g, const Eigen::Ref<const Eigen::VectorXcd>& c) {
  Eigen::VectorXcd padded = Eigen::VectorXcd::Zero(g.padded_size());
  for (Index i = 0; i < g.size(); ++i) padded[g.padded_index(i)] = c[i];
  fft::inverse(padded, g.dim(), g.padded_modes());
  return padded;
}

Eigen::VectorXcd padded_to_coeffs(const SpectralGrid& g, Eigen::VectorXcd values) {
  fft::forward(values, g.dim(), g.padded_modes());
  const double scale = 1.0 / static_cast<double>(g.padded_size());
  Eigen::VectorXcd out(g.size());
  for (Index i = 0; i < g.size(); ++i) out[i] = values[g.padded_index(i)] * scale;
  return out;
}

void finalize_real_product(PeriodicField& out) {
  const auto& g = out.grid();
  const double scale = std::max(1.0, out.coeffs().cwiseAbs().maxCoeff());
  // Products legitimately create Nyquist content; only pair asymmetry counts as drift.
  double drift = 0.0;
  for (Index c = 0; c < out.coeffs().cols(); ++c)
    for (Index i = 0; i < g.size(); ++i)
      if (!g.is_nyquist(i))
        drift = std::max(drift, std::abs(out.coeffs()(i, c) - std::conj(out.coeffs()(g.mirror(i), c))));
  if (drift > kHermitianTolerance * scale)
    throw InternalError("Hermitian symmetry drift " + std::to_string(drift) + " after a nonlinear operation");
  out.enforce_hermitian();
}

}  // namespace detail

PeriodicField::PeriodicField(GridPtr grid, int components, bool real)
    : grid_(std::move(grid)), coeffs_(Eigen::MatrixXcd::Zero(grid_->size(), components)), real_(real) {}

PeriodicField::PeriodicField(GridPtr grid, Eigen::MatrixXcd coeffs, bool real)
    : grid_(std::move(grid)), coeffs_(std::move(coeffs)), real_(real) {
  if (coeffs_.rows() != grid_->size())
    throw std::invalid_argument("PeriodicField: coefficient count must equal N^d");
}

PeriodicField PeriodicField::constant(GridPtr grid, double value) {
  PeriodicField u(std::move(grid));
  u.coeffs_(0, 0) = value;
  return u;
}

PeriodicField PeriodicField::exponential(GridPtr grid, const WaveVector& k, Complex amplitude) {
  const Index idx = grid->index_of(k);
  if (idx < 0) throw std::invalid_argument("PeriodicField::exponential: mode outside the lattice");
  PeriodicField u(std::move(grid), 1, false);
  u.coeffs_(idx, 0) = amplitude;
  return u;
}

PeriodicField PeriodicField::from_values(GridPtr grid, const Eigen::MatrixXd& values) {
  if (values.rows() != grid->size()) throw std::invalid_argument("from_values: sample count must equal N^d");
  PeriodicField u(grid, static_cast<int>(values.cols()), true);
  const double scale = 1.0 / static_cast<double>(grid->size());
  for (Index c = 0; c < values.cols(); ++c) {
    Eigen::VectorXcd col = values.col(c).cast<Complex>();
    fft::forward(col, grid->dim(), grid->modes());
    u.coeffs_.col(c) = col * scale;
  }
  u.enforce_hermitian();
  return u;
}

PeriodicField PeriodicField::stack(std::span<const PeriodicField> parts) {
  if (parts.empty()) throw std::invalid_argument("stack: no components");
  int total = 0;
  bool real = true;
  for (const auto& p : parts) {
    require_compatible(parts.front(), p);
    total += p.components();
    real = real && p.is_real();
  }
  PeriodicField out(parts.front().grid_ptr(), total, real);
  int col = 0;
  for (const auto& p : parts) {
    out.coeffs_.middleCols(col, p.components()) = p.coeffs_;
    col += p.components();
  }
  return out;
}

Complex PeriodicField::coeff(const WaveVector& k, int component) const {
  const Index idx = grid_->index_of(k);
  return idx < 0 ? Complex{} : coeffs_(idx, component);
}

PeriodicField PeriodicField::component(int c) const {
  return PeriodicField(grid_, Eigen::MatrixXcd(coeffs_.col(c)), real_);
}

Eigen::MatrixXcd PeriodicField::complex_values() const {
  Eigen::MatrixXcd out(coeffs_.rows(), coeffs_.cols());
  for (Index c = 0; c < coeffs_.cols(); ++c) {
    Eigen::VectorXcd col = coeffs_.col(c);
    fft::inverse(col, grid_->dim(), grid_->modes());
    out.col(c) = col;
  }
  return out;
}

Eigen::MatrixXd PeriodicField::values() const { return complex_values().real(); }

double PeriodicField::evaluate(const Eigen::Ref<const Eigen::VectorXd>& x, int component) const {
  const auto& g = *grid_;
  Complex sum{};
  for (Index i = 0; i < g.size(); ++i) {
    const Complex c = coeffs_(i, component);
    if (c == Complex{}) continue;
    double phase = 0.0;
    for (int a = 0; a < g.dim(); ++a) phase += g.wavevector(i)[static_cast<std::size_t>(a)] * (x[a] - std::floor(x[a]));
    sum += c * std::polar(1.0, kTwoPi * phase);
  }
  return sum.real();
}

double PeriodicField::hermitian_defect() const {
  const auto& g = *grid_;
  double defect = 0.0;
  for (Index c = 0; c < coeffs_.cols(); ++c)
    for (Index i = 0; i < g.size(); ++i) {
      const double d = g.is_nyquist(i) ? std::abs(coeffs_(i, c))
                                       : std::abs(coeffs_(i, c) - std::conj(coeffs_(g.mirror(i), c)));
      defect = std::max(defect, d);
    }
  return defect;
}

void PeriodicField::enforce_hermitian() {
  const auto& g = *grid_;
  for (Index c = 0; c < coeffs_.cols(); ++c)
    for (Index i = 0; i < g.size(); ++i) {
      if (g.is_nyquist(i)) {
        coeffs_(i, c) = 0.0;
        continue;
      }
      const Index m = g.mirror(i);
      if (m < i) continue;
      const Complex avg = 0.5 * (coeffs_(i, c) + std::conj(coeffs_(m, c)));
      coeffs_(i, c) = avg;
      coeffs_(m, c) = std::conj(avg);
    }
  real_ = true;
}

PeriodicField& PeriodicField::operator+=(const PeriodicField& other) {
  require_compatible(*this, other);
  coeffs_ += other.coeffs_;
  real_ = real_ && other.real_;
  return *this;
}

PeriodicField& PeriodicField::operator-=(const PeriodicField& other) {
  require_compatible(*this, other);
  coeffs_ -= other.coeffs_;
  real_ = real_ && other.real_;
  return *this;
}

PeriodicField& PeriodicField::operator*=(double s) {
  coeffs_ *= s;
  return *this;
}

PeriodicField operator+(PeriodicField a, const PeriodicField& b) { return a += b; }
PeriodicField operator-(PeriodicField a, const PeriodicField& b) { return a -= b; }
PeriodicField operator*(double s, PeriodicField a) { return a *= s; }
PeriodicField operator*(PeriodicField a, double s) { return a *= s; }

PeriodicField apply_multiplier(const PeriodicField& u, const Eigen::ArrayXd& multiplier) {
  PeriodicField out = u;
  for (Index c = 0; c < u.components(); ++c)
    out.coeffs().col(c) = (u.coeffs().col(c).array() * multiplier.cast<Complex>()).matrix();
  return out;
}

PeriodicField multiply(const PeriodicField& u, const PeriodicField& v) {
  require_compatible(u, v);
  if (u.components() != v.components() && u.components() != 1 && v.components() != 1)
    throw std::invalid_argument("multiply: component counts must match or one operand must be scalar");
  const auto& g = u.grid();
  const int comps = std::max(u.components(), v.components());
  PeriodicField out(u.grid_ptr(), comps, u.is_real() && v.is_real());

  Eigen::VectorXcd u_scalar, v_scalar;
  if (u.components() == 1) u_scalar = detail::padded_values(g, u.coeffs().col(0));
  if (v.components() == 1) v_scalar = detail::padded_values(g, v.coeffs().col(0));
  for (int c = 0; c < comps; ++c) {
    const Eigen::VectorXcd uc = u.components() == 1 ? u_scalar : detail::padded_values(g, u.coeffs().col(c));
    const Eigen::VectorXcd vc = v.components() == 1 ? v_scalar : detail::padded_values(g, v.coeffs().col(c));
    out.coeffs().col(c) = detail::padded_to_coeffs(g, uc.cwiseProduct(vc));
  }
  if (out.is_real()) detail::finalize_real_product(out);
  return out;
}

PeriodicField dot(const PeriodicField& u, const PeriodicField& v) {
  if (u.components() != v.components()) throw std::invalid_argument("dot: component counts differ");
  const PeriodicField prod = multiply(u, v);
  PeriodicField out(u.grid_ptr(), 1, prod.is_real());
  out.coeffs().col(0) = prod.coeffs().rowwise().sum();
  return out;
}

PeriodicField partial_derivative(const PeriodicField& u, int axis) {
  const auto& g = u.grid();
  if (axis < 0 || axis >= g.dim()) throw std::invalid_argument("partial_derivative: axis out of range");
  PeriodicField out = u;
  for (Index i = 0; i < g.size(); ++i) {
    const Complex factor(0.0, kTwoPi * g.wavevector(i)[static_cast<std::size_t>(axis)]);
    out.coeffs().row(i) *= g.is_nyquist(i) && u.is_real() ? Complex{} : factor;
  }
  return out;
}

PeriodicField gradient(const PeriodicField& u) {
  if (u.components() != 1) throw std::invalid_argument("gradient: scalar field expected");
  std::vector<PeriodicField> parts;
  for (int a = 0; a < u.grid().dim(); ++a) parts.push_back(partial_derivative(u, a));
  return PeriodicField::stack(parts);
}

PeriodicField divergence(const PeriodicField& f) {
  if (f.components() != f.grid().dim()) throw std::invalid_argument("divergence: expected d components");
  PeriodicField out(f.grid_ptr(), 1, f.is_real());
  for (int a = 0; a < f.grid().dim(); ++a) out += partial_derivative(f.component(a), a);
  return out;
}

double l2_norm(const PeriodicField& u) { return u.coeffs().norm(); }

double inner_product(const PeriodicField& u, const PeriodicField& v) {
  require_compatible(u, v);
  return (u.coeffs().array() * v.coeffs().array().conjugate()).sum().real();
}

double integrate_triple(const PeriodicField& u, const PeriodicField& v, const PeriodicField& w) {
  require_compatible(u, v);
  require_compatible(u, w);
  const auto& g = u.grid();
  const Eigen::VectorXcd a = detail::padded_values(g, u.coeffs().col(0));
  const Eigen::VectorXcd b = detail::padded_values(g, v.coeffs().col(0));
  const Eigen::VectorXcd c = detail::padded_values(g, w.coeffs().col(0));
  return (a.array() * b.array() * c.array()).sum().real() / static_cast<double>(g.padded_size());
}

PeriodicField resample(const PeriodicField& u, const GridPtr& target) {
  if (target->dim() != u.grid().dim()) throw GridMismatch("resample: dimension mismatch");
  PeriodicField out(target, u.components(), u.is_real());
  const auto& src = u.grid();
  for (Index i = 0; i < src.size(); ++i) {
    const Index j = target->index_of(src.wavevector(i));
    if (j >= 0) out.coeffs().row(j) = u.coeffs().row(i);
  }
  if (out.is_real()) out.enforce_hermitian();
  return out;
}

Eigen::MatrixXd oversampled_values(const PeriodicField& u, int factor) {
  if (factor < 1) throw std::invalid_argument("oversampled_values: factor must be >= 1");
  const auto fine = make_grid(u.grid().dim(), u.grid().modes() * factor);
  PeriodicField embedded(fine, u.components(), u.is_real());
  const auto& src = u.grid();
  for (Index i = 0; i < src.size(); ++i) embedded.coeffs().row(fine->index_of(src.wavevector(i))) = u.coeffs().row(i);
  return embedded.values();
}

PeriodicField dirac(GridPtr grid, const Eigen::Ref<const Eigen::VectorXd>& x0) {
  const auto& g = *grid;
  if (x0.size() != g.dim()) throw std::invalid_argument("dirac: position dimension mismatch");
  PeriodicField u(grid);
  for (Index i = 0; i < g.size(); ++i) {
    if (g.is_nyquist(i)) continue;
    double phase = 0.0;
    for (int a = 0; a < g.dim(); ++a) phase += g.wavevector(i)[static_cast<std::size_t>(a)] * x0[a];
    u.coeffs()(i, 0) = std::polar(1.0, -kTwoPi * phase);
  }
  return u;
}

}  // namespace perhom
