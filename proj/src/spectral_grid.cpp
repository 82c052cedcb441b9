#include "perhom/spectral_grid.hpp"

#include <bit>
#include <cmath>
#include <string>

#include "perhom/errors.hpp"

namespace perhom {

namespace partition {

namespace {
double ramp(double x) { return x > 0.0 ? std::exp(-1.0 / x) : 0.0; }
}  // namespace

double cutoff(double r) {
  if (r <= kInnerRadius) return 1.0;
  if (r >= kOuterRadius) return 0.0;
  const double s = (kOuterRadius - r) / (kOuterRadius - kInnerRadius);
  const double a = ramp(s);
  const double b = ramp(1.0 - s);
  return a / (a + b);
}

}  // namespace partition

namespace {

int to_wavenumber(int i, int n) { return i < n / 2 ? i : i - n; }
int to_position(int k, int n) { return k >= 0 ? k : k + n; }

}  // namespace

SpectralGrid::SpectralGrid(int dim, int modes) : dim_(dim), modes_(modes) {
  if (dim < 1 || dim > 3) throw std::invalid_argument("make_grid: dimension must be 1, 2 or 3");
  if (modes < 8 || !std::has_single_bit(static_cast<unsigned>(modes)))
    throw std::invalid_argument("make_grid: N must be a power of two >= 8, got " + std::to_string(modes));

  size_ = 1;
  for (int a = 0; a < dim; ++a) size_ *= modes;
  j_max_ = static_cast<int>(std::ceil(std::log2(modes / 2.0)));

  wave_.resize(static_cast<std::size_t>(size_));
  radius_.resize(size_);
  mirror_.resize(static_cast<std::size_t>(size_));
  nyquist_.resize(static_cast<std::size_t>(size_));

  padded_modes_ = 3 * modes / 2;
  padded_size_ = 1;
  for (int a = 0; a < dim; ++a) padded_size_ *= padded_modes_;
  padded_index_.resize(static_cast<std::size_t>(size_));

  for (Index i = 0; i < size_; ++i) {
    WaveVector k{0, 0, 0};
    Index rest = i;
    for (int a = dim - 1; a >= 0; --a) {
      k[static_cast<std::size_t>(a)] = to_wavenumber(static_cast<int>(rest % modes), modes);
      rest /= modes;
    }
    wave_[static_cast<std::size_t>(i)] = k;
    double r2 = 0.0;
    bool nyq = false;
    Index mirror = 0;
    Index padded = 0;
    for (int a = 0; a < dim; ++a) {
      const int ka = k[static_cast<std::size_t>(a)];
      r2 += static_cast<double>(ka) * ka;
      nyq = nyq || ka == -modes / 2;
      mirror = mirror * modes + to_position(-ka == modes / 2 ? ka : -ka, modes);
      padded = padded * padded_modes_ + to_position(ka, padded_modes_);
    }
    radius_[i] = std::sqrt(r2);
    nyquist_[static_cast<std::size_t>(i)] = nyq;
    mirror_[static_cast<std::size_t>(i)] = mirror;
    padded_index_[static_cast<std::size_t>(i)] = padded;
  }

  partition_.reserve(static_cast<std::size_t>(j_max_ + 2));
  partition_.push_back(radius_.unaryExpr([](double r) { return partition::cutoff(r); }));
  for (int j = 0; j <= j_max_; ++j) {
    const double lo = std::ldexp(1.0, -j);
    const double hi = std::ldexp(1.0, -(j + 1));
    partition_.push_back(
        radius_.unaryExpr([=](double r) { return partition::cutoff(hi * r) - partition::cutoff(lo * r); }));
  }
}

Index SpectralGrid::index_of(const WaveVector& k) const {
  Index idx = 0;
  for (int a = 0; a < dim_; ++a) {
    const int ka = k[static_cast<std::size_t>(a)];
    if (ka < -modes_ / 2 || ka >= modes_ / 2) return -1;
    idx = idx * modes_ + to_position(ka, modes_);
  }
  for (int a = dim_; a < 3; ++a)
    if (k[static_cast<std::size_t>(a)] != 0) return -1;
  return idx;
}

Eigen::ArrayXd SpectralGrid::partial_sum_multiplier(int i) const {
  if (i <= -1) return Eigen::ArrayXd::Zero(size_);
  const double scale = std::ldexp(1.0, -i);
  return radius_.unaryExpr([=](double r) { return partition::cutoff(scale * r); });
}

GridPtr make_grid(int dim, int modes) { return std::make_shared<const SpectralGrid>(dim, modes); }

void require_same_grid(const SpectralGrid& a, const SpectralGrid& b) {
  if (!(a == b))
    throw GridMismatch("grid mismatch: (d=" + std::to_string(a.dim()) + ", N=" + std::to_string(a.modes()) +
                       ") vs (d=" + std::to_string(b.dim()) + ", N=" + std::to_string(b.modes()) + ")");
}

}  // namespace perhom
