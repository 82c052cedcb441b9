#include "perhom/drift.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "perhom/paracalc.hpp"
#include "perhom/philox.hpp"

namespace perhom {

namespace {

constexpr std::uint32_t kWhiteNoiseTag = 0x574e4f49u;  // "WNOI"

void require_on_lattice(const SpectralGrid& g, const WaveVector& k) {
  for (int a = 0; a < 3; ++a) {
    const int ka = k[static_cast<std::size_t>(a)];
    if (a >= g.dim()) {
      if (ka != 0) throw std::invalid_argument("DriftSpec: wavevector has components beyond the dimension");
      continue;
    }
    if (std::abs(ka) >= g.modes() / 2)
      throw std::invalid_argument("DriftSpec: mode " + std::to_string(ka) + " not below N/2 = " +
                                  std::to_string(g.modes() / 2));
  }
}

// Adds a cos(2 pi k.x) + b sin(2 pi k.x) into column c.
void add_term(PeriodicField& u, const FourierTerm& t, int c) {
  const auto& g = u.grid();
  require_on_lattice(g, t.k);
  const Index i = g.index_of(t.k);
  const Index j = g.mirror(i);
  if (i == 0) {
    u.coeffs()(0, c) += t.cos_coeff;
    return;
  }
  const Complex half(0.5 * t.cos_coeff, -0.5 * t.sin_coeff);
  u.coeffs()(i, c) += half;
  u.coeffs()(j, c) += std::conj(half);
}

// Lexicographically positive representative of {k, -k}.
bool is_canonical(const WaveVector& k) {
  for (int v : k) {
    if (v > 0) return true;
    if (v < 0) return false;
  }
  return false;
}

Complex noise_coefficient(std::uint64_t seed, const WaveVector& k, int component) {
  const auto pack = [](int v) { return static_cast<std::uint32_t>(v + 0x8000) & 0xffffu; };
  const Philox4x32::Counter ctr{static_cast<std::uint32_t>(component), pack(k[0]) | (pack(k[1]) << 16), pack(k[2]),
                                kWhiteNoiseTag};
  const auto out = Philox4x32::block(ctr, {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)});
  const double u1 = to_open_unit(out[0], out[1]);
  const double u2 = to_open_unit(out[2], out[3]);
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  return {r * std::cos(theta), r * std::sin(theta)};
}

}  // namespace

PeriodicField build_potential(const DriftSpec& spec, const GridPtr& grid) {
  if (spec.kind != DriftSpec::Kind::gradient_of) throw std::invalid_argument("build_potential: spec is not gradient_of");
  if (spec.dim != grid->dim()) throw std::invalid_argument("DriftSpec: dimension differs from grid");
  PeriodicField f(grid, 1, true);
  for (const auto& t : spec.terms) add_term(f, t, 0);
  return f;
}

PeriodicField build_drift(const DriftSpec& spec, const GridPtr& grid) {
  if (spec.dim != grid->dim()) throw std::invalid_argument("DriftSpec: dimension differs from grid");
  const int d = grid->dim();
  switch (spec.kind) {
    case DriftSpec::Kind::fourier_list: {
      PeriodicField F(grid, d, true);
      for (const auto& t : spec.terms) {
        if (t.component < 0 || t.component >= d) throw std::invalid_argument("DriftSpec: component out of range");
        add_term(F, t, t.component);
      }
      return F;
    }
    case DriftSpec::Kind::gradient_of:
      return gradient(build_potential(spec, grid));
    case DriftSpec::Kind::white_noise: {
      PeriodicField F(grid, d, true);
      const auto& g = *grid;
      for (Index i = 0; i < g.size(); ++i) {
        if (g.is_nyquist(i)) continue;
        const WaveVector& k = g.wavevector(i);
        for (int c = 0; c < d; ++c) {
          if (i == 0) {
            if (!spec.centered) F.coeffs()(0, c) = spec.amplitude * noise_coefficient(spec.seed, k, c).real();
            continue;
          }
          if (!is_canonical(k)) continue;
          const Complex z = spec.amplitude * std::sqrt(0.5) * noise_coefficient(spec.seed, k, c);
          F.coeffs()(i, c) = z;
          F.coeffs()(g.mirror(i), c) = std::conj(z);
        }
      }
      return F;
    }
  }
  throw std::invalid_argument("DriftSpec: unknown kind");
}

PeriodicField mollify(const PeriodicField& field, int level) {
  const int jmax = field.grid().j_max();
  if (level < -1 || level > jmax)
    throw std::out_of_range("mollify: level must lie in [-1, " + std::to_string(jmax) + "]");
  return apply_multiplier(field, field.grid().partial_sum_multiplier(level + 1));
}

Regime classify_regime(double alpha, double beta) { return beta > (1.0 - alpha) / 2.0 ? Regime::young : Regime::rough; }

PeriodicField EnhancedDrift::divergence_resonant(int k) const {
  PeriodicField out(field.grid_ptr(), 1, true);
  for (int i = 0; i < dim(); ++i) out -= E(i, i, k);
  return out;
}

EnhancedDrift enhance(const PeriodicField& field, const LevySymbol& sym, double beta, double gamma) {
  const int d = field.grid().dim();
  require_same_grid(sym.grid(), field.grid());
  if (field.components() != d)
    throw std::invalid_argument("enhance: drift needs " + std::to_string(d) + " components, got " +
                                std::to_string(field.components()));
  EnhancedDrift out;
  out.field = field;
  out.alpha = sym.alpha();
  out.beta = beta;
  out.gamma = gamma;
  out.regime = classify_regime(out.alpha, beta);
  for (int m = 0; m <= field.grid().j_max(); ++m) out.ladder.push_back(mollify(field, m));

  std::vector<PeriodicField> integrated;  // I_inf(d_i F^j) at i * d + j
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) integrated.push_back(steady_integral(sym, partial_derivative(field.component(j), i)));
  std::vector<PeriodicField> comps;
  for (int k = 0; k < d; ++k) comps.push_back(field.component(k));
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k)
        out.enhancement.push_back(resonant(integrated[static_cast<std::size_t>(i * d + j)],
                                           comps[static_cast<std::size_t>(k)]));
  return out;
}

}  // namespace perhom
