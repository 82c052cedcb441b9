#pragma once

#include <cstdint>
#include <vector>

#include "perhom/levy.hpp"
#include "perhom/periodic_field.hpp"

namespace perhom {

/// a cos(2 pi k.x) + b sin(2 pi k.x) in one component (or in the potential).
struct FourierTerm {
  WaveVector k{0, 0, 0};
  int component = 0;
  double cos_coeff = 0.0;
  double sin_coeff = 0.0;
};

struct DriftSpec {
  enum class Kind { fourier_list, gradient_of, white_noise };

  Kind kind = Kind::fourier_list;
  int dim = 1;
  /// fourier_list: drift terms per component; gradient_of: potential terms.
  std::vector<FourierTerm> terms;
  // white_noise
  std::uint64_t seed = 0;
  double regularity_target = -0.55;
  double amplitude = 1.0;
  /// Drop the mode-0 coefficient (periodic white noise as derivative of a periodic potential).
  bool centered = true;
};

/// Real d-component drift on the grid. White-noise coefficients depend only on
/// (seed, k, component), so coarser grids see truncations of finer ones.
PeriodicField build_drift(const DriftSpec& spec, const GridPtr& grid);
/// Scalar potential f of a gradient_of spec (F = grad f).
PeriodicField build_potential(const DriftSpec& spec, const GridPtr& grid);

/// F^m = S_{m+1} F: blocks -1..m kept. -1 <= m <= j_max.
PeriodicField mollify(const PeriodicField& field, int level);

enum class Regime { young, rough };

/// young iff beta > (1 - alpha)/2; rough otherwise.
Regime classify_regime(double alpha, double beta);

/// Drift with its mollification ladder and the resonant enhancement
/// E_{i,j,k} = I_inf(d_i F^j) (.) F^k.
struct EnhancedDrift {
  PeriodicField field;
  double alpha = 2.0;
  double beta = 0.0;
  double gamma = 0.0;  // carried as metadata
  Regime regime = Regime::young;
  std::vector<PeriodicField> ladder;       // F^m for m = 0..j_max
  std::vector<PeriodicField> enhancement;  // (i * d + j) * d + k

  int dim() const { return field.grid().dim(); }
  const PeriodicField& E(int i, int j, int k) const {
    return enhancement.at(static_cast<std::size_t>((i * dim() + j) * dim() + k));
  }
  /// I_inf(-div F) (.) F^k = -sum_i E_{i,i,k}.
  PeriodicField divergence_resonant(int k) const;
};

EnhancedDrift enhance(const PeriodicField& field, const LevySymbol& sym, double beta, double gamma);

}  // namespace perhom
