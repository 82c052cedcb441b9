#pragma once

#include <vector>

#include "perhom/periodic_field.hpp"

namespace perhom {

/// Blocks Delta_j u, j = -1..j_max, and partial sums S_i u = sum_{j <= i-1} Delta_j u.
struct BlockDecomposition {
  int j_max = 0;
  std::vector<PeriodicField> blocks;        // index j + 1
  std::vector<PeriodicField> partial_sums;  // S_i for i = -1..j_max+1, index i + 1

  const PeriodicField& block(int j) const { return blocks.at(static_cast<std::size_t>(j + 1)); }
  const PeriodicField& partial_sum(int i) const { return partial_sums.at(static_cast<std::size_t>(i + 1)); }
};

BlockDecomposition decompose(const PeriodicField& u);

/// Paraproduct u < v = sum_i S_{i-1}u Delta_i v. The high-low part u > v is para_lt(v, u).
PeriodicField para_lt(const PeriodicField& u, const PeriodicField& v);
/// Resonant product u (.) v = sum_{|i-j| <= 1} Delta_i u Delta_j v.
PeriodicField resonant(const PeriodicField& u, const PeriodicField& v);

/// All three Bony parts of u v from one pass over the blocks.
struct BonyParts {
  PeriodicField low_high;   // u < v
  PeriodicField resonant;   // u (.) v
  PeriodicField high_low;   // u > v
};
BonyParts bony(const PeriodicField& u, const PeriodicField& v);

/// C1(g, f, h) = (g < f) (.) h - g (f (.) h).
PeriodicField commutator_c1(const PeriodicField& g, const PeriodicField& f, const PeriodicField& h);
/// Same commutator when f (.) h is already known (e.g. from a drift enhancement).
PeriodicField commutator_c1(const PeriodicField& g, const PeriodicField& f, const PeriodicField& h,
                            const PeriodicField& f_resonant_h);

}  // namespace perhom
