#pragma once

#include <limits>

#include "perhom/periodic_field.hpp"

namespace perhom {

/// Littlewood-Paley block Delta_j u = F^{-1}(p_j F u), j in [-1, j_max].
PeriodicField lp_block(const PeriodicField& u, int j);

/// ||(2^{j theta} ||Delta_j u||_{L^p})_{j >= -1}||_{l^q} on the truncated lattice.
/// p in {1, 2, inf}, q in {2, inf}. L^2 block norms are exact (Parseval); L^1 and
/// L^inf are collocation estimates on the N^d grid. Vector fields use the
/// pointwise Euclidean norm. q = inf is the plain sup over blocks.
double besov_norm(const PeriodicField& u, double theta, double p, double q);

/// Shorthand for the C^theta_2 = B^theta_{2,inf} norm used by the solvers.
inline double holder2_norm(const PeriodicField& u, double theta) {
  return besov_norm(u, theta, 2.0, std::numeric_limits<double>::infinity());
}

enum class HomogeneousKind { sobolev, besov_22 };

/// Squared homogeneous seminorm.
///  sobolev:  sum_{k != 0} |k|^{2s} |u^(k)|^2 (exact);
///  besov_22: int_{T^d} |h|^{-2s} ||u(.+h) - u||_{L^2}^2 dh / |h|^d by midpoint
///            quadrature over the N^d grid of shifts, with the cell at h = 0
///            integrated from the small-shift expansion. s in (0, 1]; s = 1
///            falls back to the Sobolev value.
double homogeneous_norm(const PeriodicField& u, double s, HomogeneousKind kind);

}  // namespace perhom
