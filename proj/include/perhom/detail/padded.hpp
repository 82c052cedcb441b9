#pragma once

#include <Eigen/Core>

#include "perhom/periodic_field.hpp"

namespace perhom::detail {

/// Samples of one coefficient column on the 3/2-padded collocation grid.
Eigen::VectorXcd padded_values(const SpectralGrid& g, const Eigen::Ref<const Eigen::VectorXcd>& coeffs);
/// Forward transform of padded samples, truncated back onto the lattice.
Eigen::VectorXcd padded_to_coeffs(const SpectralGrid& g, Eigen::VectorXcd values);
/// Checks pair symmetry of a freshly multiplied real field, then symmetrizes.
void finalize_real_product(PeriodicField& out);

}  // namespace perhom::detail
