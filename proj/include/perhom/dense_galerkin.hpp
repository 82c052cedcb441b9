#pragma once

#include <functional>
#include <vector>

#include <Eigen/Core>

#include "perhom/periodic_field.hpp"

namespace perhom {

/// Lattice indices of the non-Nyquist modes, the coordinates of real fields.
std::vector<Index> active_modes(const SpectralGrid& grid);

Eigen::VectorXcd to_active(const PeriodicField& u, const std::vector<Index>& modes);
PeriodicField from_active(const GridPtr& grid, const Eigen::Ref<const Eigen::VectorXcd>& c,
                          const std::vector<Index>& modes, bool real = true);

/// Matrix of a linear scalar operator on the active modes, built column by
/// column from complex exponentials.
Eigen::MatrixXcd dense_matrix(const GridPtr& grid, const std::function<PeriodicField(const PeriodicField&)>& op);

/// Solves A c = 0 with the mode-0 row replaced by c_0 = 1 (A's mode-0 row must vanish).
Eigen::VectorXcd normalized_null_vector(Eigen::MatrixXcd a, const std::vector<Index>& modes);

}  // namespace perhom
