#include "perhom/dense_galerkin.hpp"

#include <stdexcept>

#include <Eigen/LU>

namespace perhom {

std::vector<Index> active_modes(const SpectralGrid& grid) {
  std::vector<Index> out;
  for (Index i = 0; i < grid.size(); ++i)
    if (!grid.is_nyquist(i)) out.push_back(i);
  return out;
}

Eigen::VectorXcd to_active(const PeriodicField& u, const std::vector<Index>& modes) {
  Eigen::VectorXcd c(static_cast<Index>(modes.size()));
  for (std::size_t r = 0; r < modes.size(); ++r) c[static_cast<Index>(r)] = u.coeffs()(modes[r], 0);
  return c;
}

PeriodicField from_active(const GridPtr& grid, const Eigen::Ref<const Eigen::VectorXcd>& c,
                          const std::vector<Index>& modes, bool real) {
  PeriodicField u(grid, 1, real);
  for (std::size_t r = 0; r < modes.size(); ++r) u.coeffs()(modes[r], 0) = c[static_cast<Index>(r)];
  return u;
}

Eigen::MatrixXcd dense_matrix(const GridPtr& grid, const std::function<PeriodicField(const PeriodicField&)>& op) {
  const auto modes = active_modes(*grid);
  const auto n = static_cast<Index>(modes.size());
  Eigen::MatrixXcd a(n, n);
  for (Index col = 0; col < n; ++col) {
    PeriodicField e(grid, 1, false);
    e.coeffs()(modes[static_cast<std::size_t>(col)], 0) = 1.0;
    a.col(col) = to_active(op(e), modes);
  }
  return a;
}

Eigen::VectorXcd normalized_null_vector(Eigen::MatrixXcd a, const std::vector<Index>& modes) {
  if (modes.empty() || modes.front() != 0) throw std::invalid_argument("normalized_null_vector: mode 0 must be first");
  a.row(0).setZero();
  a(0, 0) = 1.0;
  Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(a.rows());
  rhs[0] = 1.0;
  Eigen::FullPivLU<Eigen::MatrixXcd> lu(a);
  if (!lu.isInvertible()) throw std::runtime_error("normalized_null_vector: kernel is not one-dimensional");
  return lu.solve(rhs);
}

}  // namespace perhom
