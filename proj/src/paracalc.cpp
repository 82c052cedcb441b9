#include "perhom/paracalc.hpp"

#include <stdexcept>

#include "perhom/besov.hpp"
#include "perhom/detail/padded.hpp"

namespace perhom {

namespace {

struct PhysicalBlocks {
  std::vector<Eigen::VectorXcd> block;  // Delta_j, index j + 1
};

PhysicalBlocks physical_blocks(const SpectralGrid& g, const Eigen::Ref<const Eigen::VectorXcd>& coeffs) {
  PhysicalBlocks out;
  for (int j = -1; j <= g.j_max(); ++j) {
    const Eigen::VectorXcd c = coeffs.array() * g.partition(j).cast<Complex>();
    out.block.push_back(detail::padded_values(g, c));
  }
  return out;
}

// Physical padded samples of the three Bony parts for scalar columns.
void bony_scalar(const SpectralGrid& g, const Eigen::Ref<const Eigen::VectorXcd>& u,
                 const Eigen::Ref<const Eigen::VectorXcd>& v, bool want_lt, bool want_res, bool want_gt,
                 Eigen::VectorXcd& lt, Eigen::VectorXcd& res, Eigen::VectorXcd& gt) {
  const PhysicalBlocks bu = physical_blocks(g, u);
  const PhysicalBlocks bv = physical_blocks(g, v);
  const int nb = g.j_max() + 2;
  const Index m = g.padded_size();
  lt = Eigen::VectorXcd::Zero(m);
  res = Eigen::VectorXcd::Zero(m);
  gt = Eigen::VectorXcd::Zero(m);
  Eigen::VectorXcd su = Eigen::VectorXcd::Zero(m);  // S_{i-1} u for the current i
  Eigen::VectorXcd sv = Eigen::VectorXcd::Zero(m);
  // Block position b = i + 1; S_{i-1} = sum of blocks with position <= b - 2.
  for (int b = 0; b < nb; ++b) {
    if (b >= 2) {
      su += bu.block[static_cast<std::size_t>(b - 2)];
      sv += bv.block[static_cast<std::size_t>(b - 2)];
    }
    const auto& ub = bu.block[static_cast<std::size_t>(b)];
    const auto& vb = bv.block[static_cast<std::size_t>(b)];
    if (want_lt && b >= 2) lt.array() += su.array() * vb.array();
    if (want_gt && b >= 2) gt.array() += ub.array() * sv.array();
    if (want_res) {
      Eigen::VectorXcd neighbours = vb;
      if (b > 0) neighbours += bv.block[static_cast<std::size_t>(b - 1)];
      if (b + 1 < nb) neighbours += bv.block[static_cast<std::size_t>(b + 1)];
      res.array() += ub.array() * neighbours.array();
    }
  }
}

enum Part { kLowHigh = 1, kResonant = 2, kHighLow = 4 };

BonyParts bony_impl(const PeriodicField& u, const PeriodicField& v, int parts) {
  require_same_grid(u.grid(), v.grid());
  if (u.components() != v.components() && u.components() != 1 && v.components() != 1)
    throw std::invalid_argument("paraproduct: component counts must match or one operand must be scalar");
  const auto& g = u.grid();
  const int comps = std::max(u.components(), v.components());
  const bool real = u.is_real() && v.is_real();
  BonyParts out{PeriodicField(u.grid_ptr(), comps, real), PeriodicField(u.grid_ptr(), comps, real),
                PeriodicField(u.grid_ptr(), comps, real)};
  for (int c = 0; c < comps; ++c) {
    Eigen::VectorXcd lt, res, gt;
    bony_scalar(g, u.coeffs().col(u.components() == 1 ? 0 : c), v.coeffs().col(v.components() == 1 ? 0 : c),
                parts & kLowHigh, parts & kResonant, parts & kHighLow, lt, res, gt);
    if (parts & kLowHigh) out.low_high.coeffs().col(c) = detail::padded_to_coeffs(g, std::move(lt));
    if (parts & kResonant) out.resonant.coeffs().col(c) = detail::padded_to_coeffs(g, std::move(res));
    if (parts & kHighLow) out.high_low.coeffs().col(c) = detail::padded_to_coeffs(g, std::move(gt));
  }
  if (real) {
    if (parts & kLowHigh) detail::finalize_real_product(out.low_high);
    if (parts & kResonant) detail::finalize_real_product(out.resonant);
    if (parts & kHighLow) detail::finalize_real_product(out.high_low);
  }
  return out;
}

}  // namespace

BlockDecomposition decompose(const PeriodicField& u) {
  BlockDecomposition out;
  const auto& g = u.grid();
  out.j_max = g.j_max();
  for (int j = -1; j <= g.j_max(); ++j) out.blocks.push_back(lp_block(u, j));
  PeriodicField running(u.grid_ptr(), u.components(), u.is_real());
  out.partial_sums.push_back(running);  // S_{-1} = 0
  for (int j = -1; j <= g.j_max(); ++j) {
    running += out.block(j);
    out.partial_sums.push_back(running);
  }
  return out;
}

PeriodicField para_lt(const PeriodicField& u, const PeriodicField& v) {
  return std::move(bony_impl(u, v, kLowHigh).low_high);
}

PeriodicField resonant(const PeriodicField& u, const PeriodicField& v) {
  return std::move(bony_impl(u, v, kResonant).resonant);
}

BonyParts bony(const PeriodicField& u, const PeriodicField& v) {
  return bony_impl(u, v, kLowHigh | kResonant | kHighLow);
}

PeriodicField commutator_c1(const PeriodicField& g, const PeriodicField& f, const PeriodicField& h) {
  return commutator_c1(g, f, h, resonant(f, h));
}

PeriodicField commutator_c1(const PeriodicField& g, const PeriodicField& f, const PeriodicField& h,
                            const PeriodicField& f_resonant_h) {
  return resonant(para_lt(g, f), h) - multiply(g, f_resonant_h);
}

}  // namespace perhom
