#pragma once

#include <array>
#include <memory>
#include <vector>

#include <Eigen/Core>

namespace perhom {

using Index = Eigen::Index;
using WaveVector = std::array<int, 3>;

// Radii of the radial C^inf cutoff phi used to build the dyadic partition:
// phi = 1 on |k| <= kInnerRadius, phi = 0 on |k| >= kOuterRadius.
// p_{-1} = phi(|k|), p_j = phi(2^{-(j+1)}|k|) - phi(2^{-j}|k|) for j >= 0.
// kOuterRadius < 2 * kInnerRadius keeps blocks i, j disjoint when |i - j| > 1,
// and p_j(2^{j+1}) = 1, so e_k with |k| = 2^{j+1} lives alone in block j.
namespace partition {
inline constexpr double kInnerRadius = 1.0;
inline constexpr double kOuterRadius = 1.9;

/// Smooth cutoff phi(r); C^inf through the ramp exp(-1/x).
double cutoff(double r);
}  // namespace partition

/// Frequency lattice {-N/2, ..., N/2-1}^d in FFT order together with the
/// tabulated Littlewood-Paley partition. Immutable after construction.
class SpectralGrid {
 public:
  SpectralGrid(int dim, int modes);

  int dim() const { return dim_; }
  int modes() const { return modes_; }
  /// Number of lattice points N^d.
  Index size() const { return size_; }
  int j_max() const { return j_max_; }

  const WaveVector& wavevector(Index i) const { return wave_[i]; }
  double radius(Index i) const { return radius_[i]; }
  /// Lattice index of -k. Nyquist components map onto themselves.
  Index mirror(Index i) const { return mirror_[i]; }
  /// True when some component of k equals -N/2.
  bool is_nyquist(Index i) const { return nyquist_[i]; }
  /// Index of k, or -1 when k is outside the lattice.
  Index index_of(const WaveVector& k) const;

  /// p_j(k) over the lattice, j in [-1, j_max].
  const Eigen::ArrayXd& partition(int j) const { return partition_[static_cast<std::size_t>(j + 1)]; }
  /// Multiplier of S_i = sum_{j <= i-1} Delta_j, i.e. phi(2^{-i}|k|) for i >= 0; zero for i <= -1.
  Eigen::ArrayXd partial_sum_multiplier(int i) const;

  /// 3/2-padded collocation grid used for dealiased products.
  int padded_modes() const { return padded_modes_; }
  Index padded_size() const { return padded_size_; }
  /// Position of lattice point i inside the padded FFT array.
  Index padded_index(Index i) const { return padded_index_[i]; }

  bool operator==(const SpectralGrid& other) const { return dim_ == other.dim_ && modes_ == other.modes_; }

 private:
  int dim_;
  int modes_;
  Index size_;
  int j_max_;
  std::vector<WaveVector> wave_;
  Eigen::ArrayXd radius_;
  std::vector<Index> mirror_;
  std::vector<bool> nyquist_;
  std::vector<Eigen::ArrayXd> partition_;
  int padded_modes_;
  Index padded_size_;
  std::vector<Index> padded_index_;
};

using GridPtr = std::shared_ptr<const SpectralGrid>;

/// Builds a grid; N must be a power of two with N >= 8 and d in {1, 2, 3}.
GridPtr make_grid(int dim, int modes);

/// Throws GridMismatch unless both grids have equal (d, N).
void require_same_grid(const SpectralGrid& a, const SpectralGrid& b);

}  // namespace perhom
