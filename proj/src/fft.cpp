#include "perhom/fft.hpp"

#include <complex>
#include <vector>

#include <unsupported/Eigen/FFT>

namespace perhom::fft {

namespace {

Eigen::FFT<double>& engine() {
  // Eigen::FFT caches plans and is not safe to share across threads.
  thread_local Eigen::FFT<double> instance = [] {
    Eigen::FFT<double> f;
    f.SetFlag(Eigen::FFT<double>::Unscaled);
    return f;
  }();
  return instance;
}

void transform(Eigen::Ref<Eigen::VectorXcd> data, int dim, int n, bool inverse) {
  auto& f = engine();
  std::vector<std::complex<double>> line(static_cast<std::size_t>(n));
  std::vector<std::complex<double>> out(static_cast<std::size_t>(n));
  const Eigen::Index total = data.size();
  Eigen::Index stride = 1;
  for (int axis = dim - 1; axis >= 0; --axis) {
    const Eigen::Index block = stride * n;
    for (Eigen::Index outer = 0; outer < total; outer += block) {
      for (Eigen::Index inner = 0; inner < stride; ++inner) {
        const Eigen::Index base = outer + inner;
        for (int m = 0; m < n; ++m) line[static_cast<std::size_t>(m)] = data[base + m * stride];
        if (inverse)
          f.inv(out, line);
        else
          f.fwd(out, line);
        for (int m = 0; m < n; ++m) data[base + m * stride] = out[static_cast<std::size_t>(m)];
      }
    }
    stride = block;
  }
}

}  // namespace

void forward(Eigen::Ref<Eigen::VectorXcd> data, int dim, int n) { transform(data, dim, n, false); }
void inverse(Eigen::Ref<Eigen::VectorXcd> data, int dim, int n) { transform(data, dim, n, true); }

}  // namespace perhom::fft
