#pragma once

#include <Eigen/Core>

namespace perhom::fft {

// Unnormalized multi-dimensional transforms over an n^d row-major array
// (first axis slowest). forward: sum_x u(x) e^{-2 pi i k.x};
// inverse: sum_k c(k) e^{+2 pi i k.x}. Callers apply 1/n^d where needed.
void forward(Eigen::Ref<Eigen::VectorXcd> data, int dim, int n);
void inverse(Eigen::Ref<Eigen::VectorXcd> data, int dim, int n);

}  // namespace perhom::fft
