#include <doctest.h>

#include <cmath>
#include <numbers>

#include "perhom/drift.hpp"
#include "perhom/paracalc.hpp"
#include "test_support.hpp"

using namespace perhom;

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;

DriftSpec fourier_1d(double a, double b, int k) {
  DriftSpec s;
  s.dim = 1;
  s.terms.push_back({{k, 0, 0}, 0, a, b});
  return s;
}
}  // namespace

TEST_CASE("Fourier drift evaluates to a cos + b sin") {
  const GridPtr g = make_grid(1, 32);
  const PeriodicField f = build_drift(fourier_1d(0.7, -0.3, 3), g);
  CHECK(f.is_real());
  for (double x : {0.0, 0.11, 0.5, 0.93}) {
    Eigen::VectorXd p(1);
    p << x;
    CHECK(f.evaluate(p) == doctest::Approx(0.7 * std::cos(kTwoPi * 3 * x) - 0.3 * std::sin(kTwoPi * 3 * x)));
  }
  DriftSpec bad = fourier_1d(1.0, 0.0, 16);
  CHECK_THROWS_AS(build_drift(bad, g), std::invalid_argument);
  bad = fourier_1d(1.0, 0.0, 1);
  bad.dim = 2;
  CHECK_THROWS(build_drift(bad, g));
}

TEST_CASE("gradient drift is the gradient of its potential") {
  const GridPtr g = make_grid(2, 16);
  DriftSpec s;
  s.kind = DriftSpec::Kind::gradient_of;
  s.dim = 2;
  s.terms.push_back({{1, 2, 0}, 0, 0.4, 0.1});
  s.terms.push_back({{0, 1, 0}, 0, -0.2, 0.3});
  const PeriodicField f = build_potential(s, g);
  const PeriodicField F = build_drift(s, g);
  CHECK(F.components() == 2);
  CHECK(l2_norm(F - gradient(f)) < 1e-14);
}

TEST_CASE("white noise is deterministic and consistent across grids") {
  DriftSpec s;
  s.kind = DriftSpec::Kind::white_noise;
  s.dim = 1;
  s.seed = 42;
  const GridPtr g32 = make_grid(1, 32), g64 = make_grid(1, 64);
  const PeriodicField a = build_drift(s, g32), b = build_drift(s, g32), c = build_drift(s, g64);
  CHECK((a.coeffs() - b.coeffs()).norm() == 0.0);
  CHECK(l2_norm(resample(c, g32) - a) < 1e-15);
  CHECK(std::abs(a.mean()) == 0.0);
  s.seed = 43;
  CHECK(l2_norm(build_drift(s, g32) - a) > 0.1);
  // Unit-variance coefficients: E|F^(k)|^2 = amplitude^2 / 2 per mode (both signs).
  s.seed = 1;
  const GridPtr big = make_grid(1, 1024);
  const PeriodicField w = build_drift(s, big);
  double m2 = 0.0;
  int count = 0;
  for (Index i = 1; i < big->size(); ++i)
    if (!big->is_nyquist(i)) {
      m2 += std::norm(w.coeffs()(i, 0));
      ++count;
    }
  CHECK(m2 / count == doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("mollification keeps low blocks") {
  const GridPtr g = make_grid(1, 64);
  const PeriodicField f = test::random_field(g, 1, 31, 3);
  const PeriodicField top = mollify(f, g->j_max());
  CHECK(l2_norm(top - f) < 1e-14);
  const PeriodicField m1 = mollify(f, 1);
  const BlockDecomposition dec = decompose(f);
  CHECK(l2_norm(m1 - (dec.block(-1) + dec.block(0) + dec.block(1))) < 1e-14);
  CHECK(l2_norm(mollify(m1, 1) - m1) > 0.0);
  CHECK_THROWS_AS(mollify(f, g->j_max() + 1), std::out_of_range);
  CHECK_THROWS_AS(mollify(f, -2), std::out_of_range);
}

TEST_CASE("regime classification") {
  CHECK(classify_regime(2.0, -0.4) == Regime::young);
  CHECK(classify_regime(2.0, -0.5) == Regime::rough);
  CHECK(classify_regime(1.5, -0.2) == Regime::young);
  CHECK(classify_regime(1.5, -0.3) == Regime::rough);
}

TEST_CASE("enhancement matches the resonant product of the integrated derivative") {
  const GridPtr g = make_grid(2, 16);
  const LevySymbol sym(SphericalMeasure::fractional_laplacian(1.6, 2), g);
  const PeriodicField F = test::random_field(g, 2, 7, 17);
  const EnhancedDrift e = enhance(F, sym, -0.35, 0.0);
  CHECK(e.regime == Regime::rough);
  CHECK(static_cast<int>(e.ladder.size()) == g->j_max() + 1);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k) {
        const PeriodicField ref =
            resonant(steady_integral(sym, partial_derivative(F.component(j), i)), F.component(k));
        CHECK(l2_norm(e.E(i, j, k) - ref) < 1e-13);
      }
  const PeriodicField div = e.divergence_resonant(1);
  CHECK(l2_norm(div - resonant(steady_integral(sym, -1.0 * divergence(F)), F.component(1))) < 1e-13);
}
