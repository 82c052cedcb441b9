#include <doctest.h>

#include "perhom/besov.hpp"
#include "perhom/paracalc.hpp"
#include "test_support.hpp"

using namespace perhom;
using perhom::test::random_field;

TEST_CASE("blocks sum to the field and partial sums telescope") {
  const GridPtr g = make_grid(2, 32);
  const PeriodicField u = random_field(g, 1, 15, 1, 0.0, true);
  const BlockDecomposition dec = decompose(u);
  PeriodicField sum(g, 1, true);
  for (int j = -1; j <= dec.j_max; ++j) sum += dec.block(j);
  CHECK(l2_norm(sum - u) < 1e-13);
  CHECK(l2_norm(dec.partial_sum(dec.j_max + 1) - u) < 1e-13);
  CHECK(l2_norm(dec.partial_sum(-1)) == 0.0);
  for (int i = 0; i <= dec.j_max + 1; ++i)
    CHECK(l2_norm(dec.partial_sum(i) - dec.partial_sum(i - 1) - dec.block(i - 1)) < 1e-13);
  CHECK(l2_norm(lp_block(u, 2) - dec.block(2)) < 1e-14);
}

TEST_CASE("Bony decomposition reproduces the product") {
  const GridPtr g = make_grid(1, 128);
  for (std::uint64_t s = 0; s < 10; ++s) {
    const PeriodicField u = random_field(g, 1, 31, 2 * s, 0.0, true);
    const PeriodicField v = random_field(g, 1, 31, 2 * s + 1, 0.0, true);
    const BonyParts b = bony(u, v);
    const PeriodicField uv = multiply(u, v);
    CHECK(l2_norm(b.low_high + b.resonant + b.high_low - uv) <= 1e-12 * l2_norm(uv));
    CHECK(l2_norm(b.low_high - para_lt(u, v)) < 1e-13);
    CHECK(l2_norm(b.high_low - para_lt(v, u)) < 1e-13);
    CHECK(l2_norm(b.resonant - resonant(v, u)) < 1e-13);
  }
}

TEST_CASE("paraproduct has the expected spectral support") {
  const GridPtr g = make_grid(1, 128);
  // u low frequency, v a single high block: u < v keeps v's annulus up to a factor.
  const PeriodicField u = random_field(g, 1, 2, 5, 0.0, true);
  const PeriodicField v = PeriodicField::exponential(g, {32, 0, 0}, 1.0) + PeriodicField::exponential(g, {-32, 0, 0}, 1.0);
  PeriodicField vr = v;
  vr.set_real(true);
  const PeriodicField p = para_lt(u, vr);
  for (Index i = 0; i < g->size(); ++i)
    if (std::abs(p.coeffs()(i, 0)) > 1e-14) CHECK(g->radius(i) >= 29.0);
  // The resonant product of fields in far-apart blocks vanishes.
  const PeriodicField low = random_field(g, 1, 1, 6);
  CHECK(l2_norm(resonant(low, vr)) < 1e-15);
}

TEST_CASE("commutator C1 with and without the precomputed resonant term") {
  const GridPtr g = make_grid(1, 64);
  const PeriodicField a = random_field(g, 1, 20, 11), f = random_field(g, 1, 20, 12), h = random_field(g, 1, 20, 13);
  const PeriodicField c3 = commutator_c1(a, f, h);
  const PeriodicField c4 = commutator_c1(a, f, h, resonant(f, h));
  CHECK(l2_norm(c3 - c4) < 1e-13);
  CHECK(l2_norm(c3 - (resonant(para_lt(a, f), h) - multiply(a, resonant(f, h)))) < 1e-13);
  // 1 < f drops the blocks -1 and 0 of f, so C1(1, f, h) vanishes when f has no modes |k| < 4.
  const PeriodicField one = PeriodicField::constant(g, 1.0);
  PeriodicField f_high = f;
  for (Index i = 0; i < g->size(); ++i)
    if (g->radius(i) < 4.0) f_high.coeffs()(i, 0) = 0.0;
  CHECK(l2_norm(decompose(f_high).block(0)) == 0.0);
  CHECK(l2_norm(commutator_c1(one, f_high, h)) < 1e-13);
}

TEST_CASE("resonant product of vector and scalar fields") {
  const GridPtr g = make_grid(2, 16);
  const PeriodicField v = random_field(g, 2, 5, 31), s = random_field(g, 1, 5, 32);
  const PeriodicField r = resonant(v, s);
  CHECK(r.components() == 2);
  CHECK(l2_norm(r.component(1) - resonant(v.component(1), s)) < 1e-14);
}
