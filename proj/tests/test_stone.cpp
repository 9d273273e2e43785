#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "invlab/presets.hpp"
#include "invlab/rng.hpp"
#include "invlab/stone.hpp"

using namespace invlab;

TEST_CASE("translation basis reproduces the known frequencies", "[stone]") {
  const DiagonalizingBasis b = basis_for(translation_group("u"), 4);
  const double want[4] = {0.0, kPi / 2.0, kPi, -kPi / 2.0};
  for (std::size_t k = 0; k < 4; ++k) CHECK(b.frequencies[k] == Catch::Approx(want[k]).margin(1e-14));
  CHECK(unitarity_defect(b) <= 1e-10);
  // |O_{ku}| = 1/2 everywhere for the N=4 Fourier basis
  for (const auto& v : b.transform) CHECK(std::abs(v) == Catch::Approx(0.5).epsilon(1e-13));
}

TEST_CASE("transposition basis is diagonal in sample space", "[stone]") {
  const DiagonalizingBasis b = basis_for(transposition_group("u", kTwoPi / 8.0), 8);
  CHECK(unitarity_defect(b) == 0.0);
  for (std::size_t j = 0; j < 8; ++j)
    for (std::size_t k = 0; k < 8; ++k)
      CHECK(b.transform[j * 8 + k] == (j == k ? cdouble{1.0, 0.0} : cdouble{}));
  // frequencies are fixed by the requirement that the spectral form match
  // the action itself; check that, not a sign convention
  Rng rng(21);
  const Signal x = presets::random_signal(Grid::line("u", 8), rng.stream(0, 0));
  for (double t : {0.5, 1.0, 2.75}) CHECK(verify_diagonalization(b, t, x) <= 1e-10);
}

TEST_CASE("basis_for rejects the dilation group", "[stone]") {
  CHECK_THROWS_AS(basis_for(dilation_group("u"), 8), std::invalid_argument);
}

TEST_CASE("diagonalization residual vanishes across random pairs", "[stone]") {
  Rng rng(22);
  for (std::size_t n : {8u, 64u}) {
    const DiagonalizingBasis tr = basis_for(translation_group("u"), n);
    const DiagonalizingBasis tp = basis_for(transposition_group("u", kTwoPi / static_cast<double>(n)), n);
    for (int trial = 0; trial < 20; ++trial) {
      const Signal x = presets::random_signal(Grid::line("u", n), rng.stream(0, 100 * n + trial));
      const double t_int = static_cast<double>(1 + rng.stream(4, trial).below(n - 1));
      const double t_real = 4.0 * rng.stream(4, 1000 + trial).uniform() - 2.0;
      CHECK(verify_diagonalization(tr, t_int, x) <= 1e-10);
      CHECK(verify_diagonalization(tp, t_real, x) <= 1e-10);
    }
  }
}

TEST_CASE("residual at t = 0 is exactly zero", "[stone]") {
  Rng rng(23);
  const Signal x = presets::random_signal(Grid::line("u", 16), rng.stream(0, 1));
  const DiagonalizingBasis b = basis_for(translation_group("u"), 16);
  CHECK(verify_diagonalization(b, 0.0, x) <= 1e-12);
}

TEST_CASE("perturbed frequencies break the diagonalization", "[stone]") {
  Rng rng(24);
  const Signal x = presets::random_signal(Grid::line("u", 16), rng.stream(0, 2));
  DiagonalizingBasis b = basis_for(translation_group("u"), 16);
  for (auto& w : b.frequencies) w += 0.8;
  double worst = 0;
  for (double t : {1.0, 2.0, 3.0}) worst = std::max(worst, verify_diagonalization(b, t, x));
  CHECK(worst > 0.1);
}

TEST_CASE("stone invariant of the impulse is flat", "[stone]") {
  const DiagonalizingBasis b = basis_for(translation_group("u"), 4);
  const Signal inv = stone_invariant(presets::impulse(4), b);
  for (const auto& v : inv.values) {
    CHECK(v.real() == Catch::Approx(0.5).epsilon(1e-13));
    CHECK(v.imag() == 0.0);
  }
}

TEST_CASE("stone invariant is constant along full integer orbits", "[stone]") {
  Rng rng(25);
  for (std::size_t n : {8u, 64u}) {
    const DiagonalizingBasis tr = basis_for(translation_group("u"), n);
    const DiagonalizingBasis tp = basis_for(transposition_group("u", kTwoPi / static_cast<double>(n)), n);
    const Signal x = presets::random_signal(Grid::line("u", n), rng.stream(0, n));
    const Signal ref_tr = stone_invariant(x, tr);
    const Signal ref_tp = stone_invariant(x, tp);
    const double nx = l2_norm(x);
    double worst = 0;
    for (std::size_t t = 1; t < n; ++t) {
      const double td = static_cast<double>(t);
      worst = std::max(worst, l2_distance(stone_invariant(act(tr.group, td, x), tr), ref_tr) / nx);
      worst = std::max(worst, l2_distance(stone_invariant(act(tp.group, td, x), tp), ref_tp) / nx);
    }
    CHECK(worst <= 1e-10);
  }
}

TEST_CASE("modulus after the basis is non-expansive", "[stone]") {
  Rng rng(26);
  const DiagonalizingBasis b = basis_for(translation_group("u"), 32);
  for (int trial = 0; trial < 100; ++trial) {
    const Signal x = presets::random_signal(Grid::line("u", 32), rng.stream(0, 2 * trial));
    const Signal y = presets::random_signal(Grid::line("u", 32), rng.stream(0, 2 * trial + 1));
    const double lhs = l2_distance(stone_invariant(x, b), stone_invariant(y, b));
    CHECK(lhs <= l2_distance(x, y) + 1e-12);
  }
}

TEST_CASE("the invariant forgets phase, so it cannot be injective", "[stone]") {
  Rng rng(27);
  const std::size_t n = 16;
  const DiagonalizingBasis b = basis_for(translation_group("u"), n);
  const Signal x = presets::random_signal(Grid::line("u", n), rng.stream(0, 9));

  // scramble the phases of O x and map back: same invariant by construction
  std::vector<cdouble> xh = basis_apply(b, x.values);
  Rng ph = rng.stream(4, 9);
  for (auto& v : xh) v *= std::polar(1.0, kTwoPi * ph.uniform());
  const Signal y(x.grid, basis_apply_adjoint(b, xh));

  CHECK(l2_distance(stone_invariant(x, b), stone_invariant(y, b)) <= 1e-10 * l2_norm(x));

  // y is not any translate of x, so the equal invariants witness information loss
  double closest = l2_norm(x);
  for (std::size_t t = 0; t < n; ++t)
    closest = std::min(closest, l2_distance(y, act(b.group, static_cast<double>(t), x)));
  CHECK(closest > 0.1 * l2_norm(x));
}

TEST_CASE("mismatched sizes are rejected", "[stone]") {
  const DiagonalizingBasis b = basis_for(translation_group("u"), 8);
  const Signal x = presets::impulse(4);
  CHECK_THROWS_AS(stone_invariant(x, b), std::invalid_argument);
  CHECK_THROWS_AS(verify_diagonalization(b, 1.0, x), std::invalid_argument);
}
