#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "invlab/discover.hpp"
#include "invlab/group.hpp"
#include "invlab/presets.hpp"
#include "invlab/rng.hpp"
#include "invlab/stone.hpp"

using namespace invlab;

namespace {

std::vector<Signal> shift_orbit(const Signal& x0) {
  const std::size_t n = x0.size();
  std::vector<Signal> out;
  for (std::size_t t = 0; t < n; ++t) out.push_back(cyclic_shift(x0, "u", static_cast<long long>(t)));
  return out;
}

std::vector<Signal> transposition_orbit(const Signal& x0) {
  const std::size_t n = x0.size();
  const GroupDescriptor g = transposition_group("u", kTwoPi / static_cast<double>(n));
  std::vector<Signal> out;
  for (std::size_t t = 0; t < n; ++t) out.push_back(act(g, static_cast<double>(t), x0));
  return out;
}

double mean_energy(const std::vector<Signal>& data) {
  double s = 0;
  for (const auto& x : data) s += l2_norm(x) * l2_norm(x);
  return s / static_cast<double>(data.size());
}

// |plain DFT of x0|^2 / n: the analytic eigenvalues of the shift-orbit
// covariance of a real template.
std::vector<double> circulant_eigenvalues(const std::vector<cdouble>& x0) {
  const std::size_t n = x0.size();
  std::vector<double> lam(n);
  for (std::size_t k = 0; k < n; ++k) {
    cdouble acc{};
    for (std::size_t u = 0; u < n; ++u)
      acc += x0[u] * std::polar(1.0, -kTwoPi * static_cast<double>((k * u) % n) /
                                         static_cast<double>(n));
    lam[k] = std::norm(acc) / static_cast<double>(n);
  }
  return lam;
}

DiscoveredBasis basis_from_rows(std::vector<cdouble> rows, std::size_t nrows, std::size_t dim) {
  DiscoveredBasis b;
  b.dim = dim;
  b.rows = nrows;
  b.u = std::move(rows);
  return b;
}

// Random unitary matrix via modified Gram-Schmidt on a complex gaussian.
std::vector<cdouble> random_unitary(std::size_t n, Rng rng) {
  std::vector<cdouble> m(n * n);
  for (auto& v : m) v = rng.cgaussian();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      cdouble proj{};
      for (std::size_t k = 0; k < n; ++k) proj += std::conj(m[j * n + k]) * m[i * n + k];
      for (std::size_t k = 0; k < n; ++k) m[i * n + k] -= proj * m[j * n + k];
    }
    double nr = 0;
    for (std::size_t k = 0; k < n; ++k) nr += std::norm(m[i * n + k]);
    nr = std::sqrt(nr);
    for (std::size_t k = 0; k < n; ++k) m[i * n + k] /= nr;
  }
  return m;
}

double max_uu_defect(const DiscoveredBasis& b) {
  double worst = 0;
  for (std::size_t r = 0; r < b.rows; ++r)
    for (std::size_t s = 0; s < b.rows; ++s) {
      cdouble acc{};
      for (std::size_t k = 0; k < b.dim; ++k)
        acc += b.u[r * b.dim + k] * std::conj(b.u[s * b.dim + k]);
      if (r == s) acc -= 1.0;
      worst = std::max(worst, std::abs(acc));
    }
  return worst;
}

}  // namespace

TEST_CASE("covariance of a lone impulse is rank one", "[discover]") {
  const CovarianceEstimate c = covariance({presets::impulse(4)});
  CHECK(c.sample_count == 1);
  for (std::size_t j = 0; j < 4; ++j)
    for (std::size_t k = 0; k < 4; ++k)
      CHECK(c.sigma[j * 4 + k] == ((j == 0 && k == 0) ? 1.0 : 0.0));
}

TEST_CASE("covariance of an orthonormal family is isotropic", "[discover]") {
  std::vector<Signal> basis;
  for (std::size_t i = 0; i < 8; ++i) basis.push_back(Signal::delta(Grid::line("u", 8), i));
  const CovarianceEstimate c = covariance(basis);
  for (std::size_t j = 0; j < 8; ++j)
    for (std::size_t k = 0; k < 8; ++k)
      CHECK(c.sigma[j * 8 + k] == (j == k ? 0.125 : 0.0));
}

TEST_CASE("shift-orbit covariance matches the analytic circulant form", "[discover]") {
  Rng rng(61);
  const std::size_t n = 8;
  const Signal x0 = presets::white_noise(n, rng.stream(0, 0));
  const std::vector<Signal> orbit = shift_orbit(x0);
  const CovarianceEstimate c = covariance(orbit);

  // oracle: (1/n) sum_t (S_t x0)(S_t x0)^T accumulated directly
  std::vector<double> want(n * n, 0.0);
  for (std::size_t t = 0; t < n; ++t)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k)
        want[j * n + k] += x0.values[(j + n - t) % n].real() * x0.values[(k + n - t) % n].real() /
                           static_cast<double>(n);
  for (std::size_t i = 0; i < n * n; ++i) CHECK(c.sigma[i] == Catch::Approx(want[i]).margin(1e-13));

  // circulant structure: entries depend only on the index difference
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t k = 0; k < n; ++k)
      CHECK(c.sigma[j * n + k] == Catch::Approx(c.sigma[0 * n + (k + n - j) % n]).margin(1e-13));

  // exact symmetry by construction
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t k = 0; k < n; ++k) CHECK(c.sigma[j * n + k] == c.sigma[k * n + j]);
}

TEST_CASE("covariance rejects degenerate datasets", "[discover]") {
  CHECK_THROWS_AS(covariance({}), std::invalid_argument);
  CHECK_THROWS_AS(covariance({presets::impulse(4), presets::impulse(8)}), std::invalid_argument);
}

TEST_CASE("jacobi reconstructs random symmetric matrices", "[discover]") {
  Rng rng(62);
  for (std::size_t n : {5u, 16u, 33u, 64u}) {
    Rng gen = rng.stream(4, n);
    std::vector<double> a(n * n);
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = j; k < n; ++k) a[j * n + k] = a[k * n + j] = gen.gaussian();

    const JacobiResult jr = jacobi_eigensymm(a, n);

    // V Lambda V^T == A
    double err = 0;
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k) {
        double acc = 0;
        for (std::size_t r = 0; r < n; ++r)
          acc += jr.vectors[j * n + r] * jr.eigenvalues[r] * jr.vectors[k * n + r];
        const double d = acc - a[j * n + k];
        err += d * d;
      }
    CHECK(std::sqrt(err) <= 1e-10 * frobenius(a));

    // V^T V == I
    double worst = 0;
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k) {
        double acc = 0;
        for (std::size_t r = 0; r < n; ++r) acc += jr.vectors[r * n + j] * jr.vectors[r * n + k];
        if (j == k) acc -= 1.0;
        worst = std::max(worst, std::abs(acc));
      }
    CHECK(worst <= 1e-10);
  }
}

TEST_CASE("fully degenerate spectra pair by adjacency", "[discover]") {
  CovarianceEstimate c;
  c.n = 4;
  c.sample_count = 1;
  c.sigma.assign(16, 0.0);
  for (std::size_t i = 0; i < 4; ++i) c.sigma[i * 4 + i] = 1.0;
  const EigenPairing p = eigendecompose(c);
  REQUIRE(p.pairs.size() == 2);
  CHECK(p.singletons.empty());
  CHECK(p.pairs[0].a == 0);
  CHECK(p.pairs[0].b == 1);
  CHECK(p.pairs[1].a == 2);
  CHECK(p.pairs[1].b == 3);
  for (double lam : p.eigenvalues) CHECK(lam == 1.0);
}

TEST_CASE("well separated eigenvalues stay singletons", "[discover]") {
  CovarianceEstimate c;
  c.n = 2;
  c.sample_count = 1;
  c.sigma = {3.0, 0.0, 0.0, 1.0};
  const EigenPairing p = eigendecompose(c);
  CHECK(p.pairs.empty());
  REQUIRE(p.singletons.size() == 2);
  CHECK(p.singletons[0].eigenvalue == 3.0);
  CHECK(p.singletons[1].eigenvalue == 1.0);
  CHECK(p.eigenvectors[0 * 2 + 0] == 1.0);
  CHECK(p.eigenvectors[1 * 2 + 1] == 1.0);
  CHECK(p.eigenvectors[0 * 2 + 1] == 0.0);
  CHECK(p.eigenvectors[1 * 2 + 0] == 0.0);
}

TEST_CASE("eigendecompose rejects asymmetric input", "[discover]") {
  CovarianceEstimate c;
  c.n = 2;
  c.sample_count = 1;
  c.sigma = {1.0, 0.5, 0.25, 1.0};
  CHECK_THROWS_AS(eigendecompose(c), std::invalid_argument);
}

TEST_CASE("shift-orbit eigenvalues follow the spectrum of the template", "[discover]") {
  Rng rng(63);
  const std::size_t n = 8;
  const Signal x0 = presets::white_noise(n, rng.stream(0, 1));
  const EigenPairing p = eigendecompose(covariance(shift_orbit(x0)));

  std::vector<double> want = circulant_eigenvalues(x0.values);
  std::sort(want.begin(), want.end(), std::greater<>());
  REQUIRE(p.eigenvalues.size() == n);
  for (std::size_t i = 0; i < n; ++i)
    CHECK(p.eigenvalues[i] == Catch::Approx(want[i]).margin(1e-10));

  // frequencies 1, 2, 3 are doubly degenerate; 0 and n/2 are simple
  CHECK(p.pairs.size() == 3);
  CHECK(p.singletons.size() == 2);

  // the partition covers every index exactly once
  std::vector<int> seen(n, 0);
  for (const auto& pr : p.pairs) {
    ++seen[pr.a];
    ++seen[pr.b];
  }
  for (const auto& sg : p.singletons) ++seen[sg.index];
  for (int s : seen) CHECK(s == 1);
}

TEST_CASE("complex rows align with the Fourier modes of the shift group", "[discover]") {
  Rng rng(64);
  const std::size_t n = 8;
  const Signal x0 = presets::white_noise(n, rng.stream(0, 2));
  const EigenPairing p = eigendecompose(covariance(shift_orbit(x0)));
  const DiscoveredBasis b = build_complex_basis(p);
  REQUIRE(b.rows == p.pairs.size() + p.singletons.size());
  CHECK(max_uu_defect(b) <= 1e-10);

  const DiagonalizingBasis fourier = basis_for(translation_group("u"), n);
  auto fourier_row = [&](std::size_t k) {
    return std::vector<cdouble>(fourier.transform.begin() + static_cast<long>(k * n),
                                fourier.transform.begin() + static_cast<long>((k + 1) * n));
  };
  const std::vector<double> lam = circulant_eigenvalues(x0.values);

  // match each pair to the frequency with the same eigenvalue, then compare
  // the real eigenplane with the span of the two conjugate Fourier modes
  for (const auto& pr : p.pairs) {
    std::size_t kbest = 1;
    for (std::size_t k = 1; k < n / 2; ++k)
      if (std::abs(lam[k] - pr.eigenvalue) < std::abs(lam[kbest] - pr.eigenvalue)) kbest = k;
    std::vector<cdouble> va(n), vb(n);
    for (std::size_t r = 0; r < n; ++r) {
      va[r] = p.eigenvectors[r * n + pr.a];
      vb[r] = p.eigenvectors[r * n + pr.b];
    }
    const double angle = max_principal_angle({va, vb}, {fourier_row(kbest), fourier_row(n - kbest)});
    CHECK(angle <= 1e-6);
  }
  for (const auto& sg : p.singletons) {
    const std::size_t k = (std::abs(lam[0] - sg.eigenvalue) <= std::abs(lam[n / 2] - sg.eigenvalue))
                              ? 0
                              : n / 2;
    std::vector<cdouble> v(n);
    for (std::size_t r = 0; r < n; ++r) v[r] = p.eigenvectors[r * n + sg.index];
    CHECK(max_principal_angle({v}, {fourier_row(k)}) <= 1e-6);
  }
}

TEST_CASE("all-singleton pairings produce a real basis", "[discover]") {
  CovarianceEstimate c;
  c.n = 3;
  c.sample_count = 1;
  c.sigma = {5.0, 0, 0, 0, 3.0, 0, 0, 0, 1.0};
  const DiscoveredBasis b = build_complex_basis(eigendecompose(c));
  REQUIRE(b.rows == 3);
  for (const auto& v : b.u) CHECK(v.imag() == 0.0);
  CHECK(max_uu_defect(b) <= 1e-12);
}

TEST_CASE("a single pair becomes one unit complex row", "[discover]") {
  CovarianceEstimate c;
  c.n = 2;
  c.sample_count = 1;
  c.sigma = {1.0, 0.0, 0.0, 1.0};
  const DiscoveredBasis b = build_complex_basis(eigendecompose(c));
  REQUIRE(b.rows == 1);
  double nr = 0;
  for (const auto& v : b.u) nr += std::norm(v);
  CHECK(std::sqrt(nr) == Catch::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("objective of a singleton dataset vanishes", "[discover]") {
  Rng rng(65);
  const Signal x = presets::white_noise(8, rng.stream(0, 3));
  DiscoveredBasis b = discover({x});
  CHECK(b.objective == 0.0);
}

TEST_CASE("discovery collapses the objective on a shift orbit", "[discover]") {
  Rng rng(66);
  const std::size_t n = 8;
  const Signal x0 = presets::white_noise(n, rng.stream(0, 4));
  const std::vector<Signal> orbit = shift_orbit(x0);
  const double energy = mean_energy(orbit);

  DiscoveredBasis b = discover(orbit);
  CHECK(b.objective <= 1e-10 * energy);
  CHECK(max_uu_defect(b) <= 1e-10);

  // the identity basis sees the variability that the discovered one removed
  std::vector<cdouble> eye(n * n, cdouble{});
  for (std::size_t i = 0; i < n; ++i) eye[i * n + i] = 1.0;
  DiscoveredBasis ident = basis_from_rows(std::move(eye), n, n);
  CHECK(invariance_objective(ident, orbit) > 0.01 * energy);

  // and it beats 100 seeded random unitary bases
  for (std::size_t trial = 0; trial < 100; ++trial) {
    DiscoveredBasis cand =
        basis_from_rows(random_unitary(n, rng.stream(3, trial)), n, n);
    CHECK(b.objective <= invariance_objective(cand, orbit));
  }
}

TEST_CASE("discovery on white noise admits it found nothing", "[discover]") {
  Rng rng(67);
  const std::size_t n = 8;
  std::vector<Signal> data;
  for (std::size_t i = 0; i < 512; ++i) data.push_back(presets::white_noise(n, rng.stream(1, i)));

  DiscoveredBasis b = discover(data);
  std::vector<cdouble> eye(n * n, cdouble{});
  for (std::size_t i = 0; i < n; ++i) eye[i * n + i] = 1.0;
  DiscoveredBasis ident = basis_from_rows(std::move(eye), n, n);
  const double base = invariance_objective(ident, data);
  CHECK(std::abs(b.objective - base) <= 0.1 * base);
}

TEST_CASE("transposition orbits reveal the one-hot eigenbasis", "[discover]") {
  Rng rng(68);
  const std::size_t n = 8;
  const Signal x0 = presets::white_noise(n, rng.stream(0, 5), true);
  const std::vector<Signal> orbit = transposition_orbit(x0);

  DiscoveredBasis b = discover(orbit);
  CHECK(b.objective <= 1e-10 * mean_energy(orbit));
  REQUIRE(b.rows == n);  // all moduli |x0(u)| distinct: no degeneracy

  // every row concentrates on a single sample coordinate, matching the
  // diagonal basis of the transposition group
  for (std::size_t r = 0; r < n; ++r) {
    double best = 0, total = 0;
    std::size_t arg = 0;
    for (std::size_t k = 0; k < n; ++k) {
      const double m = std::abs(b.u[r * n + k]);
      total += m * m;
      if (m > best) {
        best = m;
        arg = k;
      }
    }
    CHECK(best * best >= (1.0 - 1e-12) * total);
    std::vector<cdouble> row(b.u.begin() + static_cast<long>(r * n),
                             b.u.begin() + static_cast<long>((r + 1) * n));
    std::vector<cdouble> onehot(n, cdouble{});
    onehot[arg] = 1.0;
    CHECK(max_principal_angle({row}, {onehot}) <= 1e-6);
  }
}

TEST_CASE("discovery ignores dataset ordering", "[discover]") {
  Rng rng(69);
  const Signal x0 = presets::white_noise(8, rng.stream(0, 6));
  std::vector<Signal> orbit = shift_orbit(x0);
  std::vector<Signal> reversed(orbit.rbegin(), orbit.rend());

  const CovarianceEstimate ca = covariance(orbit);
  const CovarianceEstimate cb = covariance(reversed);
  for (std::size_t i = 0; i < ca.sigma.size(); ++i)
    CHECK(ca.sigma[i] == Catch::Approx(cb.sigma[i]).margin(1e-13));

  DiscoveredBasis a = discover(orbit);
  DiscoveredBasis b = discover(reversed);
  CHECK(std::abs(a.objective - b.objective) <= 1e-10 * (1.0 + mean_energy(orbit)));
}

TEST_CASE("principal angles behave on known spans", "[discover]") {
  const std::size_t n = 4;
  auto e = [n](std::size_t i) {
    std::vector<cdouble> v(n, cdouble{});
    v[i] = 1.0;
    return v;
  };

  CHECK(max_principal_angle({e(0)}, {e(0)}) <= 1e-12);
  CHECK(max_principal_angle({e(0)}, {e(1)}) == Catch::Approx(kPi / 2.0).epsilon(1e-12));

  std::vector<cdouble> diag(n, cdouble{});
  diag[0] = diag[1] = 1.0 / std::sqrt(2.0);
  CHECK(max_principal_angle({e(0)}, {diag}) == Catch::Approx(kPi / 4.0).epsilon(1e-12));

  // a global phase does not move the span
  std::vector<cdouble> phased = e(0);
  for (auto& v : phased) v *= std::polar(1.0, 1.1);
  CHECK(max_principal_angle({phased}, {e(0)}) <= 1e-7);

  // the same plane written in two bases
  std::vector<cdouble> sum(n, cdouble{}), dif(n, cdouble{});
  sum[0] = sum[1] = 1.0 / std::sqrt(2.0);
  dif[0] = 1.0 / std::sqrt(2.0);
  dif[1] = -1.0 / std::sqrt(2.0);
  CHECK(max_principal_angle({e(0), e(1)}, {sum, dif}) <= 1e-7);

  // planes sharing one direction meet at a right angle in the other
  CHECK(max_principal_angle({e(0), e(1)}, {e(0), e(2)}) == Catch::Approx(kPi / 2.0).epsilon(1e-12));

  CHECK_THROWS_AS(max_principal_angle({}, {}), std::invalid_argument);
  CHECK_THROWS_AS(max_principal_angle({e(0)}, {e(0), e(1)}), std::invalid_argument);
  CHECK_THROWS_AS(max_principal_angle({std::vector<cdouble>(n, cdouble{})}, {e(0)}),
                  std::invalid_argument);
}
