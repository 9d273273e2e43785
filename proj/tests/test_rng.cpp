#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <set>
#include <vector>

#include "invlab/rng.hpp"

using namespace invlab;

TEST_CASE("identical seeds reproduce the sequence", "[rng]") {
  Rng a(42), b(42);
  for (int i = 0; i < 1000; ++i) CHECK(a.u64() == b.u64());
}

TEST_CASE("different seeds diverge immediately", "[rng]") {
  Rng a(1), b(2);
  CHECK(a.u64() != b.u64());
}

TEST_CASE("streams are reproducible and mutually distinct", "[rng]") {
  Rng root(99);
  Rng s1 = root.stream(0, 5);
  Rng s2 = root.stream(0, 5);
  for (int i = 0; i < 100; ++i) CHECK(s1.u64() == s2.u64());

  // deriving a stream leaves the root untouched
  Rng fresh(99);
  (void)fresh.stream(3, 17);
  Rng again(99);
  CHECK(fresh.u64() == again.u64());

  // distinct purpose or index gives a distinct opening value
  std::set<std::uint64_t> firsts;
  for (std::uint64_t p = 0; p < 5; ++p)
    for (std::uint64_t i = 0; i < 5; ++i) firsts.insert(Rng(7).stream(p, i).u64());
  CHECK(firsts.size() == 25);
}

TEST_CASE("uniform values stay inside the unit interval", "[rng]") {
  Rng r(123);
  for (int i = 0; i < 10000; ++i) {
    const double u = r.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("gaussian moments are near standard normal", "[rng]") {
  Rng r(321);
  const int n = 40000;
  double sum = 0, sumsq = 0;
  for (int i = 0; i < n; ++i) {
    const double g = r.gaussian();
    sum += g;
    sumsq += g * g;
  }
  const double mean = sum / n;
  const double var = sumsq / n - mean * mean;
  CHECK(std::abs(mean) < 0.02);
  CHECK(std::abs(var - 1.0) < 0.05);
}

TEST_CASE("complex gaussian has independent unit-variance parts", "[rng]") {
  Rng r(555);
  const int n = 20000;
  double sr = 0, si = 0, srr = 0, sii = 0, sri = 0;
  for (int i = 0; i < n; ++i) {
    const std::complex<double> z = r.cgaussian();
    sr += z.real();
    si += z.imag();
    srr += z.real() * z.real();
    sii += z.imag() * z.imag();
    sri += z.real() * z.imag();
  }
  CHECK(std::abs(sr / n) < 0.03);
  CHECK(std::abs(si / n) < 0.03);
  CHECK(std::abs(srr / n - 1.0) < 0.06);
  CHECK(std::abs(sii / n - 1.0) < 0.06);
  CHECK(std::abs(sri / n) < 0.03);
}

TEST_CASE("below produces the full range", "[rng]") {
  Rng r(777);
  std::vector<int> hits(8, 0);
  for (int i = 0; i < 4000; ++i) {
    const std::size_t k = r.below(8);
    REQUIRE(k < 8);
    ++hits[k];
  }
  for (int h : hits) CHECK(h > 300);
}
