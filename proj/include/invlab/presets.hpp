#pragma once

// Canonical signals, filter banks and cascades used by the CLI and the
// test suites. Smooth presets are centered at the axis midpoint, matching
// the dilation fixed point.

#include <cmath>
#include <string>
#include <vector>

#include "invlab/cascade.hpp"
#include "invlab/rng.hpp"
#include "invlab/signal.hpp"

namespace invlab::presets {

inline Signal impulse(std::size_t n, std::string axis = "u") {
  return Signal::delta(Grid::line(std::move(axis), n));
}

inline Signal ones(std::size_t n, std::string axis = "u") {
  return Signal(Grid::line(std::move(axis), n), std::vector<cdouble>(n, cdouble{1.0, 0.0}));
}

// exp(-(u-m)^2 / (2 sigma^2)) with m = n/2; sigma defaults to n/8.
inline Signal gaussian_bump(std::size_t n, double sigma = 0.0, std::string axis = "u") {
  if (sigma <= 0.0) sigma = static_cast<double>(n) / 8.0;
  const double m = static_cast<double>(n) / 2.0;
  std::vector<cdouble> v(n);
  for (std::size_t u = 0; u < n; ++u) {
    const double s = static_cast<double>(u) - m;
    v[u] = std::exp(-s * s / (2.0 * sigma * sigma));
  }
  return Signal(Grid::line(std::move(axis), n), std::move(v));
}

// Quadratic-phase tone under a gaussian envelope, centered at m = n/2:
// exp(-(u-m)^2/(2 sigma^2)) * exp(i pi rate (u-m)^2 / n).
inline Signal chirp(std::size_t n, double sigma = 0.0, double rate = 0.5,
                    std::string axis = "u") {
  if (sigma <= 0.0) sigma = static_cast<double>(n) / 8.0;
  const double m = static_cast<double>(n) / 2.0;
  std::vector<cdouble> v(n);
  for (std::size_t u = 0; u < n; ++u) {
    const double s = static_cast<double>(u) - m;
    const double env = std::exp(-s * s / (2.0 * sigma * sigma));
    v[u] = std::polar(env, kPi * rate * s * s / static_cast<double>(n));
  }
  return Signal(Grid::line(std::move(axis), n), std::move(v));
}

inline Signal white_noise(std::size_t n, Rng rng, bool complex_valued = false,
                          std::string axis = "u") {
  std::vector<cdouble> v(n);
  for (auto& z : v) z = complex_valued ? rng.cgaussian() : cdouble{rng.gaussian(), 0.0};
  return Signal(Grid::line(std::move(axis), n), std::move(v));
}

inline Signal random_signal(Grid grid, Rng rng, bool complex_valued = true) {
  const std::size_t n = grid.size();
  std::vector<cdouble> v(n);
  for (auto& z : v) z = complex_valued ? rng.cgaussian() : cdouble{rng.gaussian(), 0.0};
  return Signal(std::move(grid), std::move(v));
}

// ---- filter banks ----

inline FilterBank identity_bank(std::string axis = "u", std::string label = "l1") {
  FilterBank f;
  f.axes = {std::move(axis)};
  f.support = {1};
  f.filters = {{cdouble{1.0, 0.0}}};
  f.new_axis_label = std::move(label);
  return f;
}

// Normalized haar pair {(d0+d1)/sqrt2, (d0-d1)/sqrt2}: tight with
// a = A = sqrt(2).
inline FilterBank haar_pair_bank(std::string axis = "u", std::string label = "l1") {
  const double r = 1.0 / std::sqrt(2.0);
  FilterBank f;
  f.axes = {std::move(axis)};
  f.support = {2};
  f.filters = {{cdouble{r, 0}, cdouble{r, 0}}, {cdouble{r, 0}, cdouble{-r, 0}}};
  f.new_axis_label = std::move(label);
  return f;
}

// Four oriented two-tap complex differences (d0 - i^j d1)/(2 sqrt 2),
// j = 0..3. The oriented phases cancel bin by bin, so the bank is an exact
// tight frame with a = A = 1 on every axis size.
inline FilterBank oriented4_bank(std::string axis = "u", std::string label = "l1") {
  const double scale = 1.0 / (2.0 * std::sqrt(2.0));
  const cdouble i{0.0, 1.0};
  FilterBank f;
  f.axes = {std::move(axis)};
  f.support = {2};
  cdouble rot{1.0, 0.0};
  for (int j = 0; j < 4; ++j) {
    f.filters.push_back({scale * cdouble{1.0, 0.0}, -scale * rot});
    rot *= i;
  }
  f.new_axis_label = std::move(label);
  return f;
}

// Complementary pair defined in frequency: transfer 1 on the low half bins
// for the first filter and on the high half for the second, realized by
// inverse transform of the indicators. Tight with a = A = 1.
inline FilterBank half_band_pair_bank(std::size_t n, std::string axis = "u",
                                      std::string label = "l1") {
  FilterBank f;
  f.axes = {std::move(axis)};
  f.support = {n};
  for (int which = 0; which < 2; ++which) {
    std::vector<cdouble> taps(n, cdouble{});
    for (std::size_t v = 0; v < n; ++v) {
      cdouble acc{};
      for (std::size_t k = (which ? n / 2 : 0); k < (which ? n : n / 2); ++k)
        acc += std::polar(1.0 / static_cast<double>(n),
                          kTwoPi * static_cast<double>((v * k) % n) / static_cast<double>(n));
      taps[v] = acc;
    }
    f.filters.push_back(std::move(taps));
  }
  f.new_axis_label = std::move(label);
  return f;
}

inline FilterBank random_bank(std::size_t count, std::size_t taps, Rng rng,
                              std::string axis = "u", std::string label = "l1") {
  FilterBank f;
  f.axes = {std::move(axis)};
  f.support = {taps};
  for (std::size_t j = 0; j < count; ++j) {
    Rng r = rng.stream(2, j);
    std::vector<cdouble> t(taps);
    for (auto& v : t) v = r.cgaussian();
    f.filters.push_back(std::move(t));
  }
  f.new_axis_label = std::move(label);
  return f;
}

inline PoolingSpec average_pool(std::string axis, int scale_log2, double alpha = 1.0) {
  PoolingSpec p;
  p.axes = {{std::move(axis), scale_log2}};
  p.alpha = alpha;
  p.kernel = PoolKernel::average;
  return p;
}

// Two layers of the oriented tight bank with modulus and average pooling
// along the spatial axis; the workhorse representation for stability runs.
inline CascadeSpec two_layer_modulus_cascade(std::string axis = "u", int j1 = 3, int j2 = 3) {
  CascadeSpec spec;
  spec.layers.push_back({oriented4_bank(axis, "l1"), Nonlinearity::modulus,
                         average_pool(axis, j1)});
  spec.layers.push_back({oriented4_bank(axis, "l2"), Nonlinearity::modulus,
                         average_pool(axis, j2)});
  return spec;
}

}  // namespace invlab::presets
