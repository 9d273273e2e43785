#pragma once

// Core signal types: named multi-axis grids, complex signals stored
// row-major, periodic warps and the unitary axis-wise DFT. Everything here
// is a plain value; operations return new signals and never mutate inputs.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace invlab {

using cdouble = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Index arithmetic with periodic wrap; valid for arbitrarily negative i.
inline std::size_t pmod(long long i, std::size_t n) {
  const long long m = static_cast<long long>(n);
  long long r = i % m;
  if (r < 0) r += m;
  return static_cast<std::size_t>(r);
}

enum class AxisKind { spatial, channel };

struct Axis {
  std::string name;
  std::size_t size = 0;
  AxisKind kind = AxisKind::spatial;
  // Cumulative blur exponent: each pooling step of scale 2^J along this
  // axis adds J, recording the total loss of resolution.
  int resolution_log2 = 0;

  friend bool operator==(const Axis&, const Axis&) = default;
};

// Ordered list of named axes. Signal values are laid out row-major in axis
// order, last axis fastest.
struct Grid {
  std::vector<Axis> axes;

  Grid() = default;
  explicit Grid(std::vector<Axis> ax) : axes(std::move(ax)) {
    for (std::size_t i = 0; i < axes.size(); ++i) {
      if (axes[i].size == 0)
        throw std::invalid_argument("Grid: axis '" + axes[i].name + "' has size zero");
      for (std::size_t j = i + 1; j < axes.size(); ++j)
        if (axes[i].name == axes[j].name)
          throw std::invalid_argument("Grid: duplicate axis name '" + axes[i].name + "'");
    }
  }

  static Grid line(std::string name, std::size_t n, AxisKind kind = AxisKind::spatial) {
    return Grid({Axis{std::move(name), n, kind, 0}});
  }

  std::size_t rank() const { return axes.size(); }

  std::size_t size() const {
    std::size_t s = 1;
    for (const auto& a : axes) s *= a.size;
    return s;
  }

  bool has_axis(std::string_view name) const {
    for (const auto& a : axes)
      if (a.name == name) return true;
    return false;
  }

  std::size_t axis_index(std::string_view name) const {
    for (std::size_t i = 0; i < axes.size(); ++i)
      if (axes[i].name == name) return i;
    throw std::invalid_argument("Grid: unknown axis '" + std::string(name) + "'");
  }

  // Row-major strides (elements), last axis contiguous.
  std::vector<std::size_t> strides() const {
    std::vector<std::size_t> st(axes.size(), 1);
    for (std::size_t i = axes.size(); i-- > 1;) st[i - 1] = st[i] * axes[i].size;
    return st;
  }

  std::size_t flat_index(const std::vector<std::size_t>& coords) const {
    if (coords.size() != axes.size())
      throw std::invalid_argument("Grid: coordinate rank mismatch");
    const auto st = strides();
    std::size_t idx = 0;
    for (std::size_t i = 0; i < coords.size(); ++i) {
      if (coords[i] >= axes[i].size)
        throw std::invalid_argument("Grid: coordinate out of range on axis '" + axes[i].name + "'");
      idx += coords[i] * st[i];
    }
    return idx;
  }

  friend bool operator==(const Grid&, const Grid&) = default;
};

struct Signal {
  Grid grid;
  std::vector<cdouble> values;

  Signal() = default;
  Signal(Grid g, std::vector<cdouble> v) : grid(std::move(g)), values(std::move(v)) {
    if (values.size() != grid.size())
      throw std::invalid_argument("Signal: value count does not match grid size");
    for (const auto& z : values)
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
        throw std::invalid_argument("Signal: non-finite value");
  }

  static Signal zeros(Grid g) {
    const std::size_t n = g.size();
    Signal s;
    s.grid = std::move(g);
    s.values.assign(n, cdouble{});
    return s;
  }

  static Signal delta(Grid g, std::size_t flat = 0) {
    Signal s = zeros(std::move(g));
    s.values.at(flat) = 1.0;
    return s;
  }

  std::size_t size() const { return values.size(); }

  cdouble at(const std::vector<std::size_t>& coords) const {
    return values[grid.flat_index(coords)];
  }
};

inline void require_same_grid(const Signal& a, const Signal& b, const char* who) {
  if (!(a.grid == b.grid))
    throw std::invalid_argument(std::string(who) + ": grids differ");
}

inline Signal operator+(const Signal& a, const Signal& b) {
  require_same_grid(a, b, "operator+");
  Signal out = a;
  for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] += b.values[i];
  return out;
}

inline Signal operator-(const Signal& a, const Signal& b) {
  require_same_grid(a, b, "operator-");
  Signal out = a;
  for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] -= b.values[i];
  return out;
}

inline Signal operator*(cdouble c, const Signal& a) {
  Signal out = a;
  for (auto& v : out.values) v *= c;
  return out;
}

inline double l2_norm(const Signal& z) {
  double s = 0;
  for (const auto& v : z.values) s += std::norm(v);
  return std::sqrt(s);
}

inline double l2_distance(const Signal& a, const Signal& b) {
  require_same_grid(a, b, "l2_distance");
  double s = 0;
  for (std::size_t i = 0; i < a.values.size(); ++i) s += std::norm(a.values[i] - b.values[i]);
  return std::sqrt(s);
}

// Visits every 1-D line along axis k as f(base_offset, stride, length).
template <class F>
void for_each_line(const Grid& g, std::size_t axis_idx, F&& f) {
  const auto st = g.strides();
  const std::size_t n = g.axes.at(axis_idx).size;
  const std::size_t stride = st[axis_idx];
  const std::size_t block = stride * n;
  const std::size_t total = g.size();
  for (std::size_t b = 0; b < total; b += block)
    for (std::size_t r = 0; r < stride; ++r) f(b + r, stride, n);
}

namespace detail {

inline Signal dft_impl(const Signal& z, std::string_view axis, bool inverse) {
  const std::size_t k = z.grid.axis_index(axis);
  const std::size_t n = z.grid.axes[k].size;
  // Twiddle table indexed by (j*u mod n) keeps the trig argument in
  // [0, 2pi) for accuracy at larger n.
  std::vector<cdouble> w(n);
  const double sgn = inverse ? 1.0 : -1.0;
  for (std::size_t m = 0; m < n; ++m)
    w[m] = std::polar(1.0, sgn * kTwoPi * static_cast<double>(m) / static_cast<double>(n));
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));

  Signal out = Signal::zeros(z.grid);
  std::vector<cdouble> line(n);
  for_each_line(z.grid, k, [&](std::size_t base, std::size_t stride, std::size_t len) {
    for (std::size_t u = 0; u < len; ++u) line[u] = z.values[base + u * stride];
    for (std::size_t j = 0; j < len; ++j) {
      cdouble acc{};
      for (std::size_t u = 0; u < len; ++u) acc += line[u] * w[(j * u) % len];
      out.values[base + j * stride] = acc * scale;
    }
  });
  return out;
}

}  // namespace detail

// Unitary DFT along one named axis (1/sqrt(n) normalization both ways),
// so idft(dft(z)) == z and the l2 norm is preserved.
inline Signal dft(const Signal& z, std::string_view axis) {
  return detail::dft_impl(z, axis, false);
}

inline Signal idft(const Signal& z, std::string_view axis) {
  return detail::dft_impl(z, axis, true);
}

// Displacement field tau along one axis, in units of grid samples.
// Boundary handling is periodic everywhere.
struct DeformationField {
  std::string axis;
  std::vector<double> tau;
};

// Elastic size |grad tau|_inf + |hess tau|_inf from centered periodic
// differences: grad = (tau(u+1) - tau(u-1))/2, hess = tau(u+1) - 2 tau(u)
// + tau(u-1).
inline double deformation_metric(const DeformationField& d) {
  const std::size_t n = d.tau.size();
  if (n < 3)
    throw std::invalid_argument("deformation_metric: axis shorter than the stencil");
  double g = 0, h = 0;
  for (std::size_t u = 0; u < n; ++u) {
    const double prev = d.tau[pmod(static_cast<long long>(u) - 1, n)];
    const double next = d.tau[(u + 1) % n];
    g = std::max(g, std::abs(0.5 * (next - prev)));
    h = std::max(h, std::abs(next - 2.0 * d.tau[u] + prev));
  }
  return g + h;
}

// Linear interpolation of a gathered line at a real position, periodic.
// Integer positions sample exactly (no interpolation residue).
inline cdouble lerp_periodic(const std::vector<cdouble>& line, double pos) {
  const std::size_t n = line.size();
  const double f0 = std::floor(pos);
  const double frac = pos - f0;
  const long long i0 = static_cast<long long>(f0);
  const cdouble a = line[pmod(i0, n)];
  if (frac == 0.0) return a;
  const cdouble b = line[pmod(i0 + 1, n)];
  return a + frac * (b - a);
}

// out(u) = z(u - tau(u)) with periodic linear interpolation along d.axis.
// A constant integer tau is an exact cyclic shift.
inline Signal warp(const Signal& z, const DeformationField& d) {
  const std::size_t k = z.grid.axis_index(d.axis);
  const std::size_t n = z.grid.axes[k].size;
  if (d.tau.size() != n)
    throw std::invalid_argument("warp: displacement length does not match axis '" + d.axis + "'");
  Signal out = Signal::zeros(z.grid);
  std::vector<cdouble> line(n);
  for_each_line(z.grid, k, [&](std::size_t base, std::size_t stride, std::size_t len) {
    for (std::size_t u = 0; u < len; ++u) line[u] = z.values[base + u * stride];
    for (std::size_t u = 0; u < len; ++u)
      out.values[base + u * stride] = lerp_periodic(line, static_cast<double>(u) - d.tau[u]);
  });
  return out;
}

}  // namespace invlab
