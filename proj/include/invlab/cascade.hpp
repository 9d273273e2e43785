#pragma once

// Convolutional cascade: filter banks applied by circular convolution along
// named axes (each bank adds a channel axis), pointwise nonlinearities,
// box/max pooling with power-of-two windows and strides, and the layered
// composition of all three. Frame bounds come from the bank's transfer
// functions: with the unitary DFT convention used here,
//   ||z||^2 = sum_k |x^(k)|^2 * G(k),  G(k) = sum_lambda |Psi_lambda(k)|^2,
// where Psi_lambda is the plain (unnormalized) length-n DFT of the taps, so
// a = sqrt(min_k G) and A = sqrt(max_k G) sandwich ||z|| between a||x|| and
// A||x||.

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "invlab/group.hpp"
#include "invlab/signal.hpp"

namespace invlab {

struct FilterBank {
  std::vector<std::string> axes;              // convolved axes (1 or 2)
  std::vector<std::size_t> support;           // taps per axis
  std::vector<std::vector<cdouble>> filters;  // taps, row-major over support
  std::string new_axis_label;

  void check() const {
    if (axes.empty() || axes.size() > 2)
      throw std::invalid_argument("FilterBank: expected one or two convolution axes");
    if (support.size() != axes.size())
      throw std::invalid_argument("FilterBank: support rank does not match axes");
    if (axes.size() == 2 && axes[0] == axes[1])
      throw std::invalid_argument("FilterBank: convolution axes must be distinct");
    std::size_t len = 1;
    for (std::size_t s : support) {
      if (s == 0) throw std::invalid_argument("FilterBank: empty support");
      len *= s;
    }
    if (filters.empty()) throw std::invalid_argument("FilterBank: no filters");
    for (const auto& f : filters) {
      if (f.size() != len) throw std::invalid_argument("FilterBank: tap count does not match support");
      for (const auto& v : f)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
          throw std::invalid_argument("FilterBank: non-finite tap");
    }
  }
};

// Circular convolution of x with every filter; the output grid gains a
// channel axis named f.new_axis_label (size = filter count, appended last,
// so it is the fastest-varying coordinate).
inline Signal filter_bank_apply(const Signal& x, const FilterBank& f) {
  f.check();
  if (x.grid.has_axis(f.new_axis_label))
    throw std::invalid_argument("filter_bank_apply: axis '" + f.new_axis_label + "' already exists");

  const auto st = x.grid.strides();
  std::vector<std::size_t> ax(f.axes.size()), n(f.axes.size()), stride(f.axes.size());
  for (std::size_t i = 0; i < f.axes.size(); ++i) {
    ax[i] = x.grid.axis_index(f.axes[i]);
    n[i] = x.grid.axes[ax[i]].size;
    stride[i] = st[ax[i]];
    if (f.support[i] > n[i])
      throw std::invalid_argument("filter_bank_apply: support exceeds axis '" + f.axes[i] + "'");
  }

  const std::size_t nf = f.filters.size();
  Grid out_grid = x.grid;
  out_grid.axes.push_back(Axis{f.new_axis_label, nf, AxisKind::channel, 0});
  Signal out = Signal::zeros(out_grid);

  const std::size_t total = x.grid.size();
  if (f.axes.size() == 1) {
    const std::size_t L = f.support[0];
    for (std::size_t i = 0; i < total; ++i) {
      const std::size_t c = (i / stride[0]) % n[0];
      const std::size_t base = i - c * stride[0];
      for (std::size_t lam = 0; lam < nf; ++lam) {
        const auto& taps = f.filters[lam];
        cdouble acc{};
        for (std::size_t v = 0; v < L; ++v) {
          const std::size_t src = pmod(static_cast<long long>(c) - static_cast<long long>(v), n[0]);
          acc += taps[v] * x.values[base + src * stride[0]];
        }
        out.values[i * nf + lam] = acc;
      }
    }
  } else {
    const std::size_t L0 = f.support[0], L1 = f.support[1];
    for (std::size_t i = 0; i < total; ++i) {
      const std::size_t c0 = (i / stride[0]) % n[0];
      const std::size_t c1 = (i / stride[1]) % n[1];
      const std::size_t base = i - c0 * stride[0] - c1 * stride[1];
      for (std::size_t lam = 0; lam < nf; ++lam) {
        const auto& taps = f.filters[lam];
        cdouble acc{};
        for (std::size_t v0 = 0; v0 < L0; ++v0) {
          const std::size_t s0 = pmod(static_cast<long long>(c0) - static_cast<long long>(v0), n[0]);
          for (std::size_t v1 = 0; v1 < L1; ++v1) {
            const std::size_t s1 = pmod(static_cast<long long>(c1) - static_cast<long long>(v1), n[1]);
            acc += taps[v0 * L1 + v1] * x.values[base + s0 * stride[0] + s1 * stride[1]];
          }
        }
        out.values[i * nf + lam] = acc;
      }
    }
  }
  return out;
}

// Frame bounds (a, A) of a 1-D bank on an axis of size n.
inline std::pair<double, double> frame_bounds(const FilterBank& f, std::size_t n) {
  f.check();
  if (f.axes.size() != 1)
    throw std::invalid_argument("frame_bounds: expected a 1-D bank");
  if (n == 0 || f.support[0] > n)
    throw std::invalid_argument("frame_bounds: support exceeds the bin count");
  double lo = 0, hi = 0;
  for (std::size_t k = 0; k < n; ++k) {
    double g = 0;
    for (const auto& taps : f.filters) {
      cdouble t{};
      for (std::size_t v = 0; v < taps.size(); ++v)
        t += taps[v] * std::polar(1.0, -kTwoPi * static_cast<double>((v * k) % n) /
                                           static_cast<double>(n));
      g += std::norm(t);
    }
    if (k == 0) {
      lo = hi = g;
    } else {
      lo = std::min(lo, g);
      hi = std::max(hi, g);
    }
  }
  return {std::sqrt(lo), std::sqrt(hi)};
}

// Frame bounds of a 2-D bank over n0 x n1 bins.
inline std::pair<double, double> frame_bounds(const FilterBank& f, std::size_t n0, std::size_t n1) {
  f.check();
  if (f.axes.size() != 2)
    throw std::invalid_argument("frame_bounds: expected a 2-D bank");
  if (f.support[0] > n0 || f.support[1] > n1)
    throw std::invalid_argument("frame_bounds: support exceeds the bin count");
  double lo = 0, hi = 0;
  bool first = true;
  for (std::size_t k0 = 0; k0 < n0; ++k0)
    for (std::size_t k1 = 0; k1 < n1; ++k1) {
      double g = 0;
      for (const auto& taps : f.filters) {
        cdouble t{};
        for (std::size_t v0 = 0; v0 < f.support[0]; ++v0)
          for (std::size_t v1 = 0; v1 < f.support[1]; ++v1) {
            const double ph = kTwoPi * (static_cast<double>((v0 * k0) % n0) / static_cast<double>(n0) +
                                        static_cast<double>((v1 * k1) % n1) / static_cast<double>(n1));
            t += taps[v0 * f.support[1] + v1] * std::polar(1.0, -ph);
          }
        g += std::norm(t);
      }
      if (first) {
        lo = hi = g;
        first = false;
      } else {
        lo = std::min(lo, g);
        hi = std::max(hi, g);
      }
    }
  return {std::sqrt(lo), std::sqrt(hi)};
}

enum class Nonlinearity { none, modulus, relu };

// Pointwise nonlinearity. modulus maps to the real signal |z|; relu clamps
// the real part at zero and rejects signals with a nonzero imaginary part.
// Both are non-expansive in l2.
inline Signal nonlinearity_apply(const Signal& z, Nonlinearity kind) {
  switch (kind) {
    case Nonlinearity::none:
      return z;
    case Nonlinearity::modulus: {
      Signal out = z;
      for (auto& v : out.values) v = cdouble{std::abs(v), 0.0};
      return out;
    }
    case Nonlinearity::relu: {
      Signal out = z;
      for (auto& v : out.values) {
        if (v.imag() != 0.0)
          throw std::invalid_argument("nonlinearity_apply: relu on a signal with nonzero imaginary part");
        v = cdouble{std::max(v.real(), 0.0), 0.0};
      }
      return out;
    }
  }
  throw std::invalid_argument("nonlinearity_apply: unknown nonlinearity");
}

enum class PoolKernel { average, max };

// Pooling at scale 2^J: a periodic window of width 2^J anchored at the
// output sample (u .. u+2^J-1), decimated with stride 2^round(alpha*J).
// The average kernel weighs each sample 2^-J, so constants are preserved
// and the map is non-expansive; max requires a real signal.
struct PoolingSpec {
  struct AxisScale {
    std::string axis;
    int scale_log2 = 0;  // J
  };
  std::vector<AxisScale> axes;  // pooled in the order given
  double alpha = 1.0;           // subsampling exponent in [0, 1]
  PoolKernel kernel = PoolKernel::average;
};

namespace detail {

inline std::pair<std::size_t, std::size_t> pool_geometry(const PoolingSpec& p,
                                                         const PoolingSpec::AxisScale& as,
                                                         std::size_t n) {
  if (as.scale_log2 < 0) throw std::invalid_argument("pool: negative scale");
  if (p.alpha < 0.0 || p.alpha > 1.0) throw std::invalid_argument("pool: alpha outside [0, 1]");
  const std::size_t width = std::size_t{1} << as.scale_log2;
  if (width > n)
    throw std::invalid_argument("pool: window 2^J exceeds axis '" + as.axis + "'");
  const long r = std::lround(p.alpha * static_cast<double>(as.scale_log2));
  const std::size_t factor = std::size_t{1} << r;
  if (n % factor != 0)
    throw std::invalid_argument("pool: downsampling factor does not divide axis '" + as.axis + "'");
  return {width, factor};
}

}  // namespace detail

inline Signal pool(const Signal& z, const PoolingSpec& p) {
  Signal cur = z;
  for (const auto& as : p.axes) {
    const std::size_t k = cur.grid.axis_index(as.axis);
    const std::size_t n = cur.grid.axes[k].size;
    const auto [width, factor] = detail::pool_geometry(p, as, n);
    const std::size_t n_out = n / factor;

    Grid g = cur.grid;
    g.axes[k].size = n_out;
    g.axes[k].resolution_log2 += as.scale_log2;
    Signal out = Signal::zeros(g);

    const auto st = cur.grid.strides();
    const std::size_t stride = st[k];
    const std::size_t outer = cur.grid.size() / (n * stride);
    std::vector<cdouble> line(n);
    for (std::size_t b = 0; b < outer; ++b) {
      for (std::size_t r = 0; r < stride; ++r) {
        const std::size_t base_in = b * n * stride + r;
        const std::size_t base_out = b * n_out * stride + r;
        for (std::size_t u = 0; u < n; ++u) line[u] = cur.values[base_in + u * stride];
        for (std::size_t j = 0; j < n_out; ++j) {
          const std::size_t u0 = j * factor;
          if (p.kernel == PoolKernel::average) {
            cdouble acc{};
            for (std::size_t v = 0; v < width; ++v) acc += line[(u0 + v) % n];
            out.values[base_out + j * stride] = acc / static_cast<double>(width);
          } else {
            double best = 0;
            for (std::size_t v = 0; v < width; ++v) {
              const cdouble s = line[(u0 + v) % n];
              if (s.imag() != 0.0)
                throw std::invalid_argument("pool: max kernel on a signal with nonzero imaginary part");
              best = (v == 0) ? s.real() : std::max(best, s.real());
            }
            out.values[base_out + j * stride] = cdouble{best, 0.0};
          }
        }
      }
    }
    cur = std::move(out);
  }
  return cur;
}

struct CascadeLayer {
  FilterBank bank;
  Nonlinearity nonlinearity = Nonlinearity::modulus;
  std::optional<PoolingSpec> pooling;
};

struct CascadeSpec {
  std::vector<CascadeLayer> layers;
};

struct LayerOutput {
  std::vector<Signal> stages;  // one per layer; just {x} for an empty spec
  const Signal& final() const { return stages.back(); }
};

// Predicted grid after each layer, derived from the declared axis chain
// alone. cascade_apply must produce exactly these grids.
inline std::vector<Grid> predict_grids(const CascadeSpec& spec, Grid g) {
  std::vector<Grid> out;
  for (const auto& layer : spec.layers) {
    layer.bank.check();
    for (std::size_t i = 0; i < layer.bank.axes.size(); ++i) {
      const std::size_t k = g.axis_index(layer.bank.axes[i]);
      if (layer.bank.support[i] > g.axes[k].size)
        throw std::invalid_argument("predict_grids: support exceeds axis '" + layer.bank.axes[i] + "'");
    }
    if (g.has_axis(layer.bank.new_axis_label))
      throw std::invalid_argument("predict_grids: axis '" + layer.bank.new_axis_label + "' already exists");
    g.axes.push_back(Axis{layer.bank.new_axis_label, layer.bank.filters.size(), AxisKind::channel, 0});
    if (layer.pooling) {
      for (const auto& as : layer.pooling->axes) {
        const std::size_t k = g.axis_index(as.axis);
        const auto [width, factor] = detail::pool_geometry(*layer.pooling, as, g.axes[k].size);
        (void)width;
        g.axes[k].size /= factor;
        g.axes[k].resolution_log2 += as.scale_log2;
      }
    }
    out.push_back(g);
  }
  return out;
}

inline LayerOutput cascade_apply(const Signal& x, const CascadeSpec& spec) {
  LayerOutput lo;
  if (spec.layers.empty()) {
    lo.stages.push_back(x);
    return lo;
  }
  Signal cur = x;
  for (const auto& layer : spec.layers) {
    cur = filter_bank_apply(cur, layer.bank);
    cur = nonlinearity_apply(cur, layer.nonlinearity);
    if (layer.pooling) cur = pool(cur, *layer.pooling);
    lo.stages.push_back(cur);
  }
  return lo;
}

// Bank of rotated copies of a square 2-D filter (odd side). Each copy is
// resampled by bilinear interpolation about the center, with samples
// falling outside the support treated as zero, then rescaled back to the
// l2 norm of h0. Source coordinates within 1e-9 of a lattice point are
// snapped, so quarter-turn angles reproduce index permutations exactly.
inline FilterBank rotated_bank(const std::vector<cdouble>& h0, std::size_t side,
                               const std::vector<double>& angles, std::string axis_row,
                               std::string axis_col, std::string new_axis_label) {
  if (side == 0 || side % 2 == 0)
    throw std::invalid_argument("rotated_bank: side must be odd");
  if (h0.size() != side * side)
    throw std::invalid_argument("rotated_bank: tap count does not match side*side");
  if (angles.empty()) throw std::invalid_argument("rotated_bank: no angles");

  double norm0 = 0;
  for (const auto& v : h0) norm0 += std::norm(v);
  norm0 = std::sqrt(norm0);

  const double m = static_cast<double>(side - 1) / 2.0;
  auto snap = [](double v) {
    const double r = std::round(v);
    return (std::abs(v - r) < 1e-9) ? r : v;
  };
  auto sample = [&](long long iy, long long ix) -> cdouble {
    if (iy < 0 || ix < 0 || iy >= static_cast<long long>(side) || ix >= static_cast<long long>(side))
      return cdouble{};
    return h0[static_cast<std::size_t>(iy) * side + static_cast<std::size_t>(ix)];
  };

  FilterBank f;
  f.axes = {std::move(axis_row), std::move(axis_col)};
  f.support = {side, side};
  f.new_axis_label = std::move(new_axis_label);

  for (double theta : angles) {
    if (!std::isfinite(theta)) throw std::invalid_argument("rotated_bank: non-finite angle");
    const double c = std::cos(theta), s = std::sin(theta);
    std::vector<cdouble> taps(side * side);
    bool lattice = true;  // whole rotation landed on grid points
    for (std::size_t r = 0; r < side; ++r) {
      for (std::size_t col = 0; col < side; ++col) {
        const double dy = static_cast<double>(r) - m;
        const double dx = static_cast<double>(col) - m;
        // pull-back: sample h0 at the point that rotates onto (dx, dy)
        const double sx = snap(c * dx + s * dy);
        const double sy = snap(-s * dx + c * dy);
        const double px = m + sx, py = m + sy;
        const double fx = std::floor(px), fy = std::floor(py);
        const double wx = px - fx, wy = py - fy;
        if (wx != 0.0 || wy != 0.0) lattice = false;
        const long long ix = static_cast<long long>(fx), iy = static_cast<long long>(fy);
        cdouble v = (1 - wy) * ((1 - wx) * sample(iy, ix) + wx * sample(iy, ix + 1)) +
                    wy * ((1 - wx) * sample(iy + 1, ix) + wx * sample(iy + 1, ix + 1));
        taps[r * side + col] = v;
      }
    }
    // a pure index permutation already has the template norm; rescaling it
    // would only stir in rounding noise
    if (!lattice) {
      double nr = 0;
      for (const auto& v : taps) nr += std::norm(v);
      nr = std::sqrt(nr);
      if (nr > 0 && norm0 > 0) {
        const double scale = norm0 / nr;
        for (auto& v : taps) v *= scale;
      }
    }
    f.filters.push_back(std::move(taps));
  }
  return f;
}

struct AttenuationSample {
  double error = 0;  // ||pool(g.z) - pool(z)|| / ||z||
  double ratio = 0;  // |t*eta| / 2^J on the channel axis
};

// How much the pooled layer moves under a channel shift: small whenever the
// displacement is well inside the pooling window.
inline AttenuationSample pooling_attenuation(const Signal& z, const LayerAction& a, double t,
                                             const PoolingSpec& p) {
  const PoolingSpec::AxisScale* on_channel = nullptr;
  for (const auto& as : p.axes)
    if (as.axis == a.channel_axis) on_channel = &as;
  if (!on_channel)
    throw std::invalid_argument("pooling_attenuation: pooling must act on the channel axis");
  const double nz = l2_norm(z);
  if (nz == 0.0) throw std::invalid_argument("pooling_attenuation: zero signal");
  const Signal moved = act_on_layer(a, t, z);
  AttenuationSample out;
  out.error = l2_distance(pool(moved, p), pool(z, p)) / nz;
  out.ratio = std::abs(t * a.eta) / static_cast<double>(std::size_t{1} << on_channel->scale_log2);
  return out;
}

}  // namespace invlab
