#pragma once

// One-parameter group actions on signals: translations, frequency
// transpositions and dilations along a named axis, plus actions on layered
// signals that shift a channel coordinate, and ordered products of both.

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "invlab/signal.hpp"

namespace invlab {

enum class GroupKind { translation, frequency_transposition, dilation };

struct GroupDescriptor {
  GroupKind kind = GroupKind::translation;
  std::string axis;
  // Meaning depends on kind: translation velocity v0, transposition rate
  // omega0 in radians per sample, or the dilation log-base (fixed at 2).
  double direction = 1.0;
};

inline GroupDescriptor translation_group(std::string axis, double v0 = 1.0) {
  return {GroupKind::translation, std::move(axis), v0};
}

inline GroupDescriptor transposition_group(std::string axis, double omega0) {
  return {GroupKind::frequency_transposition, std::move(axis), omega0};
}

inline GroupDescriptor dilation_group(std::string axis) {
  return {GroupKind::dilation, std::move(axis), 2.0};
}

inline const char* group_kind_name(GroupKind k) {
  switch (k) {
    case GroupKind::translation: return "translation";
    case GroupKind::frequency_transposition: return "frequency_transposition";
    case GroupKind::dilation: return "dilation";
  }
  return "unknown";
}

// U_t x along g.axis:
//   translation      x(u - t*v0), periodic linear interpolation; exact
//                    cyclic shift when t*v0 is an integer
//   transposition    e^{i t omega0 u} x(u)
//   dilation         2^{-t/2} x(m + 2^{-t}(u - m)) about the axis midpoint
//                    m = n/2; requires a power-of-two axis
// t = 0 is the identity for every kind.
inline Signal act(const GroupDescriptor& g, double t, const Signal& x) {
  const std::size_t k = x.grid.axis_index(g.axis);
  const std::size_t n = x.grid.axes[k].size;

  switch (g.kind) {
    case GroupKind::translation: {
      DeformationField d{g.axis, std::vector<double>(n, t * g.direction)};
      return warp(x, d);
    }
    case GroupKind::frequency_transposition: {
      Signal out = Signal::zeros(x.grid);
      std::vector<cdouble> phase(n);
      for (std::size_t u = 0; u < n; ++u)
        phase[u] = std::polar(1.0, t * g.direction * static_cast<double>(u));
      for_each_line(x.grid, k, [&](std::size_t base, std::size_t stride, std::size_t len) {
        for (std::size_t u = 0; u < len; ++u)
          out.values[base + u * stride] = x.values[base + u * stride] * phase[u];
      });
      return out;
    }
    case GroupKind::dilation: {
      if (n == 0 || (n & (n - 1)) != 0)
        throw std::invalid_argument("act: dilation requires a power-of-two axis");
      const double rate = std::exp2(-t);
      const double amp = std::exp2(-0.5 * t);
      const double m = static_cast<double>(n) / 2.0;
      Signal out = Signal::zeros(x.grid);
      std::vector<cdouble> line(n);
      for_each_line(x.grid, k, [&](std::size_t base, std::size_t stride, std::size_t len) {
        for (std::size_t u = 0; u < len; ++u) line[u] = x.values[base + u * stride];
        for (std::size_t u = 0; u < len; ++u) {
          const double pos = m + rate * (static_cast<double>(u) - m);
          out.values[base + u * stride] = amp * lerp_periodic(line, pos);
        }
      });
      return out;
    }
  }
  throw std::invalid_argument("act: unknown group kind");
}

// Exact cyclic shift: content at index c moves to index c + s (mod n).
inline Signal cyclic_shift(const Signal& z, std::string_view axis, long long s) {
  const std::size_t k = z.grid.axis_index(axis);
  Signal out = Signal::zeros(z.grid);
  for_each_line(z.grid, k, [&](std::size_t base, std::size_t stride, std::size_t len) {
    for (std::size_t u = 0; u < len; ++u) {
      const std::size_t dst = pmod(static_cast<long long>(u) + s, len);
      out.values[base + dst * stride] = z.values[base + u * stride];
    }
  });
  return out;
}

// Action on a layered signal: a cyclic shift of the channel coordinate by
// t*eta (which must land on an integer) composed with an optional spatial
// action on another axis.
struct LayerAction {
  double eta = 1.0;
  std::string channel_axis;
  std::optional<GroupDescriptor> spatial;
};

inline Signal act_on_layer(const LayerAction& a, double t, const Signal& z) {
  const double shift_real = t * a.eta;
  const long long s = std::llround(shift_real);
  if (std::abs(shift_real - static_cast<double>(s)) > 1e-9)
    throw std::invalid_argument("act_on_layer: t*eta is not an integer channel displacement");
  Signal out = cyclic_shift(z, a.channel_axis, s);
  if (a.spatial) out = act(*a.spatial, t, out);
  return out;
}

using GroupFactor = std::variant<GroupDescriptor, LayerAction>;

// Ordered product G = G1 x ... x Gs; factors are applied left to right.
struct ProductGroup {
  std::vector<GroupFactor> factors;
};

inline Signal apply_factor(const GroupFactor& f, double t, const Signal& x) {
  if (std::holds_alternative<GroupDescriptor>(f))
    return act(std::get<GroupDescriptor>(f), t, x);
  return act_on_layer(std::get<LayerAction>(f), t, x);
}

inline std::string factor_name(const GroupFactor& f) {
  if (std::holds_alternative<GroupDescriptor>(f)) {
    const auto& g = std::get<GroupDescriptor>(f);
    return std::string(group_kind_name(g.kind)) + "(" + g.axis + ")";
  }
  const auto& a = std::get<LayerAction>(f);
  std::string s = "channel_shift(" + a.channel_axis + ")";
  if (a.spatial) s += "*" + std::string(group_kind_name(a.spatial->kind)) + "(" + a.spatial->axis + ")";
  return s;
}

inline Signal compose(const ProductGroup& p, const std::vector<double>& params, const Signal& x) {
  if (params.size() != p.factors.size())
    throw std::invalid_argument("compose: parameter count does not match factor count");
  Signal y = x;
  for (std::size_t i = 0; i < p.factors.size(); ++i) y = apply_factor(p.factors[i], params[i], y);
  return y;
}

}  // namespace invlab
