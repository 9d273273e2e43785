#pragma once

// Measurement of invariance and deformation stability for arbitrary
// representations phi. Errors are relative to the input norm; ratios divide
// by the combined group size + deformation metric, and the largest finite
// ratio over a report estimates the stability constant.

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "invlab/cascade.hpp"
#include "invlab/group.hpp"
#include "invlab/signal.hpp"

namespace invlab {

using Representation = std::function<Signal(const Signal&)>;

inline double invariance_error(const Representation& phi, const Signal& x,
                               const Signal& transformed) {
  const double nx = l2_norm(x);
  if (nx == 0.0) throw std::invalid_argument("invariance_error: zero reference signal");
  return l2_distance(phi(transformed), phi(x)) / nx;
}

struct StabilitySample {
  double k_metric = 0;
  double group_norm = 0;
  double error = 0;
  double ratio = 0;
  bool included = true;  // false when group_norm + k_metric == 0
};

inline StabilitySample make_sample(double k_metric, double group_norm, double error) {
  StabilitySample s;
  s.k_metric = k_metric;
  s.group_norm = group_norm;
  s.error = error;
  const double denom = k_metric + group_norm;
  s.included = denom > 0.0;
  s.ratio = s.included ? error / denom : 0.0;
  return s;
}

struct StabilityReport {
  std::string representation_id;
  std::vector<StabilitySample> samples;
  double estimated_C = 0;

  void finalize() {
    estimated_C = 0;
    for (const auto& s : samples)
      if (s.included) estimated_C = std::max(estimated_C, s.ratio);
  }
};

// One sample per deformation field: pure deformations, so group_norm = 0
// and the denominator is the elastic metric of the field.
inline StabilityReport stability_curve(const Representation& phi, const Signal& x,
                                       const std::vector<DeformationField>& family,
                                       std::string representation_id = "") {
  StabilityReport rep;
  rep.representation_id = std::move(representation_id);
  for (const auto& field : family) {
    const double k = deformation_metric(field);
    if (k <= 0.0)
      throw std::invalid_argument("stability_curve: zero-metric field in the family");
    const double err = invariance_error(phi, x, warp(x, field));
    rep.samples.push_back(make_sample(k, 0.0, err));
  }
  rep.finalize();
  return rep;
}

// One sample for a group element of size |t * direction| optionally
// composed with a deformation.
inline StabilitySample local_invariance_sample(const Representation& phi, const Signal& x,
                                               const GroupDescriptor& g, double t,
                                               const std::optional<DeformationField>& d = {}) {
  Signal transformed = act(g, t, x);
  double k = 0.0;
  if (d) {
    k = deformation_metric(*d);
    transformed = warp(transformed, *d);
  }
  const double group_norm = std::abs(t) * std::abs(g.direction);
  const double err = invariance_error(phi, x, transformed);
  return make_sample(k, group_norm, err);
}

// ||F(g.z) - g.F(z)|| / ||z|| for a bank convolving along the shifted
// channel axis; zero (to rounding) because circular convolution commutes
// with cyclic shifts.
inline double commutation_residual(const Signal& z, const LayerAction& a, double t,
                                   const FilterBank& f) {
  f.check();
  if (f.axes.size() != 1 || f.axes[0] != a.channel_axis)
    throw std::invalid_argument("commutation_residual: bank must convolve along the channel axis");
  const double nz = l2_norm(z);
  if (nz == 0.0) throw std::invalid_argument("commutation_residual: zero signal");
  const Signal lhs = filter_bank_apply(act_on_layer(a, t, z), f);
  const Signal rhs = act_on_layer(a, t, filter_bank_apply(z, f));
  return l2_distance(lhs, rhs) / nz;
}

struct FactorizationRow {
  std::string factor;
  double error = 0;  // incremental error contributed by this factor
};

struct FactorizationReport {
  std::vector<FactorizationRow> per_factor;
  double full_error = 0;  // error under the whole product
  double error_sum = 0;   // triangle bound: sum of weighted per-factor errors
};

// Splits the invariance error of phi under a product group into per-factor
// contributions, measured incrementally along the composed trajectory:
// factor i is applied to the signal already transformed by factors 1..i-1.
// By the triangle inequality full_error <= error_sum whenever the factors
// preserve the norm.
inline FactorizationReport factorization_demo(const Signal& x, const CascadeSpec& spec,
                                              const ProductGroup& p,
                                              const std::vector<double>& params) {
  if (params.size() != p.factors.size())
    throw std::invalid_argument("factorization_demo: parameter count does not match factor count");
  const double nx = l2_norm(x);
  if (nx == 0.0) throw std::invalid_argument("factorization_demo: zero signal");

  Representation phi = [&spec](const Signal& s) { return cascade_apply(s, spec).final(); };
  const Signal phi_x = phi(x);

  FactorizationReport rep;
  Signal prev = x;
  double bound = 0;
  for (std::size_t i = 0; i < p.factors.size(); ++i) {
    const Signal next = apply_factor(p.factors[i], params[i], prev);
    const double nprev = l2_norm(prev);
    const double err = (nprev == 0.0) ? 0.0 : l2_distance(phi(next), phi(prev)) / nprev;
    rep.per_factor.push_back({factor_name(p.factors[i]), err});
    bound += err * nprev / nx;
    prev = next;
  }
  rep.full_error = l2_distance(phi(prev), phi_x) / nx;
  rep.error_sum = bound;
  return rep;
}

}  // namespace invlab
