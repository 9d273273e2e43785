#pragma once

// Group discovery from data: the uncentered covariance of a dataset is
// diagonalized with a hand-rolled cyclic Jacobi sweep, near-degenerate
// eigenvalue pairs are merged into complex rows (v_a + i v_b)/sqrt(2), and
// the candidate basis U is scored by how constant |U x| is across the
// dataset. On an orbit of a commutative group the score collapses to
// rounding noise and the rows recover the group's eigenmodes.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "invlab/signal.hpp"

namespace invlab {

struct CovarianceEstimate {
  std::size_t n = 0;
  std::vector<double> sigma;  // n x n, row-major, symmetric
  std::size_t sample_count = 0;
};

// Sigma = (1/m) sum_i Re(x_i conj(x_i)^T). On real data this is the plain
// uncentered second moment E[x x^T]. Accumulated on the upper triangle and
// mirrored, so the result is exactly symmetric.
inline CovarianceEstimate covariance(const std::vector<Signal>& dataset) {
  if (dataset.empty()) throw std::invalid_argument("covariance: empty dataset");
  const std::size_t n = dataset.front().size();
  for (const auto& x : dataset)
    if (x.size() != n) throw std::invalid_argument("covariance: dataset members differ in size");

  CovarianceEstimate c;
  c.n = n;
  c.sample_count = dataset.size();
  c.sigma.assign(n * n, 0.0);
  for (const auto& x : dataset)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = j; k < n; ++k) {
        const cdouble a = x.values[j], b = x.values[k];
        c.sigma[j * n + k] += a.real() * b.real() + a.imag() * b.imag();
      }
  const double inv_m = 1.0 / static_cast<double>(dataset.size());
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t k = j; k < n; ++k) {
      const double v = c.sigma[j * n + k] * inv_m;
      c.sigma[j * n + k] = v;
      c.sigma[k * n + j] = v;
    }
  return c;
}

struct JacobiResult {
  std::size_t n = 0;
  std::vector<double> eigenvalues;  // diagonal order, unsorted
  std::vector<double> vectors;      // n x n row-major; column j pairs with eigenvalues[j]
  std::size_t sweeps = 0;
};

inline double frobenius(const std::vector<double>& a) {
  double s = 0;
  for (double v : a) s += v * v;
  return std::sqrt(s);
}

// Cyclic Jacobi for a real symmetric matrix. Sweeps rotate every (p, q)
// pair until the off-diagonal Frobenius norm drops below rel_tol times the
// Frobenius norm of the input.
inline JacobiResult jacobi_eigensymm(std::vector<double> a, std::size_t n, double rel_tol = 1e-13,
                                     std::size_t max_sweeps = 64) {
  if (a.size() != n * n) throw std::invalid_argument("jacobi_eigensymm: bad matrix size");
  JacobiResult res;
  res.n = n;
  res.vectors.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) res.vectors[i * n + i] = 1.0;

  const double scale = frobenius(a);
  auto off_norm = [&]() {
    double s = 0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) s += a[p * n + q] * a[p * n + q];
    return std::sqrt(2.0 * s);
  };

  while (res.sweeps < max_sweeps && scale > 0.0 && off_norm() > rel_tol * scale) {
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a[p * n + q];
        if (apq == 0.0) continue;
        const double app = a[p * n + p], aqq = a[q * n + q];
        const double theta = (aqq - app) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        const double tau = s / (1.0 + c);

        a[p * n + p] = app - t * apq;
        a[q * n + q] = aqq + t * apq;
        a[p * n + q] = a[q * n + p] = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
          if (r == p || r == q) continue;
          const double arp = a[r * n + p], arq = a[r * n + q];
          a[r * n + p] = a[p * n + r] = arp - s * (arq + tau * arp);
          a[r * n + q] = a[q * n + r] = arq + s * (arp - tau * arq);
        }
        for (std::size_t r = 0; r < n; ++r) {
          const double vrp = res.vectors[r * n + p], vrq = res.vectors[r * n + q];
          res.vectors[r * n + p] = vrp - s * (vrq + tau * vrp);
          res.vectors[r * n + q] = vrq + s * (vrp - tau * vrq);
        }
      }
    }
    ++res.sweeps;
  }

  res.eigenvalues.resize(n);
  for (std::size_t i = 0; i < n; ++i) res.eigenvalues[i] = a[i * n + i];
  return res;
}

struct EigenPairing {
  struct Pair {
    std::size_t a = 0, b = 0;  // positions in the sorted spectrum
    double eigenvalue = 0;     // shared value (mean of the two)
  };
  struct Singleton {
    std::size_t index = 0;
    double eigenvalue = 0;
  };

  std::size_t n = 0;
  std::vector<double> eigenvalues;   // descending
  std::vector<double> eigenvectors;  // n x n row-major; column j pairs with eigenvalues[j]
  std::vector<Pair> pairs;
  std::vector<Singleton> singletons;
  double pairing_tolerance = 0;
};

// Diagonalizes a covariance and partitions the descending spectrum into
// near-degenerate adjacent pairs and singletons. The greedy left-to-right
// walk is deterministic; ties in the sort are broken by original index.
inline EigenPairing eigendecompose(const CovarianceEstimate& c, double pairing_tolerance = 1e-6) {
  if (c.sigma.size() != c.n * c.n)
    throw std::invalid_argument("eigendecompose: bad covariance size");
  double max_abs = 0, max_asym = 0;
  for (std::size_t j = 0; j < c.n; ++j)
    for (std::size_t k = 0; k < c.n; ++k) {
      max_abs = std::max(max_abs, std::abs(c.sigma[j * c.n + k]));
      max_asym = std::max(max_asym, std::abs(c.sigma[j * c.n + k] - c.sigma[k * c.n + j]));
    }
  if (max_asym > 1e-12 * std::max(max_abs, 1e-300))
    throw std::invalid_argument("eigendecompose: matrix is not symmetric");

  const JacobiResult jr = jacobi_eigensymm(c.sigma, c.n);

  std::vector<std::size_t> order(c.n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    if (jr.eigenvalues[i] != jr.eigenvalues[j]) return jr.eigenvalues[i] > jr.eigenvalues[j];
    return i < j;
  });

  EigenPairing p;
  p.n = c.n;
  p.pairing_tolerance = pairing_tolerance;
  p.eigenvalues.resize(c.n);
  p.eigenvectors.assign(c.n * c.n, 0.0);
  for (std::size_t j = 0; j < c.n; ++j) {
    p.eigenvalues[j] = jr.eigenvalues[order[j]];
    for (std::size_t r = 0; r < c.n; ++r)
      p.eigenvectors[r * c.n + j] = jr.vectors[r * c.n + order[j]];
  }

  double floor = 0;
  for (double v : p.eigenvalues) floor += std::abs(v);
  floor /= static_cast<double>(c.n);

  std::size_t i = 0;
  while (i < c.n) {
    if (i + 1 < c.n) {
      const double la = p.eigenvalues[i], lb = p.eigenvalues[i + 1];
      const double gate = pairing_tolerance * std::max({std::abs(la), std::abs(lb), floor});
      if (std::abs(la - lb) <= gate) {
        p.pairs.push_back({i, i + 1, 0.5 * (la + lb)});
        i += 2;
        continue;
      }
    }
    p.singletons.push_back({i, p.eigenvalues[i]});
    i += 1;
  }
  return p;
}

struct DiscoveredBasis {
  std::size_t dim = 0;       // signal dimension (columns)
  std::size_t rows = 0;      // pairs + singletons
  std::vector<cdouble> u;    // rows x dim, orthonormal rows
  double objective = 0;      // set by invariance_objective
  EigenPairing pairing;
};

// Each near-degenerate pair (v_a, v_b) becomes one complex row
// (v_a + i v_b)/sqrt(2); singletons stay real. Rows are emitted in
// descending eigenvalue order and are orthonormal (U U^* = I).
inline DiscoveredBasis build_complex_basis(const EigenPairing& p) {
  DiscoveredBasis b;
  b.dim = p.n;
  b.pairing = p;

  struct RowSpec {
    std::size_t first;
    bool is_pair;
    std::size_t a, c;
  };
  std::vector<RowSpec> rows;
  for (const auto& pr : p.pairs) rows.push_back({pr.a, true, pr.a, pr.b});
  for (const auto& sg : p.singletons) rows.push_back({sg.index, false, sg.index, 0});
  std::sort(rows.begin(), rows.end(),
            [](const RowSpec& x, const RowSpec& y) { return x.first < y.first; });

  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (const auto& r : rows) {
    for (std::size_t k = 0; k < p.n; ++k) {
      const double va = p.eigenvectors[k * p.n + r.a];
      if (r.is_pair) {
        const double vb = p.eigenvectors[k * p.n + r.c];
        b.u.push_back(cdouble{va, vb} * inv_sqrt2);
      } else {
        b.u.push_back(cdouble{va, 0.0});
      }
    }
  }
  b.rows = rows.size();
  return b;
}

// sum over rows of the population variance of |(U x_i)_row| across the
// dataset; zero when every dataset member has the same modulus profile.
inline double invariance_objective(DiscoveredBasis& b, const std::vector<Signal>& dataset) {
  if (dataset.empty()) throw std::invalid_argument("invariance_objective: empty dataset");
  for (const auto& x : dataset)
    if (x.size() != b.dim)
      throw std::invalid_argument("invariance_objective: dataset size does not match basis");

  const std::size_t m = dataset.size();
  double total = 0;
  std::vector<double> mods(m);
  for (std::size_t r = 0; r < b.rows; ++r) {
    double mean = 0;
    for (std::size_t i = 0; i < m; ++i) {
      cdouble acc{};
      const cdouble* row = b.u.data() + r * b.dim;
      for (std::size_t k = 0; k < b.dim; ++k) acc += row[k] * dataset[i].values[k];
      mods[i] = std::abs(acc);
      mean += mods[i];
    }
    mean /= static_cast<double>(m);
    double var = 0;
    for (std::size_t i = 0; i < m; ++i) var += (mods[i] - mean) * (mods[i] - mean);
    total += var / static_cast<double>(m);
  }
  b.objective = total;
  return total;
}

inline DiscoveredBasis discover(const std::vector<Signal>& dataset, double pairing_tolerance = 1e-6) {
  const CovarianceEstimate c = covariance(dataset);
  const EigenPairing p = eigendecompose(c, pairing_tolerance);
  DiscoveredBasis b = build_complex_basis(p);
  invariance_objective(b, dataset);
  return b;
}

// Largest principal angle between the complex spans of two families of
// vectors (at most two each). Cosines are singular values of the cross-Gram
// of orthonormalized bases; 1x1 and 2x2 cases are solved in closed form.
inline double max_principal_angle(std::vector<std::vector<cdouble>> a,
                                  std::vector<std::vector<cdouble>> b) {
  if (a.empty() || b.empty() || a.size() != b.size() || a.size() > 2)
    throw std::invalid_argument("max_principal_angle: expected matching spans of dimension 1 or 2");
  const std::size_t n = a[0].size();
  auto orthonormalize = [n](std::vector<std::vector<cdouble>>& v) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (v[i].size() != n) throw std::invalid_argument("max_principal_angle: ragged span");
      for (std::size_t j = 0; j < i; ++j) {
        cdouble proj{};
        for (std::size_t k = 0; k < n; ++k) proj += std::conj(v[j][k]) * v[i][k];
        for (std::size_t k = 0; k < n; ++k) v[i][k] -= proj * v[j][k];
      }
      double nr = 0;
      for (std::size_t k = 0; k < n; ++k) nr += std::norm(v[i][k]);
      nr = std::sqrt(nr);
      if (nr == 0.0) throw std::invalid_argument("max_principal_angle: rank-deficient span");
      for (std::size_t k = 0; k < n; ++k) v[i][k] /= nr;
    }
  };
  orthonormalize(a);
  orthonormalize(b);

  const std::size_t k = a.size();
  std::vector<cdouble> m(k * k, cdouble{});
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) {
      cdouble acc{};
      for (std::size_t r = 0; r < n; ++r) acc += std::conj(a[i][r]) * b[j][r];
      m[i * k + j] = acc;
    }

  double lam_min = 0;
  if (k == 1) {
    lam_min = std::norm(m[0]);
  } else {
    // eigenvalues of the 2x2 Hermitian M^H M; the discriminant is written
    // as a sum of squares so aligned spans do not cancel to rounding noise
    const double h00 = std::norm(m[0]) + std::norm(m[2]);
    const double h11 = std::norm(m[1]) + std::norm(m[3]);
    const cdouble h01 = std::conj(m[0]) * m[1] + std::conj(m[2]) * m[3];
    const double tr = h00 + h11;
    const double diff = h00 - h11;
    const double disc = std::sqrt(diff * diff + 4.0 * std::norm(h01));
    lam_min = 0.5 * (tr - disc);
  }
  const double cosv = std::sqrt(std::max(0.0, lam_min));
  return std::acos(std::min(1.0, cosv));
}

}  // namespace invlab
