#pragma once

// Finite-dimensional diagonalization of one-parameter unitary groups.
// For a supported group there is a unitary O and real frequencies omega
// with U_t = O^* diag(e^{i t omega}) O; the modulus |O x| is then invariant
// along every orbit. Signals are treated as flat vectors of length n.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "invlab/group.hpp"
#include "invlab/signal.hpp"

namespace invlab {

struct DiagonalizingBasis {
  GroupDescriptor group;
  std::size_t n = 0;
  std::vector<cdouble> transform;   // O, row-major n x n, unitary
  std::vector<double> frequencies;  // omega, length n
};

// Maps w to the principal branch (-pi, pi].
inline double wrap_principal(double w) {
  double r = std::remainder(w, kTwoPi);
  if (r <= -kPi) r += kTwoPi;
  return r;
}

// translation (velocity v0): O is the conjugate-kernel unitary Fourier
// matrix O[k][u] = e^{+2pi i k u / n} / sqrt(n), omega_k = 2pi k v0 / n
// wrapped to the principal branch. Exact for integer t.
//
// frequency transposition (rate omega0): the action is already diagonal in
// sample space, so O = I and omega_u = omega0 * u. The frequencies are kept
// unwrapped so the phase law holds exactly for every real t.
//
// dilation has no exact finite diagonalization on the sample grid and is
// rejected.
inline DiagonalizingBasis basis_for(const GroupDescriptor& g, std::size_t n) {
  if (n == 0) throw std::invalid_argument("basis_for: empty basis");
  DiagonalizingBasis b;
  b.group = g;
  b.n = n;
  b.transform.assign(n * n, cdouble{});
  b.frequencies.assign(n, 0.0);

  switch (g.kind) {
    case GroupKind::translation: {
      const double scale = 1.0 / std::sqrt(static_cast<double>(n));
      for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t u = 0; u < n; ++u) {
          const std::size_t m = (k * u) % n;
          b.transform[k * n + u] =
              std::polar(scale, kTwoPi * static_cast<double>(m) / static_cast<double>(n));
        }
        b.frequencies[k] =
            wrap_principal(kTwoPi * static_cast<double>(k) * g.direction / static_cast<double>(n));
      }
      return b;
    }
    case GroupKind::frequency_transposition: {
      for (std::size_t u = 0; u < n; ++u) {
        b.transform[u * n + u] = 1.0;
        b.frequencies[u] = g.direction * static_cast<double>(u);
      }
      return b;
    }
    default:
      throw std::invalid_argument("basis_for: no exact finite basis for this group kind");
  }
}

inline std::vector<cdouble> basis_apply(const DiagonalizingBasis& b, const std::vector<cdouble>& x) {
  if (x.size() != b.n) throw std::invalid_argument("basis_apply: size mismatch");
  std::vector<cdouble> y(b.n, cdouble{});
  for (std::size_t k = 0; k < b.n; ++k) {
    cdouble acc{};
    const cdouble* row = b.transform.data() + k * b.n;
    for (std::size_t u = 0; u < b.n; ++u) acc += row[u] * x[u];
    y[k] = acc;
  }
  return y;
}

// O^* y, the inverse of basis_apply for unitary O.
inline std::vector<cdouble> basis_apply_adjoint(const DiagonalizingBasis& b,
                                                const std::vector<cdouble>& y) {
  if (y.size() != b.n) throw std::invalid_argument("basis_apply_adjoint: size mismatch");
  std::vector<cdouble> x(b.n, cdouble{});
  for (std::size_t k = 0; k < b.n; ++k) {
    const cdouble* row = b.transform.data() + k * b.n;
    for (std::size_t u = 0; u < b.n; ++u) x[u] += std::conj(row[u]) * y[k];
  }
  return x;
}

// O^* diag(e^{i t omega}) O x, the spectral form of the group action.
inline Signal spectral_act(const DiagonalizingBasis& b, double t, const Signal& x) {
  if (x.size() != b.n) throw std::invalid_argument("spectral_act: size mismatch");
  std::vector<cdouble> xh = basis_apply(b, x.values);
  for (std::size_t k = 0; k < b.n; ++k) xh[k] *= std::polar(1.0, t * b.frequencies[k]);
  return Signal(x.grid, basis_apply_adjoint(b, xh));
}

// Relative deviation between the direct action and its spectral form.
inline double verify_diagonalization(const DiagonalizingBasis& b, double t, const Signal& x) {
  if (x.size() != b.n) throw std::invalid_argument("verify_diagonalization: size mismatch");
  const double nx = l2_norm(x);
  if (nx == 0.0) return 0.0;
  return l2_distance(act(b.group, t, x), spectral_act(b, t, x)) / nx;
}

// |O x| componentwise; constant along every orbit of the group.
inline Signal stone_invariant(const Signal& x, const DiagonalizingBasis& b) {
  if (x.size() != b.n) throw std::invalid_argument("stone_invariant: size mismatch");
  std::vector<cdouble> y = basis_apply(b, x.values);
  for (auto& v : y) v = cdouble{std::abs(v), 0.0};
  return Signal(x.grid, std::move(y));
}

// max |(O^* O - I)_{jk}|; used to check unitarity of a stored basis.
inline double unitarity_defect(const DiagonalizingBasis& b) {
  double worst = 0;
  for (std::size_t j = 0; j < b.n; ++j)
    for (std::size_t k = 0; k < b.n; ++k) {
      cdouble acc{};
      for (std::size_t r = 0; r < b.n; ++r)
        acc += std::conj(b.transform[r * b.n + j]) * b.transform[r * b.n + k];
      if (j == k) acc -= 1.0;
      worst = std::max(worst, std::abs(acc));
    }
  return worst;
}

}  // namespace invlab
