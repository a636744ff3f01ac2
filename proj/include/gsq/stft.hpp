#pragma once

// Short-time Fourier transform on sampled data.
//
//   V_phi f(x, xi) = (2 pi)^{-d/2} int f(y) conj(phi(y - x)) e^{-i<y,xi>} dy
//
// Window shifts run over the nodes of the input grid and are circular: the
// window sample for shift node m at node k is phi[(k - m + n/2) mod n] per
// axis.  Values are stored (shift axes..., frequency axes...), row-major.
//
// For a symbol a on a phase-space grid (x, xi) the field V_Phi a has slots
// (x, xi, eta, y) with eta dual to x and y dual to xi.  This falls out of the
// layout above, so identity checks index it without permutation.

#include <string>
#include <vector>

#include <json.hpp>

#include "gsq/grid.hpp"

namespace gsq {

struct STFTField {
  Grid pos_grid;
  Grid freq_grid;
  std::vector<cplx> values;
  std::string window_label;

  /// pos_grid x freq_grid.
  Grid grid() const { return product(pos_grid, freq_grid); }
  SampledFunction as_function() const;
  std::size_t size() const { return values.size(); }
  /// Slot names, e.g. (x, xi) or (x, xi, eta, y).
  std::vector<std::string> slot_names() const;
  /// Sidecar metadata: slot order, grids, window label.
  nlohmann::json sidecar() const;
};

/// Throws on grid mismatch or a zero window.
STFTField stft(const SampledFunction& f, const SampledFunction& window);

/// Discrete inversion f = ||phi||^{-2} sum_y (2 pi)^{-d/2} int V(y, eta) phi(x - y) e^{i x eta} deta dy.
/// Exact for fields produced by stft() with the same window.
SampledFunction istft(const STFTField& field, const SampledFunction& window);

struct MoyalSides {
  cplx lhs;  // (V_phi f, V_psi g)
  cplx rhs;  // (f, g) conj((phi, psi))
};

/// Both sides of Moyal's identity by quadrature; (u, v) = int u conj(v).
MoyalSides moyal_check(const SampledFunction& f, const SampledFunction& g, const SampledFunction& phi,
                       const SampledFunction& psi);

/// STFT of a symbol on a 2d grid; slots (x, xi, eta, y).  The output size is
/// checked against the configured memory ceiling before allocation.
STFTField stft4(const SampledFunction& a, const SampledFunction& window);

/// Balanced half width sqrt(pi n / 2): the base axis and its dual coincide.
double balanced_half_width(std::size_t n);

}  // namespace gsq
