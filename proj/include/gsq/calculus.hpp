#pragma once

// Change of quantization, twisted products and the kernel calculus (d = 1).
//
// Convention: D = -i d.  With eta dual to x and y dual to xi under the
// forward transform, D_x becomes eta and D_xi becomes y, so
// e^{i<A D_xi, D_x>} is the multiplier e^{i<A y, eta>} on the full transform
// of a symbol.  The check xxi -> xxi - i t under A = t follows directly.
//
// Four-dimensional symbol-pair fields are stored (x1, x2, xi1, xi2).

#include <string>

#include <json.hpp>

#include "gsq/grid.hpp"
#include "gsq/quantize.hpp"
#include "gsq/windows.hpp"

namespace gsq {

/// F(x1, x2, xi1, xi2) on (x, x, xi, xi) axes of a phase-space grid.
struct FourDField {
  SampledFunction F;

  /// a1(x1, xi1) a2(x2, xi2).  Checks the 4d memory ceiling.
  static FourDField tensor(const SampledFunction& a1, const SampledFunction& a2);
};

/// e^{i<A D_xi, D_x>} a.
SampledFunction quant_transfer(const SampledFunction& a, const QuantMatrix& A);

struct DeviationReport {
  std::string check;
  double max_dev = 0.0;
  double reference_scale = 0.0;  // max modulus of the reference side
  std::size_t points = 0;
  nlohmann::json to_json() const;
};

/// max over interior nodes of
///   | |V_{T_A phi}(T_A a)(x, xi, eta, y)| - |V_phi a(x + A y, xi + A eta, eta, y)| |
/// with T_A = e^{i<A D_xi, D_x>}; the right side by Fourier shifts of the field.
/// With the multiplier e^{i<A y, eta>} the shifts come out with a plus sign:
/// T_A acts on the STFT through the symplectic shear (x, xi) -> (x + A y, xi + A eta).
DeviationReport stft_covariance_check(const SampledFunction& a, const SampledFunction& phi, const QuantMatrix& A);

enum class SharpRoute { kernel, multiplier };

/// a1 #_0 a2.  Kernel route: compose the A = 0 kernels and read the symbol
/// back.  Multiplier route: e^{i D_xi1 D_x2} on a1(x1, xi1) a2(x2, xi2), then
/// the diagonal.
SampledFunction sharp0(const SampledFunction& a1, const SampledFunction& a2, SharpRoute route = SharpRoute::kernel);

/// e^{-i<A D_xi, D_x>}((e^{i<A D_xi, D_x>} a1) #_0 (e^{i<A D_xi, D_x>} a2)).
/// The signs follow from Op_A(a) = Op_0(e^{i<A D_xi, D_x>} a), so that
/// Op_A(a1 #_A a2) = Op_A(a1) Op_A(a2).
SampledFunction sharpA(const SampledFunction& a1, const SampledFunction& a2, const QuantMatrix& A,
                       SharpRoute route = SharpRoute::kernel);

/// (K1 o K2)(x, y) = sum_z K1(x, z) K2(z, y) dz.
OperatorKernel compose_kernels(const OperatorKernel& K1, const OperatorKernel& K2);

/// <K2, T(x, y, .)> with T(x, y, z1, z2) = K1(x, z1) K3(z2, y): the pairing over
/// (z1, z2) evaluated directly, O(N^4).
OperatorKernel triple_compose(const OperatorKernel& K1, const OperatorKernel& K2, const OperatorKernel& K3);

/// Compares V_psi K_{a,A}(x, y, xi, eta) with
///   (2 pi)^{-1} e^{i(x - y)(eta - A(xi + eta))} V_phi a(x - A(x - y), -eta + A(xi + eta), xi + eta, y - x)
/// where psi = K_{phi,A}, on the sublattice of every `stride`-th node of each
/// axis restricted to the interior.  Points whose right-hand arguments leave
/// the interior of the field's box are skipped: both sides there see periodic
/// images.  Off-node arguments use trigonometric interpolation.
DeviationReport stft_kernel_relation_check(const SampledFunction& a, const SampledFunction& phi, const QuantMatrix& A,
                                           std::size_t stride = 4);

/// (x, xi) -> F(x, x, xi, xi).
SampledFunction trace_map(const FourDField& F);

struct TraceBoundReport {
  double trace_norm = 0.0;  // (h, r)-norm of the trace at (2h, 2r)
  double field_norm = 0.0;  // (h, r)-norm of F
  int cutoff = 0;
  bool holds = false;
  nlohmann::json to_json() const;
};

/// ||trace F||_{(2h, 2r)} <= ||F||_{(h, r)} at a finite cutoff: each derivative
/// of the trace expands by Leibniz into 2^{|alpha|+|beta|} derivatives of F,
/// and the weight doubles on the diagonal.  Exponents from params: position
/// slots (s, sigma), frequency slots (sigma, s).
TraceBoundReport trace_leibniz_check(const FourDField& F, const GevreyParams& params, int cutoff = 4);

struct MollifyResult {
  SampledFunction value;
  bool flat = false;  // phi(eps .) equals 1 to 1e-15 on the whole grid; value is a
};

/// phi(eps X) a(X), with phi(eps X) by separable trigonometric resampling.
/// Requires phi(0) = 1 and eps > 0.
MollifyResult mollify(const SampledFunction& a, const SampledFunction& phi, double eps);

}  // namespace gsq
