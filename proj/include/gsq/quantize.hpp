#pragma once

// Op_A(a) on sampled symbols.
//
// A symbol lives on a phase-space grid (x_1..x_d, xi_1..xi_d) whose frequency
// axes are the duals of the position axes.  The kernel is
//
//     K(x, y) = (2 pi)^{-d/2} (F_2^{-1} a)(x - A(x - y), x - y)
//
// where the prefactor makes Op_A(1) the identity with the unitary transform.
// On the grid: b = F_2^{-1} a on (x, z); c(x, z) = b(x - Az, z) by a Fourier
// phase shift along each x axis with z-dependent offset; and
// K(x_m, y_k) = (2 pi)^{-d/2} c(x_m, z_j) with j = (m - k + n/2) mod n per axis.
// That index map is a bijection, so symbol_from_kernel inverts
// kernel_from_symbol up to rounding.  Differences x - y wrap around the box.

#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gsq/grid.hpp"
#include "gsq/windows.hpp"

namespace gsq {

/// Real d x d matrix, row-major.
struct QuantMatrix {
  std::size_t d = 1;
  std::vector<double> entries{0.0};

  static QuantMatrix scalar(double t, std::size_t d = 1);
  double operator()(std::size_t i, std::size_t j) const { return entries[i * d + j]; }
  /// The scalar t for d = 1; throws otherwise.
  double t() const;
  bool is_zero() const;
  /// max_i sum_j |A_ij|.
  double row_norm() const;
  QuantMatrix transpose() const;
  QuantMatrix operator-() const;
  nlohmann::json to_json() const;
};

QuantMatrix operator-(const QuantMatrix& a, const QuantMatrix& b);
QuantMatrix operator+(const QuantMatrix& a, const QuantMatrix& b);

/// Parses "t=0.5" or a JSON-ish list "1,0,0,1" (row-major, d = sqrt(count)).
QuantMatrix parse_matrix(const std::string& spec);

struct OperatorKernel {
  SampledFunction K;  // on (x, y)
  QuantMatrix A;
  std::string symbol_label;

  /// Grid of x (equal to that of y).
  Grid base() const;
};

/// Throws when the shear offset could exceed the half box (row norm of A > 1),
/// when the symbol grid is not a phase-space grid, or for d > 2.
OperatorKernel kernel_from_symbol(const SampledFunction& a, const QuantMatrix& A);
SampledFunction symbol_from_kernel(const OperatorKernel& K);
SampledFunction symbol_from_kernel(const SampledFunction& K, const QuantMatrix& A);

/// g(x) = sum_y K(x, y) f(y) dy.
SampledFunction apply_kernel(const OperatorKernel& K, const SampledFunction& f);

enum class ApplyRoute { automatic, direct, kernel };

/// Op_A(a) f.  The direct route (A = 0 only) is
/// (2 pi)^{-d/2} sum_xi a(x, xi) f^(xi) e^{i<x,xi>} dxi; automatic picks it for
/// A = 0 and the kernel route otherwise.
SampledFunction apply_op(const SampledFunction& a, const QuantMatrix& A, const SampledFunction& f,
                         ApplyRoute route = ApplyRoute::automatic);

/// Slow reference: the double sum
/// (2 pi)^{-1} sum_y sum_xi a(x - t(x - y), xi) f(y) e^{i(x - y) xi} dy dxi
/// with the symbol evaluated off-grid from a callable.  d = 1, n <= 64, and
/// only meaningful for decaying symbols.
SampledFunction apply_op_reference(const std::function<cplx(double, double)>& a, double t,
                                   const SampledFunction& f);

struct MappingEntry {
  std::string label;
  double input_seminorm = 0.0;
  double output_seminorm = 0.0;
  std::vector<double> input_rates;   // STFT decay rates (x, xi)
  std::vector<double> output_rates;
  bool finite = false;
};

struct MappingReport {
  std::string symbol_label;
  QuantMatrix A;
  GevreyParams params;
  int cutoff = 0;
  std::vector<MappingEntry> entries;
  bool all_finite = false;
  nlohmann::json to_json() const;
};

/// Empirical probe of Op_A(a) on a test family: seminorm tables and STFT decay
/// fits (exponents (s, sigma) on (x, xi)) of inputs and outputs.
MappingReport verify_mapping(const SampledFunction& a, const QuantMatrix& A, const GevreyParams& params,
                             const std::vector<SampledFunction>& family, int cutoff = 6);

/// Hermite functions 0..count-1 on a 1d grid.
std::vector<SampledFunction> hermite_family(const Grid& grid, int count = 11);

}  // namespace gsq
