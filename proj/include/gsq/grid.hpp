#pragma once

// Uniform centered grids, sampled functions and the unitary Fourier machinery.
//
// Conventions
// -----------
// Every axis carries n (even) nodes on [-L, L):
//
//     x_k = -L + k * dx,          dx = 2L / n,            k = 0..n-1
//
// and its dual axis carries
//
//     xi_j = -pi n / (2L) + j * dxi,   dxi = pi / L,
//
// so dx * dxi * n = 2 pi and the dual of an axis is again an axis of the same
// kind with half width L' = pi n / (2L).  The Fourier transform is the unitary
// one, (2 pi)^{-d/2} int f(x) e^{-i<x,xi>} dx, realised on the centered grids as
//
//     F_j = dx / sqrt(2 pi) * (-1)^{n/2} (-1)^j  sum_k (-1)^k f_k e^{-2 pi i k j / n}
//
// i.e. a plain DFT with (-1)^k / (-1)^j pre/post phases.  The inverse uses the
// conjugate kernel and dxi in place of dx; the pair is exact up to rounding.
// All arrays are row-major, first axis slowest.

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace gsq {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

/// One uniform centered axis: n nodes on [-half_width, half_width).
struct Axis {
  std::size_t n = 0;
  double half_width = 0.0;

  double spacing() const { return 2.0 * half_width / static_cast<double>(n); }
  double node(std::size_t k) const { return -half_width + static_cast<double>(k) * spacing(); }
  /// Index of the node at the origin.
  std::size_t origin() const { return n / 2; }
  Axis dual() const { return Axis{n, kPi * static_cast<double>(n) / (2.0 * half_width)}; }
  std::vector<double> nodes() const;

  bool matches(const Axis& other) const;
};

/// Tensor product of centered axes.
class Grid {
 public:
  Grid() = default;
  explicit Grid(std::vector<Axis> axes);

  std::size_t dims() const { return axes_.size(); }
  const Axis& axis(std::size_t i) const { return axes_.at(i); }
  const std::vector<Axis>& axes() const { return axes_; }
  std::size_t size() const { return size_; }
  /// Product of the axis spacings.
  double cell_volume() const;
  std::vector<std::size_t> shape() const;
  /// Row-major stride of axis i.
  std::size_t stride(std::size_t i) const;

  /// Grid with every axis replaced by its dual.
  Grid dual() const;
  /// Grid with the listed axes replaced by their duals.
  Grid dual_on(std::span<const std::size_t> axes) const;

  /// Decompose a flat index into per-axis indices.
  void unravel(std::size_t flat, std::span<std::size_t> idx) const;
  /// Node coordinates of a flat index.
  void coords(std::size_t flat, std::span<double> out) const;

  bool matches(const Grid& other) const;

 private:
  std::vector<Axis> axes_;
  std::size_t size_ = 0;
};

/// (a_0, ..., a_{p-1}, b_0, ..., b_{q-1}).
Grid product(const Grid& a, const Grid& b);

/// Base grid: d in {1, 2} equal axes of n nodes on [-L, L).
Grid make_grid(int d, std::size_t n, double L);

/// Phase-space grid base x dual(base); axes ordered (x, xi).
Grid phase_space_grid(const Grid& base);

/// Complex samples on a grid.
class SampledFunction {
 public:
  SampledFunction() = default;
  /// Zero function.
  explicit SampledFunction(Grid grid, std::string label = {});
  /// Rejects a value count that does not match the grid and any NaN/Inf.
  SampledFunction(Grid grid, std::vector<cplx> values, std::string label = {});

  const Grid& grid() const { return grid_; }
  std::span<const cplx> values() const { return values_; }
  std::span<cplx> values() { return values_; }
  const std::string& label() const { return label_; }
  void set_label(std::string label) { label_ = std::move(label); }

  cplx operator[](std::size_t i) const { return values_[i]; }
  cplx& operator[](std::size_t i) { return values_[i]; }
  std::size_t size() const { return values_.size(); }

  SampledFunction& operator+=(const SampledFunction& other);
  SampledFunction& operator-=(const SampledFunction& other);
  SampledFunction& operator*=(cplx c);

 private:
  Grid grid_;
  std::vector<cplx> values_;
  std::string label_;
};

SampledFunction operator+(SampledFunction a, const SampledFunction& b);
SampledFunction operator-(SampledFunction a, const SampledFunction& b);
SampledFunction operator*(cplx c, SampledFunction a);

/// Sample a callable of the node coordinates.
template <class F>
SampledFunction sample(const Grid& grid, F&& fn, std::string label = {}) {
  std::vector<cplx> values(grid.size());
  std::vector<double> x(grid.dims());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    grid.coords(i, x);
    values[i] = cplx(fn(std::span<const double>(x)));
  }
  return SampledFunction(grid, std::move(values), std::move(label));
}

/// Unitary Fourier transform on all axes; sign -1 forward, +1 inverse.
SampledFunction fourier(const SampledFunction& f, int sign);

/// Unitary Fourier transform on a nonempty subset of axes.
SampledFunction partial_fourier(const SampledFunction& f, std::span<const std::size_t> block,
                                int sign);

/// In-place centered transform along one axis of a row-major array.  The
/// array shape is given per axis; `axis_grid` is the axis being transformed
/// (its spacing sets the scale).
void fourier_axis_inplace(std::span<cplx> data, std::span<const std::size_t> shape,
                          std::size_t axis, const Axis& axis_grid, int sign);

/// Trigonometric translation along one axis: out(x) = in(x - shift), exact for
/// data band-limited to the grid and periodic on the box.
void shift_axis_inplace(std::span<cplx> data, std::span<const std::size_t> shape,
                        std::size_t axis, const Axis& axis_grid, double shift);

/// Translation along `axis` by an amount that varies along `control_axis`:
/// out(.., x, .., c, ..) = in(.., x - shifts[c], .., c, ..).  One transform pair
/// for the whole array.
void shift_axis_varying_inplace(std::span<cplx> data, std::span<const std::size_t> shape,
                                std::size_t axis, const Axis& axis_grid, std::size_t control_axis,
                                std::span<const double> shifts);

/// Trigonometric interpolant along one axis evaluated at arbitrary points.
/// The returned array has `points.size()` entries along that axis.
std::vector<cplx> resample_axis(std::span<const cplx> data, std::span<const std::size_t> shape,
                                std::size_t axis, const Axis& axis_grid, std::span<const double> points);

/// Spectral derivative d^alpha f; alpha has one entry per axis.
SampledFunction spectral_derivative(const SampledFunction& f, std::span<const int> alpha);

/// (dx)^d sum f.
cplx quadrature(const SampledFunction& f);

/// quadrature(f * conj(g)).
cplx inner(const SampledFunction& f, const SampledFunction& g);

double l2_norm(const SampledFunction& f);

/// max |f - g| over nodes whose coordinates satisfy |x_i| <= fraction * L_i.
double max_abs_diff_interior(const SampledFunction& f, const SampledFunction& g,
                             double fraction = 0.9);

/// True when every coordinate of node `flat` is within fraction * L on its axis.
bool in_interior(const Grid& grid, std::size_t flat, double fraction = 0.9);

}  // namespace gsq
