#include "gsq/grid.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "gsq/limits.hpp"

namespace gsq {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

bool close_rel(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(std::abs(a), std::abs(b)); }

// Raw DFT along one axis, unnormalised, e^{sign 2 pi i k j / n}.
void dft_axis(std::span<cplx> data, std::span<const std::size_t> shape, std::size_t axis, int sign) {
  const std::size_t n = shape[axis];
  std::size_t inner = 1;
  for (std::size_t i = axis + 1; i < shape.size(); ++i) inner *= shape[i];
  std::size_t outer = 1;
  for (std::size_t i = 0; i < axis; ++i) outer *= shape[i];

  fftw_iodim dim{static_cast<int>(n), static_cast<int>(inner), static_cast<int>(inner)};
  fftw_iodim loops[2] = {
      {static_cast<int>(outer), static_cast<int>(n * inner), static_cast<int>(n * inner)},
      {static_cast<int>(inner), 1, 1}};
  auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
  fftw_plan plan;
  {
    std::lock_guard lock(planner_mutex());
    plan = fftw_plan_guru_dft(1, &dim, 2, loops, ptr, ptr, sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD,
                              FFTW_ESTIMATE);
  }
  if (plan == nullptr) throw std::runtime_error("fftw planning failed");
  fftw_execute(plan);
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(plan);
}

// Multiply element (.., k, ..) along `axis` by factor(k).
template <class Factor>
void scale_along_axis(std::span<cplx> data, std::span<const std::size_t> shape, std::size_t axis,
                      Factor&& factor) {
  const std::size_t n = shape[axis];
  std::size_t inner = 1;
  for (std::size_t i = axis + 1; i < shape.size(); ++i) inner *= shape[i];
  std::size_t outer = data.size() / (n * inner);
  std::vector<cplx> f(n);
  for (std::size_t k = 0; k < n; ++k) f[k] = factor(k);
  for (std::size_t o = 0; o < outer; ++o) {
    cplx* block = data.data() + o * n * inner;
    for (std::size_t k = 0; k < n; ++k) {
      const cplx c = f[k];
      cplx* row = block + k * inner;
      for (std::size_t i = 0; i < inner; ++i) row[i] *= c;
    }
  }
}

void check_sign(int sign) {
  if (sign != 1 && sign != -1) throw std::invalid_argument("Fourier sign must be +1 or -1");
}

}  // namespace

std::vector<double> Axis::nodes() const {
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) out[k] = node(k);
  return out;
}

bool Axis::matches(const Axis& other) const { return n == other.n && close_rel(half_width, other.half_width); }

Grid::Grid(std::vector<Axis> axes) : axes_(std::move(axes)) {
  if (axes_.empty()) throw std::invalid_argument("grid needs at least one axis");
  size_ = 1;
  for (const auto& a : axes_) {
    if (a.n == 0 || a.n % 2 != 0) throw std::invalid_argument("grid axis needs an even, positive node count");
    if (!(a.half_width > 0.0) || !std::isfinite(a.half_width))
      throw std::invalid_argument("grid half width must be positive and finite");
    size_ *= a.n;
  }
}

double Grid::cell_volume() const {
  double v = 1.0;
  for (const auto& a : axes_) v *= a.spacing();
  return v;
}

std::vector<std::size_t> Grid::shape() const {
  std::vector<std::size_t> s;
  s.reserve(axes_.size());
  for (const auto& a : axes_) s.push_back(a.n);
  return s;
}

std::size_t Grid::stride(std::size_t i) const {
  std::size_t s = 1;
  for (std::size_t j = i + 1; j < axes_.size(); ++j) s *= axes_[j].n;
  return s;
}

Grid Grid::dual() const {
  std::vector<Axis> out;
  out.reserve(axes_.size());
  for (const auto& a : axes_) out.push_back(a.dual());
  return Grid(std::move(out));
}

Grid Grid::dual_on(std::span<const std::size_t> which) const {
  std::vector<Axis> out = axes_;
  for (std::size_t i : which) out.at(i) = axes_.at(i).dual();
  return Grid(std::move(out));
}

void Grid::unravel(std::size_t flat, std::span<std::size_t> idx) const {
  for (std::size_t i = axes_.size(); i-- > 0;) {
    idx[i] = flat % axes_[i].n;
    flat /= axes_[i].n;
  }
}

void Grid::coords(std::size_t flat, std::span<double> out) const {
  for (std::size_t i = axes_.size(); i-- > 0;) {
    out[i] = axes_[i].node(flat % axes_[i].n);
    flat /= axes_[i].n;
  }
}

bool Grid::matches(const Grid& other) const {
  if (axes_.size() != other.axes_.size()) return false;
  for (std::size_t i = 0; i < axes_.size(); ++i)
    if (!axes_[i].matches(other.axes_[i])) return false;
  return true;
}

Grid product(const Grid& a, const Grid& b) {
  std::vector<Axis> axes = a.axes();
  axes.insert(axes.end(), b.axes().begin(), b.axes().end());
  return Grid(std::move(axes));
}

Grid make_grid(int d, std::size_t n, double L) {
  if (d < 1 || d > 2) throw std::invalid_argument("base grids have d = 1 or d = 2");
  if (n == 0 || n % 2 != 0) throw std::invalid_argument("points per axis must be even");
  if (!(L > 0.0)) throw std::invalid_argument("half width must be positive");
  return Grid(std::vector<Axis>(static_cast<std::size_t>(d), Axis{n, L}));
}

Grid phase_space_grid(const Grid& base) { return product(base, base.dual()); }

SampledFunction::SampledFunction(Grid grid, std::string label)
    : grid_(std::move(grid)), values_(grid_.size()), label_(std::move(label)) {}

SampledFunction::SampledFunction(Grid grid, std::vector<cplx> values, std::string label)
    : grid_(std::move(grid)), values_(std::move(values)), label_(std::move(label)) {
  if (values_.size() != grid_.size())
    throw std::invalid_argument("value count does not match grid size");
  for (const auto& v : values_)
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
      throw std::domain_error("sampled function contains NaN or Inf");
}

SampledFunction& SampledFunction::operator+=(const SampledFunction& other) {
  if (!grid_.matches(other.grid_)) throw std::invalid_argument("grid mismatch");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}

SampledFunction& SampledFunction::operator-=(const SampledFunction& other) {
  if (!grid_.matches(other.grid_)) throw std::invalid_argument("grid mismatch");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
  return *this;
}

SampledFunction& SampledFunction::operator*=(cplx c) {
  for (auto& v : values_) v *= c;
  return *this;
}

SampledFunction operator+(SampledFunction a, const SampledFunction& b) { return a += b; }
SampledFunction operator-(SampledFunction a, const SampledFunction& b) { return a -= b; }
SampledFunction operator*(cplx c, SampledFunction a) { return a *= c; }

void fourier_axis_inplace(std::span<cplx> data, std::span<const std::size_t> shape, std::size_t axis,
                          const Axis& axis_grid, int sign) {
  check_sign(sign);
  const std::size_t n = shape[axis];
  scale_along_axis(data, shape, axis, [](std::size_t k) { return k % 2 ? -1.0 : 1.0; });
  dft_axis(data, shape, axis, sign);
  const double base = axis_grid.spacing() / std::sqrt(2.0 * kPi) * ((n / 2) % 2 ? -1.0 : 1.0);
  scale_along_axis(data, shape, axis, [base](std::size_t j) { return j % 2 ? -base : base; });
}

void shift_axis_inplace(std::span<cplx> data, std::span<const std::size_t> shape, std::size_t axis,
                        const Axis& axis_grid, double shift) {
  if (shift == 0.0) return;
  const Axis dual = axis_grid.dual();
  fourier_axis_inplace(data, shape, axis, axis_grid, -1);
  scale_along_axis(data, shape, axis, [&](std::size_t j) {
    const double xi = dual.node(j);
    // Nyquist mode split symmetrically so real data stays real.
    if (j == 0) return cplx(std::cos(xi * shift), 0.0);
    return std::polar(1.0, -xi * shift);
  });
  fourier_axis_inplace(data, shape, axis, dual, +1);
}

void shift_axis_varying_inplace(std::span<cplx> data, std::span<const std::size_t> shape, std::size_t axis,
                                const Axis& axis_grid, std::size_t control_axis, std::span<const double> shifts) {
  if (axis == control_axis) throw std::invalid_argument("shift axis and control axis must differ");
  if (shifts.size() != shape[control_axis]) throw std::invalid_argument("one shift per control index required");
  const Axis dual = axis_grid.dual();
  fourier_axis_inplace(data, shape, axis, axis_grid, -1);
  std::vector<std::size_t> stride(shape.size(), 1);
  for (std::size_t i = shape.size() - 1; i-- > 0;) stride[i] = stride[i + 1] * shape[i + 1];
  for (std::size_t flat = 0; flat < data.size(); ++flat) {
    const std::size_t j = (flat / stride[axis]) % shape[axis];
    const double shift = shifts[(flat / stride[control_axis]) % shape[control_axis]];
    if (shift == 0.0) continue;
    const double xi = dual.node(j);
    data[flat] *= j == 0 ? cplx(std::cos(xi * shift), 0.0) : std::polar(1.0, -xi * shift);
  }
  fourier_axis_inplace(data, shape, axis, dual, +1);
}

std::vector<cplx> resample_axis(std::span<const cplx> data, std::span<const std::size_t> shape, std::size_t axis,
                                const Axis& axis_grid, std::span<const double> points) {
  std::vector<cplx> spec(data.begin(), data.end());
  fourier_axis_inplace(spec, shape, axis, axis_grid, -1);
  const Axis dual = axis_grid.dual();
  const std::size_t n = shape[axis];
  const std::size_t m = points.size();
  std::size_t inner = 1;
  for (std::size_t i = axis + 1; i < shape.size(); ++i) inner *= shape[i];
  const std::size_t outer = data.size() / (n * inner);
  // basis(p, j) = dxi / sqrt(2 pi) e^{i xi_j p}, Nyquist mode symmetrised.
  std::vector<cplx> basis(m * n);
  const double w = dual.spacing() / std::sqrt(2.0 * kPi);
  for (std::size_t p = 0; p < m; ++p)
    for (std::size_t j = 0; j < n; ++j) {
      const double xi = dual.node(j);
      basis[p * n + j] = j == 0 ? cplx(w * std::cos(xi * points[p]), 0.0) : std::polar(w, xi * points[p]);
    }
  std::vector<cplx> out(outer * m * inner, 0.0);
  for (std::size_t o = 0; o < outer; ++o)
    for (std::size_t p = 0; p < m; ++p) {
      cplx* dst = out.data() + (o * m + p) * inner;
      for (std::size_t j = 0; j < n; ++j) {
        const cplx b = basis[p * n + j];
        const cplx* src = spec.data() + (o * n + j) * inner;
        for (std::size_t i = 0; i < inner; ++i) dst[i] += b * src[i];
      }
    }
  return out;
}

SampledFunction partial_fourier(const SampledFunction& f, std::span<const std::size_t> block, int sign) {
  check_sign(sign);
  if (block.empty()) throw std::invalid_argument("partial Fourier transform needs a nonempty axis block");
  const Grid& g = f.grid();
  std::vector<std::size_t> seen;
  for (std::size_t a : block) {
    if (a >= g.dims()) throw std::invalid_argument("axis out of range");
    if (std::find(seen.begin(), seen.end(), a) != seen.end()) throw std::invalid_argument("repeated axis");
    seen.push_back(a);
  }
  std::vector<cplx> data(f.values().begin(), f.values().end());
  const auto shape = g.shape();
  for (std::size_t a : block) fourier_axis_inplace(data, shape, a, g.axis(a), sign);
  return SampledFunction(g.dual_on(block), std::move(data), f.label());
}

SampledFunction fourier(const SampledFunction& f, int sign) {
  std::vector<std::size_t> all(f.grid().dims());
  std::iota(all.begin(), all.end(), 0);
  return partial_fourier(f, all, sign);
}

SampledFunction spectral_derivative(const SampledFunction& f, std::span<const int> alpha) {
  const Grid& g = f.grid();
  if (alpha.size() != g.dims()) throw std::invalid_argument("multi-index length must match grid dimension");
  int order = 0;
  for (int a : alpha) {
    if (a < 0) throw std::invalid_argument("negative derivative order");
    order += a;
  }
  if (order > limits().max_derivative_order)
    throw std::invalid_argument("derivative order " + std::to_string(order) + " exceeds cap " +
                                std::to_string(limits().max_derivative_order));
  std::vector<cplx> data(f.values().begin(), f.values().end());
  if (order == 0) return SampledFunction(g, std::move(data), f.label());
  const auto shape = g.shape();
  for (std::size_t ax = 0; ax < g.dims(); ++ax) {
    const int a = alpha[ax];
    if (a == 0) continue;
    const Axis dual = g.axis(ax).dual();
    fourier_axis_inplace(data, shape, ax, g.axis(ax), -1);
    scale_along_axis(data, shape, ax, [&](std::size_t j) {
      // The Nyquist mode has no consistent odd derivative.
      if (j == 0 && a % 2 == 1) return cplx(0.0);
      return std::pow(cplx(0.0, dual.node(j)), a);
    });
    fourier_axis_inplace(data, shape, ax, dual, +1);
  }
  return SampledFunction(g, std::move(data), f.label());
}

cplx quadrature(const SampledFunction& f) {
  cplx sum = 0.0;
  for (const auto& v : f.values()) sum += v;
  return sum * f.grid().cell_volume();
}

cplx inner(const SampledFunction& f, const SampledFunction& g) {
  if (!f.grid().matches(g.grid())) throw std::invalid_argument("grid mismatch");
  cplx sum = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) sum += f[i] * std::conj(g[i]);
  return sum * f.grid().cell_volume();
}

double l2_norm(const SampledFunction& f) {
  double sum = 0.0;
  for (const auto& v : f.values()) sum += std::norm(v);
  return std::sqrt(sum * f.grid().cell_volume());
}

bool in_interior(const Grid& grid, std::size_t flat, double fraction) {
  for (std::size_t i = grid.dims(); i-- > 0;) {
    const Axis& a = grid.axis(i);
    if (std::abs(a.node(flat % a.n)) > fraction * a.half_width) return false;
    flat /= a.n;
  }
  return true;
}

double max_abs_diff_interior(const SampledFunction& f, const SampledFunction& g, double fraction) {
  if (!f.grid().matches(g.grid())) throw std::invalid_argument("grid mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i)
    if (in_interior(f.grid(), i, fraction)) m = std::max(m, std::abs(f[i] - g[i]));
  return m;
}

Limits& limits() {
  static Limits l;
  return l;
}

void require_complex_capacity(std::size_t count, const std::string& what) {
  const std::size_t bytes = count * sizeof(cplx);
  if (count != 0 && bytes / sizeof(cplx) != count) throw ResourceLimit(what + ": size overflow");
  if (bytes > limits().max_bytes)
    throw ResourceLimit(what + " needs " + std::to_string(bytes) + " bytes, ceiling is " +
                        std::to_string(limits().max_bytes));
}

unsigned worker_count() {
  if (limits().threads > 0) return limits().threads;
  if (const char* env = std::getenv("GSQ_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace gsq
