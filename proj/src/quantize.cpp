#include "gsq/quantize.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "gsq/envelope.hpp"
#include "gsq/limits.hpp"
#include "gsq/stft.hpp"
#include "parallel.hpp"

namespace gsq {

namespace {

std::size_t half_dims(const Grid& g, const char* what) {
  if (g.dims() != 2 && g.dims() != 4)
    throw std::invalid_argument(std::string(what) + ": symbol grids are 2d (d = 1) or 4d (d = 2)");
  return g.dims() / 2;
}

void require_phase_space(const Grid& g, const char* what) {
  const std::size_t d = half_dims(g, what);
  for (std::size_t i = 0; i < d; ++i)
    if (!g.axis(d + i).matches(g.axis(i).dual()))
      throw std::invalid_argument(std::string(what) + ": frequency axes must be the duals of the position axes");
}

void require_doubled(const Grid& g, const char* what) {
  const std::size_t d = half_dims(g, what);
  for (std::size_t i = 0; i < d; ++i)
    if (!g.axis(d + i).matches(g.axis(i)))
      throw std::invalid_argument(std::string(what) + ": kernel grids are base x base");
}

void check_matrix(const QuantMatrix& A, std::size_t d) {
  if (A.d != d) throw std::invalid_argument("quantization matrix dimension does not match the symbol");
  for (double v : A.entries)
    if (!std::isfinite(v)) throw std::invalid_argument("quantization matrix has non-finite entries");
  if (A.row_norm() > 1.0 + 1e-12)
    throw std::invalid_argument("shear offset |A z| may exceed the half box (row norm of A > 1)");
}

Grid base_of(const Grid& g) {
  std::vector<Axis> axes(g.axes().begin(), g.axes().begin() + static_cast<std::ptrdiff_t>(g.dims() / 2));
  return Grid(std::move(axes));
}

// In-place c(x, z) = b(x - A z, z) on an array with axes (x_1..x_d, z_1..z_d).
void shear(std::vector<cplx>& data, const Grid& g, const QuantMatrix& A) {
  const std::size_t d = g.dims() / 2;
  if (A.is_zero()) return;
  const auto shape = g.shape();
  std::vector<std::size_t> idx(g.dims());
  for (std::size_t i = 0; i < d; ++i) {
    const Axis& ax = g.axis(i);
    const Axis dual = ax.dual();
    fourier_axis_inplace(data, shape, i, ax, -1);
    for (std::size_t flat = 0; flat < data.size(); ++flat) {
      g.unravel(flat, idx);
      double shift = 0.0;
      for (std::size_t j = 0; j < d; ++j) shift += A(i, j) * g.axis(d + j).node(idx[d + j]);
      if (shift == 0.0) continue;
      const double xi = dual.node(idx[i]);
      data[flat] *= idx[i] == 0 ? cplx(std::cos(xi * shift), 0.0) : std::polar(1.0, -xi * shift);
    }
    fourier_axis_inplace(data, shape, i, dual, +1);
  }
}

// Flat index in the (x, z) array of K(x_m, y_k): z index (m - k + n/2) mod n.
std::size_t z_flat(const Grid& g, std::span<const std::size_t> idx) {
  const std::size_t d = g.dims() / 2;
  std::size_t flat = 0;
  for (std::size_t a = 0; a < d; ++a) flat = flat * g.axis(a).n + idx[a];
  for (std::size_t a = 0; a < d; ++a) {
    const std::size_t n = g.axis(a).n;
    flat = flat * n + (idx[a] + n + n / 2 - idx[d + a]) % n;
  }
  return flat;
}

}  // namespace

QuantMatrix QuantMatrix::scalar(double t, std::size_t d) {
  QuantMatrix A;
  A.d = d;
  A.entries.assign(d * d, 0.0);
  for (std::size_t i = 0; i < d; ++i) A.entries[i * d + i] = t;
  return A;
}

double QuantMatrix::t() const {
  if (d != 1) throw std::logic_error("QuantMatrix::t() needs d = 1");
  return entries[0];
}

bool QuantMatrix::is_zero() const {
  return std::all_of(entries.begin(), entries.end(), [](double v) { return v == 0.0; });
}

double QuantMatrix::row_norm() const {
  double m = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < d; ++j) s += std::abs((*this)(i, j));
    m = std::max(m, s);
  }
  return m;
}

QuantMatrix QuantMatrix::transpose() const {
  QuantMatrix out = *this;
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) out.entries[i * d + j] = (*this)(j, i);
  return out;
}

QuantMatrix QuantMatrix::operator-() const {
  QuantMatrix out = *this;
  for (auto& v : out.entries) v = -v;
  return out;
}

nlohmann::json QuantMatrix::to_json() const {
  if (d == 1) return {{"t", entries[0]}};
  return {{"d", d}, {"A", entries}};
}

QuantMatrix operator-(const QuantMatrix& a, const QuantMatrix& b) { return a + (-b); }

QuantMatrix operator+(const QuantMatrix& a, const QuantMatrix& b) {
  if (a.d != b.d) throw std::invalid_argument("matrix dimension mismatch");
  QuantMatrix out = a;
  for (std::size_t i = 0; i < out.entries.size(); ++i) out.entries[i] += b.entries[i];
  return out;
}

QuantMatrix parse_matrix(const std::string& spec) {
  if (spec.rfind("t=", 0) == 0) {
    std::size_t used = 0;
    const double t = std::stod(spec.substr(2), &used);
    if (used != spec.size() - 2) throw std::invalid_argument("bad matrix spec '" + spec + "'");
    return QuantMatrix::scalar(t);
  }
  std::vector<double> vals;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) vals.push_back(std::stod(item));
  const auto d = static_cast<std::size_t>(std::lround(std::sqrt(static_cast<double>(vals.size()))));
  if (d == 0 || d * d != vals.size()) throw std::invalid_argument("bad matrix spec '" + spec + "'");
  QuantMatrix A;
  A.d = d;
  A.entries = std::move(vals);
  return A;
}

Grid OperatorKernel::base() const { return base_of(K.grid()); }

OperatorKernel kernel_from_symbol(const SampledFunction& a, const QuantMatrix& A) {
  require_phase_space(a.grid(), "kernel_from_symbol");
  const std::size_t d = a.grid().dims() / 2;
  check_matrix(A, d);
  std::vector<std::size_t> xi_block(d);
  std::iota(xi_block.begin(), xi_block.end(), d);
  const SampledFunction b = partial_fourier(a, xi_block, +1);  // on (x, z)
  const Grid& g = b.grid();
  std::vector<cplx> c(b.values().begin(), b.values().end());
  shear(c, g, A);

  const Grid base = base_of(a.grid());
  const Grid kg = product(base, base);
  const double scale = std::pow(2.0 * kPi, -0.5 * static_cast<double>(d));
  std::vector<cplx> K(kg.size());
  detail::parallel_for(kg.size(), [&](std::size_t flat) {
    std::vector<std::size_t> idx(kg.dims());
    kg.unravel(flat, idx);
    K[flat] = scale * c[z_flat(g, idx)];
  });
  return {SampledFunction(kg, std::move(K), "K[" + a.label() + "]"), A, a.label()};
}

SampledFunction symbol_from_kernel(const SampledFunction& K, const QuantMatrix& A) {
  require_doubled(K.grid(), "symbol_from_kernel");
  const std::size_t d = K.grid().dims() / 2;
  check_matrix(A, d);
  const Grid& kg = K.grid();
  const double scale = std::pow(2.0 * kPi, 0.5 * static_cast<double>(d));
  std::vector<cplx> c(kg.size());
  std::vector<std::size_t> idx(kg.dims());
  for (std::size_t flat = 0; flat < kg.size(); ++flat) {
    kg.unravel(flat, idx);
    c[z_flat(kg, idx)] = scale * K[flat];
  }
  shear(c, kg, -A);
  std::vector<std::size_t> z_block(d);
  std::iota(z_block.begin(), z_block.end(), d);
  SampledFunction sym = partial_fourier(SampledFunction(kg, std::move(c)), z_block, -1);
  sym.set_label("symbol[" + K.label() + "]");
  return sym;
}

SampledFunction symbol_from_kernel(const OperatorKernel& K) { return symbol_from_kernel(K.K, K.A); }

SampledFunction apply_kernel(const OperatorKernel& K, const SampledFunction& f) {
  const Grid base = K.base();
  if (!f.grid().matches(base)) throw std::invalid_argument("apply_kernel: grid mismatch");
  const auto N = static_cast<Eigen::Index>(base.size());
  Eigen::Map<const Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> M(K.K.values().data(), N, N);
  Eigen::Map<const Eigen::VectorXcd> v(f.values().data(), N);
  const Eigen::VectorXcd g = (M * v) * base.cell_volume();
  return SampledFunction(base, std::vector<cplx>(g.data(), g.data() + N), "Op[" + K.symbol_label + "]" + f.label());
}

SampledFunction apply_op(const SampledFunction& a, const QuantMatrix& A, const SampledFunction& f, ApplyRoute route) {
  require_phase_space(a.grid(), "apply_op");
  const Grid base = base_of(a.grid());
  if (!f.grid().matches(base)) throw std::invalid_argument("apply_op: function grid does not match the symbol");
  if (route == ApplyRoute::automatic) route = A.is_zero() ? ApplyRoute::direct : ApplyRoute::kernel;
  if (route == ApplyRoute::kernel) return apply_kernel(kernel_from_symbol(a, A), f);
  if (!A.is_zero()) throw std::invalid_argument("apply_op: the direct route exists only for A = 0");

  const SampledFunction fh = fourier(f, -1);
  const Grid& dual = fh.grid();
  const std::size_t N = base.size(), M = dual.size();
  const double scale = std::pow(2.0 * kPi, -0.5 * static_cast<double>(base.dims())) * dual.cell_volume();
  std::vector<cplx> g(N);
  detail::parallel_for(N, [&](std::size_t m) {
    std::vector<double> x(base.dims()), xi(dual.dims());
    base.coords(m, x);
    cplx acc = 0.0;
    for (std::size_t j = 0; j < M; ++j) {
      dual.coords(j, xi);
      double phase = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) phase += x[i] * xi[i];
      acc += a[m * M + j] * fh[j] * std::polar(1.0, phase);
    }
    g[m] = scale * acc;
  });
  return SampledFunction(base, std::move(g), "Op[" + a.label() + "]" + f.label());
}

SampledFunction apply_op_reference(const std::function<cplx(double, double)>& a, double t, const SampledFunction& f) {
  const Grid& g = f.grid();
  if (g.dims() != 1) throw std::invalid_argument("apply_op_reference is 1d only");
  if (g.size() > 64) throw std::invalid_argument("apply_op_reference is limited to n <= 64");
  const Axis ax = g.axis(0);
  const Axis dual = ax.dual();
  const std::size_t n = ax.n;
  std::vector<cplx> out(n);
  const double w = ax.spacing() * dual.spacing() / (2.0 * kPi);
  for (std::size_t m = 0; m < n; ++m) {
    const double x = ax.node(m);
    cplx acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double y = ax.node(k);
      for (std::size_t j = 0; j < n; ++j) {
        const double xi = dual.node(j);
        acc += a(x - t * (x - y), xi) * f[k] * std::polar(1.0, (x - y) * xi);
      }
    }
    out[m] = w * acc;
  }
  return SampledFunction(g, std::move(out), "Op_ref" + f.label());
}

nlohmann::json MappingReport::to_json() const {
  auto rows = nlohmann::json::array();
  for (const auto& e : entries)
    rows.push_back({{"label", e.label},
                    {"input_seminorm", e.input_seminorm},
                    {"output_seminorm", e.output_seminorm},
                    {"input_rates", e.input_rates},
                    {"output_rates", e.output_rates},
                    {"finite", e.finite}});
  return {{"probe", "empirical"},
          {"symbol", symbol_label},
          {"A", A.to_json()},
          {"s", params.s},
          {"sigma", params.sigma},
          {"h", params.h},
          {"cutoff", cutoff},
          {"entries", rows},
          {"all_finite", all_finite}};
}

MappingReport verify_mapping(const SampledFunction& a, const QuantMatrix& A, const GevreyParams& params,
                             const std::vector<SampledFunction>& family, int cutoff) {
  MappingReport rep;
  rep.symbol_label = a.label();
  rep.A = A;
  rep.params = params;
  rep.cutoff = cutoff;
  rep.all_finite = true;
  if (family.empty()) throw std::invalid_argument("verify_mapping needs a nonempty family");
  const OperatorKernel K = kernel_from_symbol(a, A);
  const SampledFunction window = gaussian_window(family.front().grid());
  const auto model = EnvelopeModel::decay_decay({params.s, params.sigma});
  FitOptions fo;
  fo.box_fraction = 0.9;
  for (const auto& f : family) {
    MappingEntry e;
    e.label = f.label();
    const SampledFunction g = apply_kernel(K, f);
    e.input_seminorm = gs_seminorm(f, params, cutoff).overall;
    e.output_seminorm = gs_seminorm(g, params, cutoff).overall;
    e.input_rates = fit_envelope(stft(f, window), model, fo).rates;
    e.output_rates = fit_envelope(stft(g, window), model, fo).rates;
    e.finite = std::isfinite(e.output_seminorm) && std::isfinite(e.output_rates[0]) && std::isfinite(e.output_rates[1]);
    rep.all_finite = rep.all_finite && e.finite;
    rep.entries.push_back(std::move(e));
  }
  return rep;
}

std::vector<SampledFunction> hermite_family(const Grid& grid, int count) {
  std::vector<SampledFunction> out;
  for (int k = 0; k < count; ++k) out.push_back(hermite(k, grid));
  return out;
}

}  // namespace gsq
