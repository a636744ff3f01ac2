#include "gsq/calculus.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

#include "gsq/limits.hpp"
#include "gsq/stft.hpp"
#include "parallel.hpp"

namespace gsq {

namespace {

void require_symbol_1d(const SampledFunction& a, const char* what) {
  const Grid& g = a.grid();
  if (g.dims() != 2) throw std::invalid_argument(std::string(what) + " works on d = 1 symbols (2d grids)");
  if (!g.axis(1).matches(g.axis(0).dual()))
    throw std::invalid_argument(std::string(what) + ": the xi axis must be the dual of the x axis");
}

void require_same(const SampledFunction& a, const SampledFunction& b, const char* what) {
  if (!a.grid().matches(b.grid())) throw std::invalid_argument(std::string(what) + ": grid mismatch");
}

// Weights w_k with p(point) = sum_k w_k f_k for the trigonometric interpolant.
std::vector<cplx> trig_weights(const Axis& ax, double point) {
  const std::size_t n = ax.n;
  std::vector<cplx> eye(n * n, 0.0);
  for (std::size_t k = 0; k < n; ++k) eye[k * n + k] = 1.0;
  const std::size_t shape[2] = {n, n};
  const double pts[1] = {point};
  return resample_axis(eye, shape, 0, ax, pts);
}

}  // namespace

FourDField FourDField::tensor(const SampledFunction& a1, const SampledFunction& a2) {
  require_symbol_1d(a1, "FourDField::tensor");
  require_same(a1, a2, "FourDField::tensor");
  const Grid& g = a1.grid();
  const Grid g4({g.axis(0), g.axis(0), g.axis(1), g.axis(1)});
  require_complex_capacity(g4.size(), "4d symbol-pair field");
  const std::size_t nx = g.axis(0).n, nxi = g.axis(1).n;
  std::vector<cplx> v(g4.size());
  for (std::size_t x1 = 0; x1 < nx; ++x1)
    for (std::size_t x2 = 0; x2 < nx; ++x2)
      for (std::size_t k1 = 0; k1 < nxi; ++k1)
        for (std::size_t k2 = 0; k2 < nxi; ++k2)
          v[((x1 * nx + x2) * nxi + k1) * nxi + k2] = a1[x1 * nxi + k1] * a2[x2 * nxi + k2];
  return {SampledFunction(g4, std::move(v), a1.label() + "(x)" + a2.label())};
}

SampledFunction quant_transfer(const SampledFunction& a, const QuantMatrix& A) {
  const Grid& g = a.grid();
  if (g.dims() != 2 && g.dims() != 4) throw std::invalid_argument("quant_transfer needs a symbol grid");
  const std::size_t d = g.dims() / 2;
  if (A.d != d) throw std::invalid_argument("quant_transfer: matrix dimension mismatch");
  for (std::size_t i = 0; i < d; ++i)
    if (!g.axis(d + i).matches(g.axis(i).dual()))
      throw std::invalid_argument("quant_transfer: the xi axes must be the duals of the x axes");
  if (A.is_zero()) return a;
  SampledFunction spec = fourier(a, -1);  // (eta, y)
  const Grid& sg = spec.grid();
  std::vector<double> c(sg.dims());
  for (std::size_t flat = 0; flat < spec.size(); ++flat) {
    sg.coords(flat, c);
    double phase = 0.0;
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) phase += A(i, j) * c[d + j] * c[i];
    spec[flat] *= std::polar(1.0, phase);
  }
  const SampledFunction back = fourier(spec, +1);
  return SampledFunction(g, std::vector<cplx>(back.values().begin(), back.values().end()), a.label());
}

nlohmann::json DeviationReport::to_json() const {
  return {{"check", check}, {"max_dev", max_dev}, {"reference_scale", reference_scale}, {"points", points}};
}

DeviationReport stft_covariance_check(const SampledFunction& a, const SampledFunction& phi, const QuantMatrix& A) {
  require_symbol_1d(a, "stft_covariance_check");
  require_same(a, phi, "stft_covariance_check");
  if (A.d != 1) throw std::invalid_argument("stft_covariance_check: d = 1 only");
  const double t = A.t();

  const STFTField lhs = stft4(quant_transfer(a, A), quant_transfer(phi, A));
  STFTField rhs = stft4(a, phi);
  const Grid g = rhs.grid();  // (x, xi, eta, y)
  const auto shape = g.shape();
  if (t != 0.0) {
    std::vector<double> sy(g.axis(3).n), seta(g.axis(2).n);
    for (std::size_t k = 0; k < sy.size(); ++k) sy[k] = -t * g.axis(3).node(k);
    for (std::size_t k = 0; k < seta.size(); ++k) seta[k] = -t * g.axis(2).node(k);
    shift_axis_varying_inplace(rhs.values, shape, 0, g.axis(0), 3, sy);
    shift_axis_varying_inplace(rhs.values, shape, 1, g.axis(1), 2, seta);
  }
  DeviationReport rep;
  rep.check = "covariance";
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!in_interior(g, i, 0.9)) continue;
    ++rep.points;
    const double r = std::abs(rhs.values[i]);
    rep.reference_scale = std::max(rep.reference_scale, r);
    rep.max_dev = std::max(rep.max_dev, std::abs(std::abs(lhs.values[i]) - r));
  }
  return rep;
}

SampledFunction trace_map(const FourDField& field) {
  const Grid& g = field.F.grid();
  if (g.dims() != 4) throw std::invalid_argument("trace_map needs a 4d field");
  if (!g.axis(0).matches(g.axis(1)) || !g.axis(2).matches(g.axis(3)))
    throw std::invalid_argument("trace_map: diagonal axes must share grids");
  const Grid out({g.axis(0), g.axis(2)});
  const std::size_t nx = g.axis(0).n, nxi = g.axis(2).n;
  std::vector<cplx> v(out.size());
  for (std::size_t x = 0; x < nx; ++x)
    for (std::size_t k = 0; k < nxi; ++k) v[x * nxi + k] = field.F[((x * nx + x) * nxi + k) * nxi + k];
  return SampledFunction(out, std::move(v), "trace[" + field.F.label() + "]");
}

SampledFunction sharp0(const SampledFunction& a1, const SampledFunction& a2, SharpRoute route) {
  require_symbol_1d(a1, "sharp0");
  require_same(a1, a2, "sharp0");
  const QuantMatrix zero = QuantMatrix::scalar(0.0);
  SampledFunction out;
  if (route == SharpRoute::kernel) {
    const OperatorKernel K = compose_kernels(kernel_from_symbol(a1, zero), kernel_from_symbol(a2, zero));
    const SampledFunction s = symbol_from_kernel(K);
    out = SampledFunction(a1.grid(), std::vector<cplx>(s.values().begin(), s.values().end()));
  } else {
    FourDField F = FourDField::tensor(a1, a2);
    const Grid& g = F.F.grid();  // (x1, x2, xi1, xi2)
    const auto shape = g.shape();
    auto values = F.F.values();
    fourier_axis_inplace(values, shape, 2, g.axis(2), -1);  // xi1 -> u
    fourier_axis_inplace(values, shape, 1, g.axis(1), -1);  // x2 -> v
    const Axis u_axis = g.axis(2).dual(), v_axis = g.axis(1).dual();
    const std::size_t n0 = shape[0], n1 = shape[1], n2 = shape[2], n3 = shape[3];
    for (std::size_t i0 = 0; i0 < n0; ++i0)
      for (std::size_t i1 = 0; i1 < n1; ++i1)
        for (std::size_t i2 = 0; i2 < n2; ++i2) {
          const cplx m = std::polar(1.0, u_axis.node(i2) * v_axis.node(i1));
          cplx* row = values.data() + ((i0 * n1 + i1) * n2 + i2) * n3;
          for (std::size_t i3 = 0; i3 < n3; ++i3) row[i3] *= m;
        }
    fourier_axis_inplace(values, shape, 1, v_axis, +1);
    fourier_axis_inplace(values, shape, 2, u_axis, +1);
    const SampledFunction tr = trace_map(F);
    out = SampledFunction(a1.grid(), std::vector<cplx>(tr.values().begin(), tr.values().end()));
  }
  out.set_label(a1.label() + "#0" + a2.label());
  return out;
}

SampledFunction sharpA(const SampledFunction& a1, const SampledFunction& a2, const QuantMatrix& A, SharpRoute route) {
  if (A.is_zero()) return sharp0(a1, a2, route);
  SampledFunction out = quant_transfer(sharp0(quant_transfer(a1, A), quant_transfer(a2, A), route), -A);
  out.set_label(a1.label() + "#A" + a2.label());
  return out;
}

OperatorKernel compose_kernels(const OperatorKernel& K1, const OperatorKernel& K2) {
  if (!K1.K.grid().matches(K2.K.grid())) throw std::invalid_argument("compose_kernels: grid mismatch");
  const Grid base = K1.base();
  const auto N = static_cast<Eigen::Index>(base.size());
  using RowMat = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Eigen::Map<const RowMat> M1(K1.K.values().data(), N, N), M2(K2.K.values().data(), N, N);
  RowMat P = (M1 * M2) * base.cell_volume();
  std::vector<cplx> v(P.data(), P.data() + P.size());
  return {SampledFunction(K1.K.grid(), std::move(v), K1.K.label() + "o" + K2.K.label()), K1.A,
          K1.symbol_label + "o" + K2.symbol_label};
}

OperatorKernel triple_compose(const OperatorKernel& K1, const OperatorKernel& K2, const OperatorKernel& K3) {
  if (!K1.K.grid().matches(K2.K.grid()) || !K1.K.grid().matches(K3.K.grid()))
    throw std::invalid_argument("triple_compose: grid mismatch");
  const Grid base = K1.base();
  const std::size_t N = base.size();
  const double w = base.cell_volume() * base.cell_volume();
  std::vector<cplx> out(N * N);
  const cplx* k1 = K1.K.values().data();
  const cplx* k2 = K2.K.values().data();
  const cplx* k3 = K3.K.values().data();
  detail::parallel_for(N, [&](std::size_t x) {
    for (std::size_t y = 0; y < N; ++y) {
      cplx acc = 0.0;
      for (std::size_t z1 = 0; z1 < N; ++z1) {
        const cplx a = k1[x * N + z1];
        const cplx* row2 = k2 + z1 * N;
        for (std::size_t z2 = 0; z2 < N; ++z2) acc += row2[z2] * (a * k3[z2 * N + y]);
      }
      out[x * N + y] = w * acc;
    }
  });
  return {SampledFunction(K1.K.grid(), std::move(out), "triple"), K1.A,
          K1.symbol_label + "o" + K2.symbol_label + "o" + K3.symbol_label};
}

DeviationReport stft_kernel_relation_check(const SampledFunction& a, const SampledFunction& phi, const QuantMatrix& A,
                                           std::size_t stride) {
  require_symbol_1d(a, "stft_kernel_relation_check");
  require_same(a, phi, "stft_kernel_relation_check");
  if (A.d != 1) throw std::invalid_argument("stft_kernel_relation_check: d = 1 only");
  if (stride == 0) throw std::invalid_argument("stride must be positive");
  const double t = A.t();

  const OperatorKernel K = kernel_from_symbol(a, A);
  const OperatorKernel psi = kernel_from_symbol(phi, A);
  const STFTField lhs = stft4(K.K, psi.K);  // (x, y, xi, eta)
  const STFTField V = stft4(a, phi);        // (x', xi', eta', y')
  const Grid lg = lhs.grid();
  const Grid vg = V.grid();
  const auto vshape = vg.shape();

  DeviationReport rep;
  rep.check = "stft-kernel";
  std::vector<std::size_t> idx(4);
  std::vector<double> c(4);
  for (std::size_t flat = 0; flat < lg.size(); ++flat) {
    lg.unravel(flat, idx);
    bool on_lattice = true;
    for (std::size_t k : idx) on_lattice = on_lattice && k % stride == 0;
    if (!on_lattice || !in_interior(lg, flat, kInteriorFraction)) continue;
    lg.coords(flat, c);
    const double x = c[0], y = c[1], xi = c[2], eta = c[3];
    const double args[4] = {x - t * (x - y), -eta + t * (xi + eta), xi + eta, y - x};

    // Both sides are only faithful where no argument reaches the periodic
    // images of the box.
    bool representable = true;
    bool on_node = true;
    double u[4];
    for (std::size_t k = 0; k < 4; ++k) {
      const Axis& ax = vg.axis(k);
      if (std::abs(args[k]) > kInteriorFraction * ax.half_width) representable = false;
      u[k] = (args[k] + ax.half_width) / ax.spacing();
      if (std::abs(u[k] - std::round(u[k])) > 1e-9) on_node = false;
    }
    if (!representable) continue;

    cplx v = 0.0;
    if (on_node) {
      std::size_t f = 0;
      for (std::size_t k = 0; k < 4; ++k) f = f * vshape[k] + static_cast<std::size_t>(std::lround(u[k]));
      v = V.values[f];
    } else {
      // Separable trigonometric interpolation, contracting one axis at a time.
      std::vector<cplx> cur(V.values.begin(), V.values.end());
      std::size_t rest = cur.size();
      for (std::size_t k = 0; k < 4; ++k) {
        const auto w = trig_weights(vg.axis(k), args[k]);
        const std::size_t n = vshape[k];
        rest /= n;
        std::vector<cplx> next(rest, 0.0);
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t r = 0; r < rest; ++r) next[r] += w[i] * cur[i * rest + r];
        cur = std::move(next);
      }
      v = cur[0];
    }
    const cplx r = (1.0 / (2.0 * kPi)) * std::polar(1.0, (x - y) * (eta - t * (xi + eta))) * v;
    ++rep.points;
    rep.reference_scale = std::max(rep.reference_scale, std::abs(r));
    rep.max_dev = std::max(rep.max_dev, std::abs(lhs.values[flat] - r));
  }
  return rep;
}

nlohmann::json TraceBoundReport::to_json() const {
  return {{"trace_norm", trace_norm}, {"field_norm", field_norm}, {"cutoff", cutoff}, {"holds", holds}};
}

TraceBoundReport trace_leibniz_check(const FourDField& F, const GevreyParams& p, int cutoff) {
  TraceBoundReport rep;
  rep.cutoff = cutoff;
  const SampledFunction tr = trace_map(F);
  HrParams four{p.h, p.r, {p.s, p.s, p.sigma, p.sigma}, {p.sigma, p.sigma, p.s, p.s}};
  HrParams two{2.0 * p.h, 2.0 * p.r, {p.s, p.sigma}, {p.sigma, p.s}};
  rep.field_norm = hr_norm(F.F, four, cutoff);
  rep.trace_norm = hr_norm(tr, two, cutoff);
  rep.holds = rep.trace_norm <= rep.field_norm * (1.0 + 1e-9);
  return rep;
}

MollifyResult mollify(const SampledFunction& a, const SampledFunction& phi, double eps) {
  require_same(a, phi, "mollify");
  if (a.grid().dims() != 2) throw std::invalid_argument("mollify works on 2d symbol grids");
  if (!(eps > 0.0)) throw std::invalid_argument("mollify needs eps > 0");
  const Grid& g = a.grid();
  const std::size_t origin = g.axis(0).origin() * g.axis(1).n + g.axis(1).origin();
  if (std::abs(phi[origin] - 1.0) > 1e-12) throw std::invalid_argument("mollify needs phi(0) = 1");

  const auto shape = g.shape();
  std::vector<double> p0 = g.axis(0).nodes(), p1 = g.axis(1).nodes();
  for (auto& v : p0) v *= eps;
  for (auto& v : p1) v *= eps;
  std::vector<cplx> tmp = resample_axis(phi.values(), shape, 0, g.axis(0), p0);
  std::vector<cplx> dil = resample_axis(tmp, shape, 1, g.axis(1), p1);

  double dev = 0.0;
  for (const auto& v : dil) dev = std::max(dev, std::abs(v - 1.0));
  MollifyResult res;
  if (dev < 1e-15) {
    res.value = a;
    res.flat = true;
    return res;
  }
  for (std::size_t i = 0; i < dil.size(); ++i) dil[i] *= a[i];
  // The origin is a node of every dilation; keep a(0) bit-exact there.
  dil[origin] = a[origin];
  res.value = SampledFunction(g, std::move(dil), a.label() + "_eps");
  return res;
}

}  // namespace gsq
