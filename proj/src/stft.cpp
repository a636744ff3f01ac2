#include "gsq/stft.hpp"

#include <cmath>
#include <stdexcept>

#include "gsq/limits.hpp"
#include "parallel.hpp"

namespace gsq {

namespace {

void require_same_grid(const SampledFunction& f, const SampledFunction& g, const char* what) {
  if (!f.grid().matches(g.grid())) throw std::invalid_argument(std::string(what) + ": grid mismatch");
}

// Flat index of the window sample phi(y_k - x_m) under circular shifts.
class WindowIndex {
 public:
  explicit WindowIndex(const Grid& g) : shape_(g.shape()) {}

  std::size_t operator()(std::span<const std::size_t> k, std::span<const std::size_t> m) const {
    std::size_t flat = 0;
    for (std::size_t a = 0; a < shape_.size(); ++a) {
      const std::size_t n = shape_[a];
      flat = flat * n + (k[a] + n + n / 2 - m[a]) % n;
    }
    return flat;
  }

 private:
  std::vector<std::size_t> shape_;
};

double norm_squared(const SampledFunction& f) {
  const double v = l2_norm(f);
  return v * v;
}

}  // namespace

SampledFunction STFTField::as_function() const {
  return SampledFunction(grid(), values, window_label.empty() ? "stft" : "stft[" + window_label + "]");
}

std::vector<std::string> STFTField::slot_names() const {
  if (pos_grid.dims() == 1) return {"x", "xi"};
  if (pos_grid.dims() == 2) return {"x", "xi", "eta", "y"};
  std::vector<std::string> out;
  for (std::size_t i = 0; i < pos_grid.dims(); ++i) out.push_back("x" + std::to_string(i));
  for (std::size_t i = 0; i < freq_grid.dims(); ++i) out.push_back("xi" + std::to_string(i));
  return out;
}

nlohmann::json STFTField::sidecar() const {
  const Grid g = grid();
  nlohmann::json axes = nlohmann::json::array();
  const auto names = slot_names();
  for (std::size_t i = 0; i < g.dims(); ++i)
    axes.push_back({{"slot", names[i]}, {"n", g.axis(i).n}, {"L", g.axis(i).half_width}});
  return {{"kind", "stft"}, {"window", window_label}, {"slot_order", names}, {"axes", axes}};
}

STFTField stft(const SampledFunction& f, const SampledFunction& window) {
  require_same_grid(f, window, "stft");
  if (l2_norm(window) == 0.0) throw std::invalid_argument("stft: zero window");
  const Grid& g = f.grid();
  const std::size_t N = g.size();
  require_complex_capacity(N * N, "stft field");

  STFTField out;
  out.pos_grid = g;
  out.freq_grid = g.dual();
  out.window_label = window.label();
  out.values.assign(N * N, 0.0);

  const WindowIndex widx(g);
  detail::parallel_for(N, [&](std::size_t m) {
    std::vector<std::size_t> mi(g.dims()), ki(g.dims());
    g.unravel(m, mi);
    cplx* row = out.values.data() + m * N;
    for (std::size_t k = 0; k < N; ++k) {
      g.unravel(k, ki);
      row[k] = f[k] * std::conj(window[widx(ki, mi)]);
    }
  });

  const Grid full = out.grid();
  const auto shape = full.shape();
  for (std::size_t a = 0; a < g.dims(); ++a)
    fourier_axis_inplace(out.values, shape, g.dims() + a, g.axis(a), -1);
  return out;
}

SampledFunction istft(const STFTField& field, const SampledFunction& window) {
  const Grid& g = field.pos_grid;
  if (!g.matches(window.grid())) throw std::invalid_argument("istft: window grid mismatch");
  if (!field.freq_grid.matches(g.dual())) throw std::invalid_argument("istft: frequency grid is not the dual");
  const std::size_t N = g.size();
  if (field.values.size() != N * N) throw std::invalid_argument("istft: field size mismatch");
  const double nrm2 = norm_squared(window);
  if (nrm2 == 0.0) throw std::invalid_argument("istft: zero window");

  std::vector<cplx> work = field.values;
  const Grid full = field.grid();
  const auto shape = full.shape();
  for (std::size_t a = 0; a < g.dims(); ++a)
    fourier_axis_inplace(work, shape, g.dims() + a, field.freq_grid.axis(a), +1);

  // Sum over shifts in a fixed order per output node.
  const WindowIndex widx(g);
  const double dv = g.cell_volume();
  std::vector<cplx> values(N, 0.0);
  detail::parallel_for(N, [&](std::size_t k) {
    std::vector<std::size_t> mi(g.dims()), ki(g.dims());
    g.unravel(k, ki);
    cplx acc = 0.0;
    for (std::size_t m = 0; m < N; ++m) {
      g.unravel(m, mi);
      acc += work[m * N + k] * window[widx(ki, mi)];
    }
    values[k] = acc * dv / nrm2;
  });
  return SampledFunction(g, std::move(values), "istft");
}

MoyalSides moyal_check(const SampledFunction& f, const SampledFunction& g, const SampledFunction& phi,
                       const SampledFunction& psi) {
  require_same_grid(f, g, "moyal_check");
  require_same_grid(f, phi, "moyal_check");
  require_same_grid(f, psi, "moyal_check");
  const STFTField vf = stft(f, phi);
  const STFTField vg = stft(g, psi);
  cplx lhs = 0.0;
  for (std::size_t i = 0; i < vf.values.size(); ++i) lhs += vf.values[i] * std::conj(vg.values[i]);
  lhs *= vf.pos_grid.cell_volume() * vf.freq_grid.cell_volume();
  return {lhs, inner(f, g) * std::conj(inner(phi, psi))};
}

STFTField stft4(const SampledFunction& a, const SampledFunction& window) {
  if (a.grid().dims() != 2) throw std::invalid_argument("stft4 needs a symbol on a 2d grid (d = 1)");
  require_same_grid(a, window, "stft4");
  require_complex_capacity(a.size() * a.size(), "stft4 field");
  return stft(a, window);
}

double balanced_half_width(std::size_t n) { return std::sqrt(kPi * static_cast<double>(n) / 2.0); }

}  // namespace gsq
