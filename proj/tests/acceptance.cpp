// Acceptance gate: one line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "gsq/calculus.hpp"
#include "gsq/envelope.hpp"
#include "gsq/quantize.hpp"
#include "gsq/stft.hpp"
#include "gsq/windows.hpp"

using namespace gsq;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

using Clock = std::chrono::steady_clock;
double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

Grid ps_grid(std::size_t n) { return phase_space_grid(make_grid(1, n, balanced_half_width(n))); }

SampledFunction gauss_at(const Grid& ps, double x0, double xi_scale = 1.0) {
  return sample(ps, [=](std::span<const double> u) {
    return std::exp(-0.5 * ((u[0] - x0) * (u[0] - x0) + xi_scale * u[1] * u[1]));
  });
}

double erf_box(double u, double P, double w) { return 0.5 * (std::erf((u + P) / w) - std::erf((u - P) / w)); }

// ---- pinned tolerances ----
constexpr double kTolInversion = 1e-9, kTimeInversion = 5.0;
constexpr double kTolGaussStft = 1e-10;
constexpr double kTolMoyal = 1e-10;
constexpr double kTolMEps = 0.1, kTolMSpread = 2.0, kTolMExcess = 0.01;
constexpr double kTolIdentity = 1e-10, kTolMultiplication = 1e-9;
constexpr double kTolRoundTrip = 1e-9;
constexpr double kTolTransfer = 1e-8;
constexpr double kTolCovariance = 1e-7;
constexpr double kTolStftKernel = 1e-7;
constexpr double kTolHom = 1e-7, kTolTaper = 1e-6, kTimeHom = 60.0;
constexpr double kTolRoutes = 1e-7;
constexpr double kTolPlanted = 1e-6, kTolGrowthRel = 0.10;

Outcome c01_inversion() {
  const auto t0 = Clock::now();
  const Grid g = make_grid(1, 256, 12.0);
  const auto w = gaussian_window(g);
  double worst = 0.0;
  for (int k = 0; k <= 10; ++k) {
    const auto f = hermite(k, g);
    worst = std::max(worst, l2_norm(istft(stft(f, w), w) - f) / l2_norm(f));
  }
  const double secs = seconds_since(t0);
  return {worst <= kTolInversion && secs < kTimeInversion,
          fmt("Hermite 0..10, n=256 L=12: rel L2 %.2e <= %.0e; %.2f s < %.0f s", worst, kTolInversion, secs, kTimeInversion)};
}

Outcome c02_gaussian_stft() {
  const std::size_t n = 64;
  const Grid g = make_grid(1, n, balanced_half_width(n));
  const auto phi = gaussian_window(g);
  const auto F = stft(phi, phi).as_function();
  const auto closed = [](double x, double xi) { return std::exp(-0.25 * (x * x + xi * xi)) / std::sqrt(2.0 * kPi); };
  double dev = 0.0;
  std::vector<double> u(2);
  for (std::size_t i = 0; i < F.size(); ++i) {
    if (!in_interior(F.grid(), i)) continue;
    F.grid().coords(i, u);
    dev = std::max(dev, std::abs(std::abs(F[i]) - closed(u[0], u[1])));
  }
  // Oracle: direct quadrature with the window evaluated analytically.
  double quad = 0.0;
  const Axis& a = g.axis(0);
  for (int i = -2; i <= 2; ++i)
    for (int j = -2; j <= 2; ++j) {
      const std::size_t flat = (n / 2 + i * 5) * n + (n / 2 + j * 5);
      F.grid().coords(flat, u);
      cplx acc = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        const double y = a.node(k);
        acc += phi[k] * std::pow(kPi, -0.25) * std::exp(-0.5 * (y - u[0]) * (y - u[0])) * std::exp(cplx(0.0, -y * u[1]));
      }
      acc *= a.spacing() / std::sqrt(2.0 * kPi);
      quad = std::max(quad, std::abs(acc - F[flat]));
    }
  return {dev <= kTolGaussStft && quad <= kTolGaussStft,
          fmt("n=64: |V| vs closed form %.2e, vs direct quadrature (25 pts) %.2e, both <= %.0e", dev, quad, kTolGaussStft)};
}

Outcome c03_moyal() {
  const Grid g = make_grid(1, 64, balanced_half_width(64));
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> nd;
  auto draw = [&] {
    SampledFunction f(g);
    for (int k = 0; k <= 10; ++k) f += cplx(nd(rng), nd(rng)) * hermite(k, g);
    return (1.0 / l2_norm(f)) * f;
  };
  const auto phi = gaussian_window(g);
  const auto psi = draw();
  double worst = 0.0;
  for (int p = 0; p < 20; ++p) {
    const auto f = draw(), h = draw();
    const auto m = moyal_check(f, h, phi, psi);
    worst = std::max(worst, std::abs(m.lhs - m.rhs));
  }
  return {worst <= kTolMoyal, fmt("20 random unit Hermite-span pairs, n=64: %.2e <= %.0e", worst, kTolMoyal)};
}

Outcome c04_kappa() {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> mag(-3.0, 3.0), sgn(-1.0, 1.0), sd(0.3, 4.0);
  long violations = 0;
  for (int i = 0; i < 1000000; ++i) {
    const double x = std::copysign(std::pow(10.0, mag(rng)), sgn(rng));
    const double y = std::copysign(std::pow(10.0, mag(rng)), sgn(rng));
    if (!power_triangle_check(x, y, sd(rng))) ++violations;
  }
  return {violations == 0, fmt("10^6 samples, s in [0.3, 4]: %ld violations", violations)};
}

Outcome c05_m_bounds() {
  bool ok = true;
  double worst_excess = 0.0, worst_spread = 0.0;
  for (double s : {0.5, 1.0, 2.0})
    for (double tau : {0.25, 1.0, 4.0}) {
      const auto b = m_bounds_check(s, tau, kTolMEps, 20.0);
      const auto q = m_quotient_bound_check(s, tau, 10);
      worst_excess = std::max(worst_excess, b.worst_excess);
      worst_spread = std::max(worst_spread, q.spread);
      ok = ok && b.holds && b.worst_excess <= kTolMExcess && q.interior_maxima && q.spread <= kTolMSpread;
    }
  return {ok, fmt("9 (s, tau) pairs, eps=%.1f on [0, 20]: worst excess %.1e <= %.2f; alpha<=10 spread %.3f <= %.0f",
                  kTolMEps, worst_excess, kTolMExcess, worst_spread, kTolMSpread)};
}

Outcome c06_quantization_identity() {
  const Grid b = make_grid(1, 64, balanced_half_width(64));
  const Grid ps = phase_space_grid(b);
  const auto one = sample(ps, [](auto) { return 1.0; });
  double id = 0.0;
  for (double t : {0.0, 0.5, 1.0})
    for (int k = 0; k <= 6; ++k) {
      const auto f = hermite(k, b);
      id = std::max(id, max_abs_diff_interior(apply_op(one, QuantMatrix::scalar(t), f), f, 1.0));
    }
  const auto f = gaussian_window(b);
  const auto xf = sample(b, [](std::span<const double> u) { return u[0] * std::pow(kPi, -0.25) * std::exp(-0.5 * u[0] * u[0]); });
  const auto x = sample(ps, [](std::span<const double> u) { return u[0]; });
  const auto xi = sample(ps, [](std::span<const double> u) { return u[1]; });
  const auto A0 = QuantMatrix::scalar(0.0);
  const double mx = max_abs_diff_interior(apply_op(x, A0, f), xf, 1.0);
  const double md = max_abs_diff_interior(apply_op(xi, A0, f), cplx(0.0, 1.0) * xf, 1.0);
  return {id <= kTolIdentity && mx <= kTolMultiplication && md <= kTolMultiplication,
          fmt("Op_t(1)=Id %.2e <= %.0e; Op_0(x) %.2e, Op_0(xi)=-i d %.2e <= %.0e", id, kTolIdentity, mx, md,
              kTolMultiplication)};
}

Outcome c07_round_trip() {
  const Grid ps = ps_grid(64);
  const auto a = gauss_at(ps, 0.5, 0.5);
  double worst = 0.0;
  for (double t : {0.0, 0.5, 1.0}) {
    const auto back = symbol_from_kernel(kernel_from_symbol(a, QuantMatrix::scalar(t)));
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(back[i] - a[i]));
  }
  return {worst <= kTolRoundTrip, fmt("t in {0, 1/2, 1}, n=64: %.2e <= %.0e", worst, kTolRoundTrip)};
}

Outcome c08_transfer() {
  const Grid b = make_grid(1, 128, balanced_half_width(128));
  const auto a = gauss_at(phase_space_grid(b), 0.0);
  double worst = 0.0;
  const std::pair<double, double> pairs[] = {{0.0, 0.5}, {0.0, 1.0}, {0.5, 1.0}};
  for (auto [ta, tb] : pairs) {
    const auto A = QuantMatrix::scalar(ta), B = QuantMatrix::scalar(tb);
    const auto bsym = quant_transfer(a, A - B);
    for (int k = 0; k <= 6; ++k) {
      const auto f = hermite(k, b);
      worst = std::max(worst, max_abs_diff_interior(apply_op(a, A, f), apply_op(bsym, B, f), 1.0));
    }
  }
  return {worst <= kTolTransfer, fmt("pairs (0,1/2) (0,1) (1/2,1), Hermite 0..6, n=128: %.2e <= %.0e", worst, kTolTransfer)};
}

Outcome c09_covariance() {
  const Grid ps = ps_grid(32);
  const auto a = gauss_at(ps, 0.5, 0.5);
  const auto phi = gaussian_window(ps);
  double worst = 0.0;
  for (double t : {0.0, 0.5, 1.0}) worst = std::max(worst, stft_covariance_check(a, phi, QuantMatrix::scalar(t)).max_dev);
  return {worst <= kTolCovariance, fmt("t in {0, 1/2, 1}, n=32 4d: %.2e <= %.0e", worst, kTolCovariance)};
}

Outcome c10_stft_kernel() {
  const Grid ps = ps_grid(32);
  const auto a = gauss_at(ps, 0.5, 0.5);
  const auto phi = gaussian_window(ps);
  double worst = 0.0;
  std::size_t points = 0;
  for (double t : {0.0, 0.5}) {
    const auto r = stft_kernel_relation_check(a, phi, QuantMatrix::scalar(t), 4);
    worst = std::max(worst, r.max_dev);
    points += r.points;
  }
  return {worst <= kTolStftKernel && points > 0,
          fmt("t in {0, 1/2}, n=32 stride 4 (%zu points): %.2e <= %.0e", points, worst, kTolStftKernel)};
}

double hom_dev(std::size_t n, SharpRoute route) {
  const Grid ps = ps_grid(n);
  const Grid base({ps.axis(0)});
  const auto a1 = gauss_at(ps, 0.0), a2 = gauss_at(ps, 0.5, 0.5);
  double worst = 0.0;
  for (double t : {0.0, 0.5, 1.0}) {
    const auto A = QuantMatrix::scalar(t);
    const auto c = sharpA(a1, a2, A, route);
    for (int k = 0; k <= 6; ++k) {
      const auto f = hermite(k, base);
      worst = std::max(worst, max_abs_diff_interior(apply_op(c, A, f), apply_op(a1, A, apply_op(a2, A, f)), 1.0));
    }
  }
  return worst;
}

Outcome c11_homomorphism() {
  auto t0 = Clock::now();
  const double d4 = hom_dev(32, SharpRoute::multiplier);
  const double s4 = seconds_since(t0);
  t0 = Clock::now();
  const double dk = hom_dev(128, SharpRoute::kernel);
  const double sk = seconds_since(t0);

  // xi #_0 x = x xi - i on the plateau of a separable erf box.
  const double P = 12.0, w = 1.0, plateau = 5.0;
  const Grid ps = phase_space_grid(make_grid(1, 512, 40.0));
  const auto xi = sample(ps, [&](std::span<const double> u) { return u[1] * erf_box(u[0], P, w) * erf_box(u[1], P, w); });
  const auto x = sample(ps, [&](std::span<const double> u) { return u[0] * erf_box(u[0], P, w) * erf_box(u[1], P, w); });
  const auto c = sharp0(xi, x, SharpRoute::kernel);
  double taper = 0.0;
  std::vector<double> u(2);
  for (std::size_t i = 0; i < c.size(); ++i) {
    ps.coords(i, u);
    if (std::abs(u[0]) <= plateau && std::abs(u[1]) <= plateau) taper = std::max(taper, std::abs(c[i] - cplx(u[0] * u[1], -1.0)));
  }
  const bool ok = d4 <= kTolHom && dk <= kTolHom && taper <= kTolTaper && s4 < kTimeHom && sk < kTimeHom;
  return {ok, fmt("multiplier n=32 %.2e (%.2f s), kernel n=128 %.2e (%.2f s) <= %.0e, < %.0f s; xi#x taper %.2e <= %.0e",
                  d4, s4, dk, sk, kTolHom, kTimeHom, taper, kTolTaper)};
}

Outcome c12_routes() {
  const Grid ps = ps_grid(32);
  const auto a1 = gauss_at(ps, 0.0), a2 = gauss_at(ps, 0.5, 0.5);
  const double d = max_abs_diff_interior(sharp0(a1, a2, SharpRoute::kernel), sharp0(a1, a2, SharpRoute::multiplier), 0.9);
  return {d <= kTolRoutes, fmt("sharp0 kernel vs multiplier, n=32: %.2e <= %.0e", d, kTolRoutes)};
}

Outcome c13_envelope() {
  double planted = 0.0;
  {
    const Grid g = make_grid(2, 32, 8.0);
    const auto F = sample(g, [](std::span<const double> u) {
      return std::exp(cplx(0.7 - 0.4 * std::sqrt(std::abs(u[0])) - 0.9 * std::abs(u[1]), 0.3 * u[0]));
    });
    const auto fit = fit_envelope(F, EnvelopeModel::decay_decay({2.0, 1.0}));
    planted = std::max({planted, std::abs(fit.rates[0] - 0.4), std::abs(fit.rates[1] - 0.9)});
  }
  {
    const Grid g = product(make_grid(2, 12, 6.0), make_grid(2, 12, 6.0));
    const auto F = sample(g, [](std::span<const double> u) {
      return std::exp(0.2 * std::sqrt(std::abs(u[0])) + 0.35 * std::sqrt(std::abs(u[1])) - 0.5 * std::abs(u[2]) -
                      0.8 * std::abs(u[3]));
    });
    const auto fit = fit_envelope(F, EnvelopeModel::growth_decay({2.0, 2.0, 1.0, 1.0}));
    const double truth[] = {0.2, 0.35, 0.5, 0.8};
    for (int i = 0; i < 4; ++i) planted = std::max(planted, std::abs(fit.rates[i] - truth[i]));
  }
  const Grid ps = ps_grid(32);
  const auto a = sample(ps, [](std::span<const double> u) {
    return std::exp(0.5 * (std::sqrt(std::abs(u[0])) + std::sqrt(std::abs(u[1]))));
  });
  const double r_hat = classify_symbol(a, gaussian_window(ps), 2.0, 2.0).r_hat;
  const double rel = std::abs(r_hat - 0.5) / 0.5;
  return {planted <= kTolPlanted && rel <= kTolGrowthRel,
          fmt("planted rates %.2e <= %.0e; growth symbol r_hat %.4f vs 0.5 (%.1f%% <= %.0f%%)", planted, kTolPlanted,
              r_hat, 100.0 * rel, 100.0 * kTolGrowthRel)};
}

Outcome c14_bounded_family() {
  const Grid g = make_grid(1, 128, balanced_half_width(128));
  const auto phi = gaussian_window(g);
  bool ok = true;
  std::string parts;
  for (double h1 : {0.25, 0.5, 1.0}) {
    const auto r = bounded_family_check(phi, 0.5, 0.5, h1, 6, 6);
    ok = ok && r.uniform;
    parts += fmt(" h1=%.2f:%s", h1, r.uniform ? "uniform" : "NOT uniform");
  }
  return {ok, "Gaussian, s=sigma=1/2, cutoff 6, h2=2^{1+s}h1, h3=2^{2+2s}h1:" + parts};
}

Outcome c15_appendix() {
  const Grid ps64 = ps_grid(64);
  const auto a = gauss_at(ps64, 0.0);
  GevreyParams p;
  p.h = 1.0;
  std::vector<double> d;
  for (double eps : {0.5, 0.25, 0.125}) d.push_back(hr_norm(mollify(a, a, eps).value - a, HrParams::symbol(p), 4));
  const bool decreasing = d[1] < d[0] && d[2] < d[1];

  const auto t0 = Clock::now();
  const Grid ps32 = ps_grid(32);
  GevreyParams pt;
  pt.h = 1.0;
  pt.r = 0.1;
  const auto tr = trace_leibniz_check(FourDField::tensor(gauss_at(ps32, 0.0), gauss_at(ps32, 0.5)), pt, 4);
  const double secs = seconds_since(t0);
  return {decreasing && tr.holds,
          fmt("mollifier distance %.3g > %.3g > %.3g; trace %.4g <= %.4g at cutoff 4 (%.1f s)", d[0], d[1], d[2],
              tr.trace_norm, tr.field_norm, secs)};
}

Outcome c16_mixed_norm() {
  const Grid ps = ps_grid(32);
  const auto V = stft4(gauss_at(ps, 0.0), gaussian_window(ps));
  const auto omega = Weight::exponential(0.0, 1.0, 1.0);
  bool finite = true, decreasing = true;
  std::string parts;
  for (double q : {1.0, 2.0, kInf}) {
    parts += std::isinf(q) ? " q=inf:" : fmt(" q=%g:", q);
    double prev = kInf;
    for (double R : {0.0, 0.1, 0.2, 0.4}) {
      const double v = mixed_norm(V, omega, R, q, 1.0, 1.0);
      finite = finite && std::isfinite(v);
      decreasing = decreasing && v < prev;
      prev = v;
      parts += fmt(" %.4g", v);
    }
  }
  return {finite && decreasing,
          fmt("finite=%s, monotone decreasing in R in {0, .1, .2, .4}=%s;", finite ? "yes" : "no", decreasing ? "yes" : "no") +
              parts};
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"C01 STFT inversion", c01_inversion},
      {"C02 Gaussian STFT closed form", c02_gaussian_stft},
      {"C03 Moyal identity", c03_moyal},
      {"C04 kappa / power triangle", c04_kappa},
      {"C05 m_{s,tau} bounds", c05_m_bounds},
      {"C06 quantization identity", c06_quantization_identity},
      {"C07 symbol/kernel round trip", c07_round_trip},
      {"C08 transfer law", c08_transfer},
      {"C09 STFT covariance", c09_covariance},
      {"C10 STFT-kernel relation", c10_stft_kernel},
      {"C11 twisted-product homomorphism", c11_homomorphism},
      {"C12 route agreement", c12_routes},
      {"C13 envelope identifiability", c13_envelope},
      {"C14 bounded family", c14_bounded_family},
      {"C15 mollifier and trace bound", c15_appendix},
      {"C16 mixed norm in R", c16_mixed_norm},
  };
  int failures = 0;
  for (const auto& [name, fn] : criteria) {
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("[%s] %s: %s [%.2f s]\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
  }
  std::printf("%d/16 criteria passed\n", 16 - failures);
  return failures == 0 ? 0 : 1;
}
