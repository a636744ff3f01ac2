#include <gtest/gtest.h>

#include <cmath>

#include "gsq/calculus.hpp"
#include "gsq/quantize.hpp"
#include "gsq/stft.hpp"
#include "gsq/windows.hpp"

using namespace gsq;

namespace {

cplx gauss_symbol(double x, double xi) { return std::exp(-0.5 * (x * x + xi * xi)); }

SampledFunction gauss_on(const Grid& ps) {
  return sample(ps, [](std::span<const double> u) { return gauss_symbol(u[0], u[1]); });
}

}  // namespace

TEST(QuantMatrix, Parse) {
  const auto a = parse_matrix("t=0.5");
  EXPECT_EQ(a.d, 1u);
  EXPECT_DOUBLE_EQ(a.t(), 0.5);
  const auto b = parse_matrix("1,0.5,0,1");
  EXPECT_EQ(b.d, 2u);
  EXPECT_DOUBLE_EQ(b(0, 1), 0.5);
  EXPECT_DOUBLE_EQ(b.row_norm(), 1.5);
  EXPECT_DOUBLE_EQ(b.transpose()(1, 0), 0.5);
  EXPECT_THROW(b.t(), std::logic_error);
  EXPECT_THROW(parse_matrix("1,2,3"), std::invalid_argument);
  EXPECT_THROW(parse_matrix("t=abc"), std::invalid_argument);
  EXPECT_TRUE(parse_matrix("t=0").is_zero());
}

TEST(Quantize, IdentitySymbolIsIdentity) {
  const Grid b = make_grid(1, 64, balanced_half_width(64));
  const auto one = sample(phase_space_grid(b), [](auto) { return 1.0; });
  for (double t : {0.0, 0.5, 1.0})
    for (int k = 0; k <= 6; ++k) {
      const auto f = hermite(k, b);
      EXPECT_LT(max_abs_diff_interior(apply_op(one, QuantMatrix::scalar(t), f), f, 1.0), 1e-10) << t << " " << k;
    }
}

TEST(Quantize, PositionAndMomentum) {
  const Grid b = make_grid(1, 64, balanced_half_width(64));
  const Grid ps = phase_space_grid(b);
  const auto f = gaussian_window(b);
  const auto x = sample(ps, [](std::span<const double> u) { return u[0]; });
  const auto xi = sample(ps, [](std::span<const double> u) { return u[1]; });
  const auto xf = sample(b, [](std::span<const double> u) { return u[0] * std::pow(kPi, -0.25) * std::exp(-0.5 * u[0] * u[0]); });
  // D f = -i f' = i x f for the Gaussian.
  const auto Df = cplx(0.0, 1.0) * xf;
  const auto A = QuantMatrix::scalar(0.0);
  EXPECT_LT(max_abs_diff_interior(apply_op(x, A, f, ApplyRoute::direct), xf, 1.0), 1e-9);
  EXPECT_LT(max_abs_diff_interior(apply_op(xi, A, f, ApplyRoute::direct), Df, 1.0), 1e-9);
}

TEST(Quantize, KernelOfGaussianSymbol) {
  // K(x, y) = (2 pi)^{-1/2} e^{-(x - t(x - y))^2 / 2} e^{-(x - y)^2 / 2}.
  const Grid ps = phase_space_grid(make_grid(1, 64, balanced_half_width(64)));
  const auto a = gauss_on(ps);
  for (double t : {0.0, 0.5, 1.0}) {
    const auto K = kernel_from_symbol(a, QuantMatrix::scalar(t));
    const auto expect = sample(K.K.grid(), [t](std::span<const double> u) {
      const double z = u[0] - u[1], m = u[0] - t * z;
      return std::exp(-0.5 * (m * m + z * z)) / std::sqrt(2.0 * kPi);
    });
    EXPECT_LT(max_abs_diff_interior(K.K, expect, 0.5), 1e-12) << "t = " << t;
  }
}

TEST(Quantize, SymbolKernelRoundTrip) {
  const Grid ps = phase_space_grid(make_grid(1, 64, balanced_half_width(64)));
  const auto a = sample(ps, [](std::span<const double> u) {
    return std::exp(cplx(-0.5 * ((u[0] - 0.5) * (u[0] - 0.5) + u[1] * u[1]), 0.4 * u[0]));
  });
  for (double t : {0.0, 0.5, 1.0}) {
    const auto back = symbol_from_kernel(kernel_from_symbol(a, QuantMatrix::scalar(t)));
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(back[i] - a[i]));
    EXPECT_LT(worst, 1e-9) << "t = " << t;
  }
}

TEST(Quantize, RoutesAgreeAtZero) {
  const Grid b = make_grid(1, 64, balanced_half_width(64));
  const auto a = gauss_on(phase_space_grid(b));
  const auto A = QuantMatrix::scalar(0.0);
  for (int k = 0; k <= 4; ++k) {
    const auto f = hermite(k, b);
    EXPECT_LT(max_abs_diff_interior(apply_op(a, A, f, ApplyRoute::direct), apply_op(a, A, f, ApplyRoute::kernel), 1.0),
              1e-12);
  }
  EXPECT_THROW(apply_op(a, QuantMatrix::scalar(0.5), hermite(0, b), ApplyRoute::direct), std::invalid_argument);
}

TEST(Quantize, MatchesDoubleSumReference) {
  const Grid b = make_grid(1, 48, balanced_half_width(48));
  const auto a = gauss_on(phase_space_grid(b));
  for (double t : {0.0, 0.5, 1.0}) {
    const auto f = hermite(2, b);
    const auto fast = apply_op(a, QuantMatrix::scalar(t), f);
    const auto ref = apply_op_reference(gauss_symbol, t, f);
    EXPECT_LT(max_abs_diff_interior(fast, ref, 0.8), 1e-10) << "t = " << t;
  }
}

TEST(Quantize, TransferLaw) {
  const Grid b = make_grid(1, 128, balanced_half_width(128));
  const auto a = gauss_on(phase_space_grid(b));
  const std::pair<double, double> pairs[] = {{0.0, 0.5}, {0.0, 1.0}, {0.5, 1.0}};
  for (auto [ta, tb] : pairs) {
    const auto A = QuantMatrix::scalar(ta), B = QuantMatrix::scalar(tb);
    const auto bsym = quant_transfer(a, A - B);
    for (int k = 0; k <= 6; ++k) {
      const auto f = hermite(k, b);
      EXPECT_LT(max_abs_diff_interior(apply_op(a, A, f), apply_op(bsym, B, f), 1.0), 1e-8) << ta << "->" << tb;
    }
  }
}

TEST(Quantize, RowNormGuard) {
  const Grid ps = phase_space_grid(make_grid(1, 16, 5.0));
  EXPECT_THROW(kernel_from_symbol(gauss_on(ps), QuantMatrix::scalar(1.5)), std::invalid_argument);
  EXPECT_THROW(kernel_from_symbol(gauss_on(ps), QuantMatrix::scalar(0.5, 2)), std::invalid_argument);
}

TEST(Quantize, TwoDimensionalIdentity) {
  const Grid b = make_grid(2, 16, balanced_half_width(16));
  const auto one = sample(phase_space_grid(b), [](auto) { return 1.0; });
  const auto f = hermite_product(1, 2, b);
  EXPECT_LT(max_abs_diff_interior(apply_op(one, parse_matrix("0.5,0,0,0.5"), f), f, 1.0), 1e-10);
}

TEST(Mapping, GaussianSymbolOnHermites) {
  const Grid b = make_grid(1, 64, balanced_half_width(64));
  const auto a = gauss_on(phase_space_grid(b));
  GevreyParams p;
  const auto fam = hermite_family(b, 4);
  ASSERT_EQ(fam.size(), 4u);
  const auto rep = verify_mapping(a, QuantMatrix::scalar(0.5), p, fam, 4);
  EXPECT_EQ(rep.entries.size(), 4u);
  EXPECT_TRUE(rep.all_finite);
  for (const auto& e : rep.entries) {
    EXPECT_GT(e.output_seminorm, 0.0);
    EXPECT_EQ(e.output_rates.size(), 2u);
  }
  EXPECT_TRUE(rep.to_json().contains("entries"));
}

TEST(Quantize, LinearInSymbol) {
  const Grid b = make_grid(1, 64, balanced_half_width(64));
  const Grid ps = phase_space_grid(b);
  const auto a1 = gauss_on(ps);
  const auto a2 = sample(ps, [](std::span<const double> u) { return std::exp(cplx(-0.3 * (u[0] * u[0] + u[1] * u[1]), u[0])); });
  const cplx al(0.7, -0.2), be(-1.3, 0.4);
  const auto A = QuantMatrix::scalar(0.5);
  const auto f = hermite(3, b);
  const auto lhs = apply_op(al * a1 + be * a2, A, f);
  const auto rhs = al * apply_op(a1, A, f) + be * apply_op(a2, A, f);
  EXPECT_LT(max_abs_diff_interior(lhs, rhs, 1.0), 1e-14);
}

TEST(Quantize, WeylOfRealSymbolIsHermitian) {
  const Grid b = make_grid(1, 64, balanced_half_width(64));
  const auto a = sample(phase_space_grid(b), [](std::span<const double> u) {
    return std::exp(-0.5 * ((u[0] - 0.5) * (u[0] - 0.5) + (u[1] + 0.3) * (u[1] + 0.3))) + 0.2 * std::cos(u[0]);
  });
  const auto A = QuantMatrix::scalar(0.5);
  std::vector<SampledFunction> h, Oh;
  for (int k = 0; k < 8; ++k) {
    h.push_back(hermite(k, b));
    Oh.push_back(apply_op(a, A, h.back()));
  }
  double worst = 0.0, scale = 0.0;
  for (int j = 0; j < 8; ++j)
    for (int k = 0; k < 8; ++k) {
      const cplx mjk = inner(Oh[k], h[j]), mkj = inner(Oh[j], h[k]);
      worst = std::max(worst, std::abs(mjk - std::conj(mkj)));
      scale = std::max(scale, std::abs(mjk));
    }
  EXPECT_GT(scale, 0.1);
  EXPECT_LT(worst, 1e-8);
}

TEST(Mapping, RegularizingSymbolSharpensPositionDecay) {
  // Op_0(e^{-x^2 - xi^2}) h_0 = C e^{-7 x^2 / 6}.  With a Gaussian window the
  // STFT of e^{-a x^2} decays at rates a / (1 + 2a) in x and 1 / (2 (1 + 2a))
  // in xi: 0.35 and 0.15 here against 0.25 and 0.25 for h_0.  Position decay
  // sharpens, frequency decay necessarily widens.
  const Grid b = make_grid(1, 64, balanced_half_width(64));
  const auto a = sample(phase_space_grid(b), [](std::span<const double> u) { return std::exp(-u[0] * u[0] - u[1] * u[1]); });
  const auto rep = verify_mapping(a, QuantMatrix::scalar(0.0), GevreyParams{}, hermite_family(b, 4), 4);
  for (const auto& e : rep.entries) EXPECT_GE(e.output_rates[0], e.input_rates[0]) << e.label;
  EXPECT_NEAR(rep.entries[0].output_rates[0], 0.35, 1e-4);
  EXPECT_NEAR(rep.entries[0].output_rates[1], 0.15, 1e-4);
}

TEST(Mapping, IdentitySymbolKeepsReport) {
  const Grid b = make_grid(1, 64, balanced_half_width(64));
  const auto one = sample(phase_space_grid(b), [](auto) { return 1.0; });
  const auto rep = verify_mapping(one, QuantMatrix::scalar(0.5), GevreyParams{}, hermite_family(b, 4), 4);
  for (const auto& e : rep.entries) {
    EXPECT_NEAR(e.output_seminorm, e.input_seminorm, 1e-9 * e.input_seminorm) << e.label;
    EXPECT_NEAR(e.output_rates[0], e.input_rates[0], 1e-6) << e.label;
    EXPECT_NEAR(e.output_rates[1], e.input_rates[1], 1e-6) << e.label;
  }
}

TEST(Mapping, GrowthSymbolOutputsStayFinite) {
  const Grid b = make_grid(1, 64, balanced_half_width(64));
  const auto a = sample(phase_space_grid(b), [](std::span<const double> u) {
    return std::exp(0.25 * (std::sqrt(std::abs(u[0])) + std::sqrt(std::abs(u[1]))));
  });
  GevreyParams p;
  p.s = 2.0;
  p.sigma = 2.0;
  const auto rep = verify_mapping(a, QuantMatrix::scalar(0.5), p, hermite_family(b, 4), 4);
  EXPECT_TRUE(rep.all_finite);
}

TEST(Kernel, IdentitySymbolGivesDiagonal) {
  const Grid b = make_grid(1, 32, balanced_half_width(32));
  const auto K = kernel_from_symbol(sample(phase_space_grid(b), [](auto) { return 1.0; }), QuantMatrix::scalar(0.5));
  const double dx = b.axis(0).spacing();
  double worst = 0.0;
  for (std::size_t m = 0; m < 32; ++m)
    for (std::size_t k = 0; k < 32; ++k) worst = std::max(worst, std::abs(K.K[m * 32 + k] - (m == k ? 1.0 / dx : 0.0)));
  EXPECT_LT(worst * dx, 1e-12);
}

TEST(Kernel, SqueezedGaussianClosedForm) {
  // a = e^{-x^2 - xi^2}: K(x, y) = (2 pi)^{-1/2} e^{-m^2} 2^{-1/2} e^{-(x - y)^2 / 4}, m = x - t(x - y);
  // at t = 1 the first factor depends on y only.
  const Grid ps = phase_space_grid(make_grid(1, 64, balanced_half_width(64)));
  const auto a = sample(ps, [](std::span<const double> u) { return std::exp(-u[0] * u[0] - u[1] * u[1]); });
  for (double t : {0.0, 1.0}) {
    const auto K = kernel_from_symbol(a, QuantMatrix::scalar(t));
    const auto expect = sample(K.K.grid(), [t](std::span<const double> u) {
      const double z = u[0] - u[1], m = u[0] - t * z;
      return std::exp(-m * m - 0.25 * z * z) / std::sqrt(4.0 * kPi);
    });
    EXPECT_LT(max_abs_diff_interior(K.K, expect, 0.5), 1e-9) << "t = " << t;
  }
}

TEST(Kernel, ZeroAndNormPreservingRoundTrip) {
  const Grid ps = phase_space_grid(make_grid(1, 32, balanced_half_width(32)));
  const auto z = symbol_from_kernel(kernel_from_symbol(SampledFunction(ps), QuantMatrix::scalar(0.5)));
  for (std::size_t i = 0; i < z.size(); ++i) EXPECT_EQ(z[i], cplx(0.0));
  const auto a = sample(ps, [](std::span<const double> u) { return std::exp(-u[0] * u[0] - u[1] * u[1]); });
  const auto hp = HrParams::two_block(1.0, 0.0, 1.0, 1.0, 1.0, 1.0);
  for (double t : {0.0, 0.5, 1.0}) {
    const auto back = symbol_from_kernel(kernel_from_symbol(a, QuantMatrix::scalar(t)));
    EXPECT_NEAR(hr_norm(back, hp, 3), hr_norm(a, hp, 3), 1e-6 * hr_norm(a, hp, 3));
  }
}

TEST(Kernel, RankOneIsProjection) {
  const Grid b = make_grid(1, 32, balanced_half_width(32));
  const auto phi = hermite(1, b);
  SampledFunction K(product(b, b));
  for (std::size_t i = 0; i < 32; ++i)
    for (std::size_t j = 0; j < 32; ++j) K[i * 32 + j] = phi[i] * std::conj(phi[j]);
  const OperatorKernel P{K, QuantMatrix::scalar(0.0), "projector"};
  const auto f = hermite(1, b) + cplx(0.3, 1.0) * hermite(2, b);
  EXPECT_LT(max_abs_diff_interior(apply_kernel(P, f), inner(f, phi) * phi, 1.0), 1e-14);
  const auto g = hermite(0, b);
  EXPECT_LT(max_abs_diff_interior(apply_kernel(P, cplx(2.0, -1.0) * f + g),
                                  cplx(2.0, -1.0) * apply_kernel(P, f) + apply_kernel(P, g), 1.0),
            1e-14);
}
