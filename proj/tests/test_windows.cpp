#include <gtest/gtest.h>

#include <cmath>
#include <functional>

#include "gsq/stft.hpp"
#include "gsq/windows.hpp"

using namespace gsq;

namespace {

double gauss_peak() { return std::pow(kPi, -0.25); }

}  // namespace

TEST(Hermite, ClosedFormsLowOrders) {
  const Grid g = make_grid(1, 64, 8.0);
  const auto h0 = [](double x) { return std::pow(kPi, -0.25) * std::exp(-0.5 * x * x); };
  const std::function<double(double)> forms[] = {
      [&](double x) { return h0(x); },
      [&](double x) { return std::sqrt(2.0) * x * h0(x); },
      [&](double x) { return (2.0 * x * x - 1.0) / std::sqrt(2.0) * h0(x); },
      [&](double x) { return (2.0 * x * x * x - 3.0 * x) / std::sqrt(3.0) * h0(x); },
  };
  for (int k = 0; k < 4; ++k) {
    const auto h = hermite(k, g);
    const auto e = sample(g, [&](std::span<const double> x) { return forms[k](x[0]); });
    EXPECT_LT(max_abs_diff_interior(h, e, 1.0), 1e-14) << "k = " << k;
  }
}

TEST(Hermite, Orthonormal) {
  const Grid g = make_grid(1, 256, 16.0);
  for (int j = 0; j <= 20; ++j)
    for (int k = 0; k <= 20; ++k) {
      const cplx ip = inner(hermite(j, g), hermite(k, g));
      EXPECT_NEAR(std::abs(ip - cplx(j == k ? 1.0 : 0.0)), 0.0, 1e-12) << j << "," << k;
    }
}

TEST(Hermite, FourierEigenfunctions) {
  const Grid g = make_grid(1, 128, balanced_half_width(128));
  for (int k = 0; k <= 8; ++k) {
    const auto h = hermite(k, g);
    auto expect = hermite(k, g.dual());
    expect *= std::pow(cplx(0.0, -1.0), k);
    EXPECT_LT(max_abs_diff_interior(fourier(h, -1), expect, 1.0), 1e-12) << "k = " << k;
  }
}

TEST(Hermite, IndexRange) {
  const Grid g = make_grid(1, 16, 4.0);
  EXPECT_THROW(hermite(-1, g), std::invalid_argument);
  EXPECT_THROW(hermite(kMaxHermiteIndex + 1, g), std::invalid_argument);
  EXPECT_THROW(hermite(0, make_grid(2, 8, 3.0)), std::invalid_argument);
}

TEST(Hermite, ProductIsTensor) {
  const Grid g = make_grid(2, 16, 5.0);
  const auto p = hermite_product(1, 2, g);
  const auto a = hermite(1, make_grid(1, 16, 5.0));
  const auto b = hermite(2, make_grid(1, 16, 5.0));
  for (std::size_t i = 0; i < 16; ++i)
    for (std::size_t j = 0; j < 16; ++j) EXPECT_NEAR(std::abs(p[i * 16 + j] - a[i] * b[j]), 0.0, 1e-15);
}

TEST(MultiIndices, CountAndOrder) {
  const auto m = multi_indices(2, 2);
  ASSERT_EQ(m.size(), 6u);
  EXPECT_EQ(m[0], (MultiIndex{0, 0}));
  EXPECT_EQ(m[1], (MultiIndex{1, 0}));
  EXPECT_EQ(m[2], (MultiIndex{0, 1}));
  EXPECT_EQ(m[3], (MultiIndex{2, 0}));
  EXPECT_EQ(m[4], (MultiIndex{1, 1}));
  EXPECT_EQ(m[5], (MultiIndex{0, 2}));
  EXPECT_EQ(multi_indices(3, 4).size(), 35u);  // C(7, 3)
  EXPECT_TRUE(multi_indices(2, -1).empty());
}

TEST(GevreyParams, Validation) {
  GevreyParams p;
  p.s = 0.4;
  p.sigma = 0.4;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p.s = 0.5;
  p.sigma = 0.5;
  EXPECT_NO_THROW(p.validate());
  EXPECT_TRUE(p.gaussian_borderline());
  p.h = 0.0;
  EXPECT_THROW(p.validate(), std::invalid_argument);
}

TEST(Seminorm, GaussianLowEntries) {
  const Grid g = make_grid(1, 128, 12.0);
  GevreyParams p;
  p.h = 0.5;
  const auto rep = gs_seminorm(gaussian_window(g), p, 3);
  // alpha = beta = 0: sup |phi|
  EXPECT_NEAR(rep.max_at_orders(0, 0), gauss_peak(), 1e-12);
  // alpha = 1, beta = 0: max over interior nodes of |x phi| / h, and the
  // same for beta = 1 since phi' = -x phi.
  double node_sup = 0.0;
  for (double x : g.axis(0).nodes())
    if (std::abs(x) <= 0.9 * 12.0) node_sup = std::max(node_sup, std::abs(x) * std::exp(-0.5 * x * x) * gauss_peak());
  EXPECT_NEAR(rep.max_at_orders(1, 0), node_sup / 0.5, 1e-12);
  EXPECT_NEAR(rep.max_at_orders(0, 1), node_sup / 0.5, 1e-11);
  // and it approaches the continuous sup e^{-1/2} pi^{-1/4} / h from below
  EXPECT_LE(rep.max_at_orders(1, 0), std::exp(-0.5) * gauss_peak() / 0.5);
  EXPECT_EQ(rep.entries.size(), 16u);
  EXPECT_GE(rep.overall, rep.max_at_orders(0, 0));
}

TEST(Seminorm, ZeroFunctionIsZero) {
  const Grid g = make_grid(1, 32, 6.0);
  const auto rep = gs_seminorm(SampledFunction(g), GevreyParams{}, 4);
  EXPECT_EQ(rep.overall, 0.0);
}

TEST(Seminorm, HigherConstantNeverIncreases) {
  const Grid g = make_grid(1, 64, 8.0);
  GevreyParams a, b;
  a.h = 0.5;
  b.h = 1.0;
  EXPECT_LE(gs_seminorm(hermite(3, g), b, 5).overall, gs_seminorm(hermite(3, g), a, 5).overall);
}

TEST(HrNorm, CutoffZeroIsWeightedSup) {
  const Grid ps = phase_space_grid(make_grid(1, 32, 6.0));
  const auto a = sample(ps, [](std::span<const double> x) { return std::exp(-0.5 * (x[0] * x[0] + x[1] * x[1])); });
  EXPECT_NEAR(hr_norm(a, HrParams::two_block(1.0, 0.0, 1.0, 1.0, 1.0, 1.0), 0), 1.0, 1e-13);
  // With weight e^{0.3(|x| + |xi|)} the sup of e^{-|u|^2/2 - 0.3|u|_1} is still at the origin.
  EXPECT_NEAR(hr_norm(a, HrParams::two_block(1.0, 0.3, 1.0, 1.0, 1.0, 1.0), 0), 1.0, 1e-13);
}

TEST(BoundedFamily, GaussianUniformAtCutoffSix) {
  const Grid g = make_grid(1, 128, 12.0);
  const auto rep = bounded_family_check(gaussian_window(g), 0.5, 0.5, 1.0, 6, 6);
  EXPECT_DOUBLE_EQ(rep.h2, std::pow(2.0, 1.5));
  EXPECT_DOUBLE_EQ(rep.h3, std::pow(2.0, 3.0));
  EXPECT_EQ(rep.omega2.size(), 7u);
  EXPECT_EQ(rep.omega3.size(), 7u);
  EXPECT_TRUE(rep.uniform);
  for (double v : rep.omega2) EXPECT_LE(v, rep.omega2_bound * (1.0 + 1e-6));
}

TEST(BoundedFamily, OrderCap) {
  const Grid g = make_grid(1, 32, 6.0);
  EXPECT_THROW(bounded_family_check(gaussian_window(g), 0.5, 0.5, 1.0, 10, 10), std::invalid_argument);
}

TEST(Gaussian, NormAndPeak) {
  const Grid g = make_grid(1, 256, 12.0);
  const auto phi = gaussian_window(g);
  EXPECT_NEAR(l2_norm(phi), 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(phi[g.axis(0).origin()].real(), gauss_peak());
  EXPECT_LT(max_abs_diff_interior(hermite(0, g), phi, 1.0), 1e-15);
}

TEST(Seminorm, ScalesWithConstantAndWithH) {
  const Grid g = make_grid(1, 64, 8.0);
  GevreyParams p;
  p.h = 0.5;
  const auto f = hermite(2, g);
  const auto base = gs_seminorm(f, p, 4);
  const auto scaled = gs_seminorm(cplx(0.0, -3.0) * f, p, 4);
  GevreyParams p2 = p;
  p2.h = 1.0;
  const auto doubled = gs_seminorm(f, p2, 4);
  ASSERT_EQ(base.entries.size(), scaled.entries.size());
  for (std::size_t i = 0; i < base.entries.size(); ++i) {
    const auto& e = base.entries[i];
    EXPECT_NEAR(scaled.entries[i].value, 3.0 * e.value, 1e-12 * (1.0 + e.value));
    const int k = order(e.alpha) + order(e.beta);
    EXPECT_NEAR(doubled.entries[i].value, std::ldexp(e.value, -k), 1e-12 * (1.0 + e.value));
  }
}

TEST(Seminorm, HermiteBoundedThroughCutoffEight) {
  // Finite-order proxy for membership: at h = 2 the table's overall value
  // does not grow from cutoff 4 to cutoff 8.
  const Grid g = make_grid(1, 128, 14.0);
  GevreyParams p;
  p.h = 2.0;
  for (int k : {0, 3}) {
    const double c4 = gs_seminorm(hermite(k, g), p, 4).overall;
    const double c8 = gs_seminorm(hermite(k, g), p, 8).overall;
    EXPECT_TRUE(std::isfinite(c8));
    EXPECT_LE(c8, c4 * (1.0 + 1e-9)) << "k = " << k;
  }
}

TEST(HrNorm, FiniteMonotoneAndZero) {
  const Grid ps = phase_space_grid(make_grid(1, 32, balanced_half_width(32)));
  const auto a = sample(ps, [](std::span<const double> x) { return std::exp(-(x[0] * x[0] + x[1] * x[1])); });
  const double base = hr_norm(a, HrParams::two_block(1.0, 1.0, 1.0, 1.0, 1.0, 1.0), 4);
  EXPECT_TRUE(std::isfinite(base));
  EXPECT_GT(base, 0.0);
  EXPECT_LE(hr_norm(a, HrParams::two_block(1.0, 2.0, 1.0, 1.0, 1.0, 1.0), 4), base);
  EXPECT_LE(hr_norm(a, HrParams::two_block(2.0, 1.0, 1.0, 1.0, 1.0, 1.0), 4), base);
  EXPECT_EQ(hr_norm(SampledFunction(ps), HrParams::two_block(1.0, 1.0, 1.0, 1.0, 1.0, 1.0), 4), 0.0);
}
