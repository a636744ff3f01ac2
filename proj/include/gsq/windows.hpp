#pragma once

// Gelfand-Shilov test functions and finite-order seminorm evaluators.
//
// All suprema over x are grid maxima over the interior mask |x_i| <= 0.9 L_i,
// and every supremum over multi-indices is truncated at an explicit cutoff.
// Derivatives are spectral; Fourier coefficients below `kSeminormNoiseFloor`
// times the largest coefficient are dropped first, otherwise round-off in the
// highest modes is amplified by |xi|^|beta| and swamps the table.

#include <array>
#include <optional>
#include <vector>

#include <json.hpp>

#include "gsq/grid.hpp"

namespace gsq {

inline constexpr double kSeminormNoiseFloor = 1e-13;
inline constexpr double kInteriorFraction = 0.9;

/// Gevrey/Gelfand-Shilov index pair (s, sigma) with constants h and r.
struct GevreyParams {
  double s = 0.5;
  double sigma = 0.5;
  /// (s1, s2, sigma1, sigma2) for the two-block norm; unset means (s, sigma, sigma, s),
  /// the symbol-class pattern on (x, xi).
  std::optional<std::array<double, 4>> anisotropic;
  double h = 1.0;
  double r = 0.0;

  /// Throws unless s, sigma, h > 0 and s + sigma >= 1.
  void validate() const;
  /// (s, sigma) = (1/2, 1/2): Beurling-type claims exclude this pair.
  bool gaussian_borderline() const;
};

using MultiIndex = std::vector<int>;

/// Multi-indices of the given length with |alpha| <= max_order, graded
/// lexicographic order (by total order, then lexicographically).
std::vector<MultiIndex> multi_indices(std::size_t dims, int max_order);

int order(const MultiIndex& alpha);
/// sum_i exponent * log(alpha_i!).
double log_factorial_power(const MultiIndex& alpha, double exponent);

/// Spectral derivatives of one function, sharing a single filtered transform.
class DerivativeBank {
 public:
  explicit DerivativeBank(const SampledFunction& f, double noise_floor = kSeminormNoiseFloor);
  SampledFunction derivative(const MultiIndex& alpha) const;
  const Grid& grid() const { return grid_; }

 private:
  Grid grid_;
  SampledFunction spectrum_;
};

SampledFunction gaussian_window(const Grid& grid);

/// k-th L2-normalised Hermite function on a 1d grid, k <= 60.
SampledFunction hermite(int k, const Grid& grid);
/// h_{k1}(x1) h_{k2}(x2) on a 2d grid.
SampledFunction hermite_product(int k1, int k2, const Grid& grid);

inline constexpr int kMaxHermiteIndex = 60;

struct SeminormEntry {
  MultiIndex alpha;
  MultiIndex beta;
  double value = 0.0;
};

struct SeminormReport {
  GevreyParams params;
  int cutoff = 0;
  std::vector<SeminormEntry> entries;
  double overall = 0.0;
  SeminormEntry argmax;
  std::vector<double> argmax_x;

  /// Entry with the given total orders maximised over the multi-indices.
  double max_at_orders(int alpha_order, int beta_order) const;
  nlohmann::json to_json() const;
};

/// Table of sup_x |x^alpha d^beta f| / (h^{|alpha|+|beta|} alpha!^s beta!^sigma)
/// for |alpha|, |beta| <= cutoff.
SeminormReport gs_seminorm(const SampledFunction& f, const GevreyParams& params, int cutoff);

/// Per-axis exponents of the (h, r)-norm: weight e^{r sum |x_i|^{1/s_i}},
/// derivative growth alpha_i!^{sigma_i}.
struct HrParams {
  double h = 1.0;
  double r = 0.0;
  std::vector<double> weight_exponent;     // s_i
  std::vector<double> factorial_exponent;  // sigma_i

  /// Two-block pattern on a 2d grid: (s1, s2, sigma1, sigma2).
  static HrParams two_block(double h, double r, double s1, double s2, double sigma1, double sigma2);
  /// Symbol pattern on a phase-space grid: x-slot (s, sigma), xi-slot (sigma, s).
  static HrParams symbol(const GevreyParams& p);
};

/// sup over |alpha| <= cutoff and interior x of
/// |d^alpha f| / (h^|alpha| prod alpha_i!^{sigma_i} e^{r sum |x_i|^{1/s_i}}).
double hr_norm(const SampledFunction& f, const HrParams& params, int cutoff);

/// Uniform-boundedness check for the families
///   Omega2 = { x^gamma f / ((2^{1+s} h1)^|gamma| gamma!^s) }          in S^sigma_{s; h2}
///   Omega3 = { D^delta x^gamma f / ((2^{2+2s} h1)^|gamma+delta| gamma!^s delta!^sigma) } in S^sigma_{s; h3}
/// with h2 = 2^{1+s} h1 and h3 = 2^{2+2s} h1, on a 1d grid.
///
/// `base_constant` is the seminorm of f at h1 over orders up to
/// cutoff + family_order (enough to cover every Leibniz term).  Each family
/// member's seminorm at cutoff is compared against base_constant times the
/// largest Leibniz coefficient over the whole family, a constant that does not
/// depend on gamma or delta.
struct BoundedFamilyReport {
  double s = 0.0, sigma = 0.0;
  double h1 = 0.0, h2 = 0.0, h3 = 0.0;
  int cutoff = 0;
  int family_order = 0;
  double base_constant = 0.0;
  std::vector<double> omega2;               // by gamma
  std::vector<std::vector<double>> omega3;  // [gamma][delta]
  double omega2_bound = 0.0;
  double omega3_bound = 0.0;
  bool uniform = false;

  nlohmann::json to_json() const;
};

BoundedFamilyReport bounded_family_check(const SampledFunction& f, double s, double sigma, double h1,
                                         int cutoff, int family_order);

}  // namespace gsq
