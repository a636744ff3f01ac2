#pragma once

// Weights, the power-triangle constant, the m_{s,tau} series and log-domain
// envelope regression on STFT fields.
//
// Every fit is finite evidence on a finite box.  Verdicts say which quantifier
// pattern the fitted constants are consistent with; they certify nothing.

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gsq/grid.hpp"
#include "gsq/stft.hpp"

namespace gsq {

/// 1 for r <= 1, 2^{r-1} otherwise.  Throws for r <= 0.
double kappa(double r);

/// |x + y|^{1/s} <= kappa(1/s) (|x|^{1/s} + |y|^{1/s}), with a relative
/// rounding allowance of 1e-12 at saturation.
bool power_triangle_check(double x, double y, double s);

/// log m_s(tau <x>^2), m_s(t) = sum_j t^j / (j!)^{2s}, summed in the log domain.
double m_series_log(double s, double tau, double x);
/// exp(m_series_log); throws std::overflow_error past the double range.
double m_series(double s, double tau, double x);

/// Two-sided bound C^{-1} e^{(2s-eps) k <x>^{1/s}} <= m <= C e^{(2s+eps) k <x>^{1/s}},
/// k = tau^{1/(2s)}.  Constants are fitted on a coarse grid over [0, x_max]
/// and re-verified on a ten times finer one.
struct MBoundsReport {
  double s = 0.0, tau = 0.0, eps = 0.0, x_max = 0.0;
  double log_c_lower = 0.0;  // log of the constant in the lower bound
  double log_c_upper = 0.0;
  double lower_argmax = 0.0;  // where the lower-bound excess peaks on the fit grid
  double upper_argmax = 0.0;
  double worst_excess = 0.0;  // largest violation on the verify grid, log units
  bool holds = false;
  nlohmann::json to_json() const;
};

MBoundsReport m_bounds_check(double s, double tau, double eps = 0.1, double x_max = 20.0);

/// sup_x |x|^alpha e^{r|x|^{1/s}} / m_{s,tau}(x) over the nodes of a 1d grid,
/// r = rate_fraction * 2s tau^{1/(2s)}.  h0 is the minimax fit of
/// log(sup_alpha / alpha!^s) against alpha; `spread` is the max/min of
/// sup_alpha / (h0^alpha alpha!^s).  The uniform bound sharpens as r nears the
/// leading rate, at the price of maxima further out.
struct MQuotientReport {
  double s = 0.0, tau = 0.0, r = 0.0, h0 = 0.0;
  std::vector<double> sups;
  std::vector<double> normalized;
  std::vector<double> argmax_x;
  double spread = 0.0;
  bool interior_maxima = false;  // every sup attained strictly inside the grid
  nlohmann::json to_json() const;
};

inline constexpr double kQuotientRateFraction = 0.9;

MQuotientReport m_quotient_bound_check(double s, double tau, int max_alpha, const Grid& grid,
                                       double rate_fraction = kQuotientRateFraction);
/// Same on a grid reaching twice the predicted location of the alpha = max_alpha peak.
MQuotientReport m_quotient_bound_check(double s, double tau, int max_alpha,
                                       double rate_fraction = kQuotientRateFraction);

/// Weight families on (x, xi).
struct Weight {
  enum class Kind { exponential, polynomial, product };
  Kind kind = Kind::exponential;
  double r = 0.0;      // exponential: e^{r(|x|^{1/s} + |xi|^{1/sigma})}
  double s = 1.0;
  double sigma = 1.0;
  double m = 0.0;      // polynomial: (1 + x^2 + xi^2)^{m/2}
  std::vector<Weight> factors;

  static Weight exponential(double r, double s, double sigma);
  static Weight polynomial(double m);
  static Weight product(std::vector<Weight> factors);

  double log_value(double x, double xi) const;
  double operator()(double x, double xi) const { return std::exp(log_value(x, xi)); }
  nlohmann::json to_json() const;
};

/// Named constructor: "exponential", "polynomial" or "product" (of the given
/// factors).  Throws std::invalid_argument on an unknown name.
Weight weight_omega(const std::string& kind, const nlohmann::json& params);

enum class EnvelopeKind { decay_decay, growth_decay, growth_growth, weighted };

std::string to_string(EnvelopeKind kind);

/// One regressor |u_i|^{1/exponent_i} per field slot.  growth_decay treats the
/// first half of the slots as growth, the second half as decay.  weighted
/// divides by the weight on the first two slots and fits decay on the rest.
struct EnvelopeModel {
  EnvelopeKind kind = EnvelopeKind::decay_decay;
  std::vector<double> exponents;
  std::optional<Weight> weight;

  static EnvelopeModel decay_decay(std::vector<double> exponents);
  static EnvelopeModel growth_decay(std::vector<double> exponents);
  static EnvelopeModel growth_growth(std::vector<double> exponents);
  static EnvelopeModel weighted(Weight w, std::vector<double> decay_exponents);

  /// Per slot: +1 growth, -1 decay, 0 not regressed.
  std::vector<int> roles(std::size_t dims) const;
};

struct FitOptions {
  /// Absolute floor; <= 0 means 1e-14 times the field maximum.
  double noise_floor = 0.0;
  /// Only nodes with |u_i| <= box_fraction * L_i on every slot are used.
  double box_fraction = 1.0;
};

struct EnvelopeFit {
  EnvelopeModel model;
  /// Per slot, sign convention: growth slots report r (positive = growth),
  /// decay slots report h (positive = decay), unregressed slots report 0.
  std::vector<double> rates;
  std::vector<bool> clamped;  // decay slot pinned at 0 by the sign constraint
  double log_offset = 0.0;
  double residual_rms = 0.0;
  double used_fraction = 0.0;
  std::size_t used_points = 0;
  nlohmann::json to_json() const;
};

/// Least squares on log|F| = c + sum_i b_i |u_i|^{1/e_i}.  Nodes below the noise
/// floor and nodes with any regressed coordinate equal to 0 are dropped.
/// Decay slots are constrained to h >= 0 by an active-set clamp.
/// Throws std::invalid_argument for fewer than 10 usable points or rank-deficient
/// regressors.
EnvelopeFit fit_envelope(const SampledFunction& field, const EnvelopeModel& model, const FitOptions& options = {});
EnvelopeFit fit_envelope(const STFTField& field, const EnvelopeModel& model, const FitOptions& options = {});

struct ClassifyOptions {
  std::vector<double> box_fractions{0.5, 0.7, 0.9};
  std::vector<double> h_ladder{0.125, 0.25, 0.5};
  std::vector<double> r_ladder{0.05, 0.1, 0.2};
  double margin = 0.05;
};

/// Fitted constants of V_Phi a on a ladder of boxes and the quantifier
/// patterns they are consistent with.
///   growth: G(x, xi) = sup_{eta, y} |V|, regressors |x|^{1/s}, |xi|^{1/sigma}
///   decay:  D(eta, y) = sup_{x, xi} |V| e^{-r+ (|x|^{1/s} + |xi|^{1/sigma})},
///           regressors |eta|^{1/sigma}, |y|^{1/s}, r+ = max(fitted r, 0)
/// r_hat is the largest growth rate over boxes and slots, h_hat the smallest
/// decay rate.  "every h" holds when h_hat >= (1 + margin) h for every h in the
/// ladder; "every r" when r_hat <= (1 - margin) r for every r in the ladder.
struct ClassVerdict {
  double s = 0.0, sigma = 0.0;
  std::vector<EnvelopeFit> growth_fits;
  std::vector<EnvelopeFit> decay_fits;
  double r_hat = 0.0;
  double h_hat = 0.0;
  bool some_h = false;
  bool every_h = false;
  bool every_r = false;
  bool gamma = false;                   // some h, some r
  bool gamma_upper0 = false;            // some r, every h
  bool gamma_lower0 = false;            // some h, every r
  bool gamma_upper0_lower0 = false;     // every h, every r
  bool borderline = false;              // (s, sigma) = (1/2, 1/2)
  nlohmann::json to_json() const;
};

ClassVerdict classify_field(const STFTField& field, double s, double sigma, const ClassifyOptions& options = {});
ClassVerdict classify_symbol(const SampledFunction& a, const SampledFunction& window, double s, double sigma,
                             const ClassifyOptions& options = {});

/// Discrete L^{infty,q} norm of omega_R^{-1} F for a field with slots
/// (x, xi, eta, y), omega_R = omega(x, xi) e^{-R(|y|^{1/s} + |eta|^{1/sigma})}:
/// sup over interior (x, xi), then l^q quadrature over interior (eta, y).
/// q = infinity is requested with std::numeric_limits<double>::infinity().
double mixed_norm(const STFTField& field, const Weight& omega, double R, double q, double s, double sigma);
double mixed_norm(const SampledFunction& field, const Weight& omega, double R, double q, double s, double sigma);

}  // namespace gsq
