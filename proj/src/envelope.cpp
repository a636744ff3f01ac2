#include "gsq/envelope.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace gsq {

namespace {

constexpr double kDefaultNoiseRel = 1e-14;

double log_add(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  const double hi = std::max(a, b), lo = std::min(a, b);
  return hi + std::log1p(std::exp(lo - hi));
}

double japanese_sq(double x) { return 1.0 + x * x; }

}  // namespace

double kappa(double r) {
  if (!(r > 0.0)) throw std::invalid_argument("kappa needs r > 0");
  return r <= 1.0 ? 1.0 : std::pow(2.0, r - 1.0);
}

bool power_triangle_check(double x, double y, double s) {
  if (!(s > 0.0)) throw std::invalid_argument("power_triangle_check needs s > 0");
  const double p = 1.0 / s;
  const double lhs = std::pow(std::abs(x + y), p);
  const double rhs = kappa(p) * (std::pow(std::abs(x), p) + std::pow(std::abs(y), p));
  return lhs <= rhs * (1.0 + 1e-12);
}

double m_series_log(double s, double tau, double x) {
  if (!(s > 0.0) || !(tau > 0.0)) throw std::invalid_argument("m_series needs s, tau > 0");
  const double log_t = std::log(tau * japanese_sq(x));
  constexpr double kRelStop = 41.45;  // log(1e18)
  double acc = -std::numeric_limits<double>::infinity();
  double prev = -std::numeric_limits<double>::infinity();
  for (long j = 0; j < 100'000'000; ++j) {
    const double term = static_cast<double>(j) * log_t - 2.0 * s * std::lgamma(static_cast<double>(j) + 1.0);
    acc = log_add(acc, term);
    if (j > 0 && term < prev && term < acc - kRelStop) return acc;
    prev = term;
  }
  throw std::overflow_error("m_series: series did not settle");
}

double m_series(double s, double tau, double x) {
  const double v = m_series_log(s, tau, x);
  if (v > std::log(std::numeric_limits<double>::max())) throw std::overflow_error("m_series exceeds double range");
  return std::exp(v);
}

nlohmann::json MBoundsReport::to_json() const {
  return {{"s", s},
          {"tau", tau},
          {"eps", eps},
          {"x_max", x_max},
          {"log_c_lower", log_c_lower},
          {"log_c_upper", log_c_upper},
          {"lower_argmax", lower_argmax},
          {"upper_argmax", upper_argmax},
          {"worst_excess", worst_excess},
          {"holds", holds}};
}

MBoundsReport m_bounds_check(double s, double tau, double eps, double x_max) {
  if (!(eps > 0.0) || eps >= 2.0 * s) throw std::invalid_argument("m_bounds_check needs 0 < eps < 2s");
  if (!(x_max > 0.0)) throw std::invalid_argument("m_bounds_check needs x_max > 0");
  MBoundsReport rep;
  rep.s = s;
  rep.tau = tau;
  rep.eps = eps;
  rep.x_max = x_max;
  const double k = std::pow(tau, 1.0 / (2.0 * s));
  const double lo_rate = (2.0 * s - eps) * k;
  const double hi_rate = (2.0 * s + eps) * k;
  auto excess = [&](double x, double& lower, double& upper) {
    const double e = std::pow(japanese_sq(x), 1.0 / (2.0 * s));
    const double lm = m_series_log(s, tau, x);
    lower = lo_rate * e - lm;
    upper = lm - hi_rate * e;
  };

  constexpr int kFit = 201, kVerify = 2001;
  constexpr double kLogMargin = 0.01;
  rep.log_c_lower = rep.log_c_upper = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < kFit; ++i) {
    const double x = x_max * i / (kFit - 1);
    double lo, hi;
    excess(x, lo, hi);
    if (lo > rep.log_c_lower) {
      rep.log_c_lower = lo;
      rep.lower_argmax = x;
    }
    if (hi > rep.log_c_upper) {
      rep.log_c_upper = hi;
      rep.upper_argmax = x;
    }
  }
  rep.worst_excess = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < kVerify; ++i) {
    const double x = x_max * i / (kVerify - 1);
    double lo, hi;
    excess(x, lo, hi);
    rep.worst_excess = std::max({rep.worst_excess, lo - rep.log_c_lower, hi - rep.log_c_upper});
  }
  rep.holds = rep.worst_excess <= kLogMargin;
  return rep;
}

nlohmann::json MQuotientReport::to_json() const {
  return {{"s", s},         {"tau", tau},       {"r", r},
          {"h0", h0},       {"sups", sups},     {"normalized", normalized},
          {"argmax_x", argmax_x}, {"spread", spread}, {"interior_maxima", interior_maxima}};
}

MQuotientReport m_quotient_bound_check(double s, double tau, int max_alpha, const Grid& grid, double rate_fraction) {
  if (grid.dims() != 1) throw std::invalid_argument("m_quotient_bound_check needs a 1d grid");
  if (max_alpha < 1) throw std::invalid_argument("m_quotient_bound_check needs max_alpha >= 1");
  if (!(rate_fraction > 0.0) || rate_fraction >= 1.0)
    throw std::invalid_argument("m_quotient_bound_check needs 0 < rate_fraction < 1");
  MQuotientReport rep;
  rep.s = s;
  rep.tau = tau;
  rep.r = rate_fraction * 2.0 * s * std::pow(tau, 1.0 / (2.0 * s));

  const auto xs = grid.axis(0).nodes();
  std::vector<double> base(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i)
    base[i] = rep.r * std::pow(std::abs(xs[i]), 1.0 / s) - m_series_log(s, tau, xs[i]);

  // y_a = log sup_a - s log a!
  std::vector<double> y;
  rep.interior_maxima = true;
  for (int a = 0; a <= max_alpha; ++a) {
    double best = -std::numeric_limits<double>::infinity();
    std::size_t at = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double ax = std::abs(xs[i]);
      if (a > 0 && ax == 0.0) continue;
      const double v = (a > 0 ? a * std::log(ax) : 0.0) + base[i];
      if (v > best) {
        best = v;
        at = i;
      }
    }
    y.push_back(best - s * std::lgamma(a + 1.0));
    rep.sups.push_back(std::exp(best));
    rep.argmax_x.push_back(xs[at]);
    if (at == 0 || at + 1 == xs.size()) rep.interior_maxima = false;
  }

  // Minimax slope: the range of y_a - a p is convex in p.
  auto range = [&](double p) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (int a = 0; a <= max_alpha; ++a) {
      lo = std::min(lo, y[a] - a * p);
      hi = std::max(hi, y[a] - a * p);
    }
    return hi - lo;
  };
  double pa = -50.0, pb = 50.0;
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int it = 0; it < 200; ++it) {
    const double p1 = pb - g * (pb - pa), p2 = pa + g * (pb - pa);
    if (range(p1) <= range(p2))
      pb = p2;
    else
      pa = p1;
  }
  const double p = 0.5 * (pa + pb);
  rep.h0 = std::exp(p);
  for (int a = 0; a <= max_alpha; ++a) rep.normalized.push_back(std::exp(y[a] - a * p));
  rep.spread = std::exp(range(p));
  return rep;
}

MQuotientReport m_quotient_bound_check(double s, double tau, int max_alpha, double rate_fraction) {
  if (!(s > 0.0) || !(tau > 0.0)) throw std::invalid_argument("m_series needs s, tau > 0");
  if (!(rate_fraction > 0.0) || rate_fraction >= 1.0)
    throw std::invalid_argument("m_quotient_bound_check needs 0 < rate_fraction < 1");
  // sup_x x^a e^{-c x^{1/s}} sits at (a s / c)^s with c the leftover rate.
  const double c = (1.0 - rate_fraction) * 2.0 * s * std::pow(tau, 1.0 / (2.0 * s));
  const double peak = std::pow(std::max(max_alpha, 1) * s / c, s);
  return m_quotient_bound_check(s, tau, max_alpha, make_grid(1, 8192, 2.0 * peak + 3.0), rate_fraction);
}

Weight Weight::exponential(double r, double s, double sigma) {
  if (!(s > 0.0) || !(sigma > 0.0)) throw std::invalid_argument("weight exponents must be positive");
  Weight w;
  w.kind = Kind::exponential;
  w.r = r;
  w.s = s;
  w.sigma = sigma;
  return w;
}

Weight Weight::polynomial(double m) {
  Weight w;
  w.kind = Kind::polynomial;
  w.m = m;
  return w;
}

Weight Weight::product(std::vector<Weight> factors) {
  Weight w;
  w.kind = Kind::product;
  w.factors = std::move(factors);
  return w;
}

double Weight::log_value(double x, double xi) const {
  switch (kind) {
    case Kind::exponential:
      return r * (std::pow(std::abs(x), 1.0 / s) + std::pow(std::abs(xi), 1.0 / sigma));
    case Kind::polynomial:
      return 0.5 * m * std::log1p(x * x + xi * xi);
    case Kind::product: {
      double v = 0.0;
      for (const auto& f : factors) v += f.log_value(x, xi);
      return v;
    }
  }
  return 0.0;
}

nlohmann::json Weight::to_json() const {
  switch (kind) {
    case Kind::exponential:
      return {{"kind", "exponential"}, {"r", r}, {"s", s}, {"sigma", sigma}};
    case Kind::polynomial:
      return {{"kind", "polynomial"}, {"m", m}};
    case Kind::product: {
      auto arr = nlohmann::json::array();
      for (const auto& f : factors) arr.push_back(f.to_json());
      return {{"kind", "product"}, {"factors", arr}};
    }
  }
  return {};
}

Weight weight_omega(const std::string& kind, const nlohmann::json& params) {
  if (kind == "exponential")
    return Weight::exponential(params.value("r", 0.0), params.value("s", 1.0), params.value("sigma", 1.0));
  if (kind == "polynomial") return Weight::polynomial(params.value("m", 0.0));
  if (kind == "product") {
    std::vector<Weight> fs;
    for (const auto& f : params.at("factors")) fs.push_back(weight_omega(f.at("kind").get<std::string>(), f));
    return Weight::product(std::move(fs));
  }
  throw std::invalid_argument("unknown weight kind '" + kind + "'");
}

std::string to_string(EnvelopeKind kind) {
  switch (kind) {
    case EnvelopeKind::decay_decay: return "decay_decay";
    case EnvelopeKind::growth_decay: return "growth_decay";
    case EnvelopeKind::growth_growth: return "growth_growth";
    case EnvelopeKind::weighted: return "weighted";
  }
  return "?";
}

EnvelopeModel EnvelopeModel::decay_decay(std::vector<double> exponents) {
  return {EnvelopeKind::decay_decay, std::move(exponents), std::nullopt};
}
EnvelopeModel EnvelopeModel::growth_decay(std::vector<double> exponents) {
  return {EnvelopeKind::growth_decay, std::move(exponents), std::nullopt};
}
EnvelopeModel EnvelopeModel::growth_growth(std::vector<double> exponents) {
  return {EnvelopeKind::growth_growth, std::move(exponents), std::nullopt};
}
EnvelopeModel EnvelopeModel::weighted(Weight w, std::vector<double> decay_exponents) {
  return {EnvelopeKind::weighted, std::move(decay_exponents), std::move(w)};
}

std::vector<int> EnvelopeModel::roles(std::size_t dims) const {
  std::vector<int> r(dims, 0);
  switch (kind) {
    case EnvelopeKind::decay_decay:
      std::fill(r.begin(), r.end(), -1);
      break;
    case EnvelopeKind::growth_growth:
      std::fill(r.begin(), r.end(), +1);
      break;
    case EnvelopeKind::growth_decay:
      if (dims % 2) throw std::invalid_argument("growth_decay needs an even number of slots");
      for (std::size_t i = 0; i < dims; ++i) r[i] = i < dims / 2 ? +1 : -1;
      break;
    case EnvelopeKind::weighted:
      if (dims < 3) throw std::invalid_argument("weighted model needs (x, xi) plus decay slots");
      for (std::size_t i = 2; i < dims; ++i) r[i] = -1;
      break;
  }
  return r;
}

nlohmann::json EnvelopeFit::to_json() const {
  nlohmann::json j{{"kind", to_string(model.kind)},
                   {"exponents", model.exponents},
                   {"rates", rates},
                   {"clamped", clamped},
                   {"log_offset", log_offset},
                   {"residual_rms", residual_rms},
                   {"used_fraction", used_fraction},
                   {"used_points", used_points}};
  if (model.weight) j["weight"] = model.weight->to_json();
  return j;
}

EnvelopeFit fit_envelope(const SampledFunction& field, const EnvelopeModel& model, const FitOptions& options) {
  const Grid& g = field.grid();
  const std::size_t d = g.dims();
  const auto roles = model.roles(d);
  std::vector<std::size_t> slots;  // regressed slots
  for (std::size_t i = 0; i < d; ++i)
    if (roles[i] != 0) slots.push_back(i);
  if (model.exponents.size() != slots.size())
    throw std::invalid_argument("envelope model needs one exponent per regressed slot");
  for (double e : model.exponents)
    if (!(e > 0.0)) throw std::invalid_argument("envelope exponents must be positive");
  if (model.kind == EnvelopeKind::weighted && !model.weight)
    throw std::invalid_argument("weighted envelope model needs a weight");
  if (!(options.box_fraction > 0.0)) throw std::invalid_argument("box fraction must be positive");

  double peak = 0.0;
  for (const auto& v : field.values()) peak = std::max(peak, std::abs(v));
  const double floor = options.noise_floor > 0.0 ? options.noise_floor : kDefaultNoiseRel * peak;

  std::vector<std::vector<double>> rows;
  std::vector<double> rhs;
  std::vector<std::size_t> idx(d);
  std::vector<double> x(d);
  std::size_t in_box = 0;
  for (std::size_t i = 0; i < field.size(); ++i) {
    if (!in_interior(g, i, options.box_fraction)) continue;
    ++in_box;
    const double mag = std::abs(field[i]);
    if (!(mag > floor)) continue;
    g.unravel(i, idx);
    bool at_origin = false;
    for (std::size_t k : slots)
      if (idx[k] == g.axis(k).origin()) at_origin = true;
    if (at_origin) continue;
    g.coords(i, x);
    std::vector<double> row(slots.size());
    for (std::size_t c = 0; c < slots.size(); ++c) row[c] = std::pow(std::abs(x[slots[c]]), 1.0 / model.exponents[c]);
    double target = std::log(mag);
    if (model.kind == EnvelopeKind::weighted) target -= model.weight->log_value(x[0], x[1]);
    rows.push_back(std::move(row));
    rhs.push_back(target);
  }
  if (rows.size() < 10)
    throw std::invalid_argument("fit_envelope: only " + std::to_string(rows.size()) + " usable points (need 10)");

  EnvelopeFit fit;
  fit.model = model;
  fit.rates.assign(d, 0.0);
  fit.clamped.assign(d, false);
  std::vector<bool> active(slots.size(), true);
  const Eigen::Index m = static_cast<Eigen::Index>(rows.size());
  Eigen::VectorXd coef_full(slots.size());
  double offset = 0.0;
  Eigen::VectorXd resid;
  Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(rhs.data(), m);
  for (;;) {
    std::vector<std::size_t> cols;
    for (std::size_t c = 0; c < slots.size(); ++c)
      if (active[c]) cols.push_back(c);
    Eigen::MatrixXd X(m, static_cast<Eigen::Index>(cols.size()) + 1);
    for (Eigen::Index r = 0; r < m; ++r) {
      for (std::size_t c = 0; c < cols.size(); ++c) X(r, static_cast<Eigen::Index>(c)) = rows[r][cols[c]];
      X(r, static_cast<Eigen::Index>(cols.size())) = 1.0;
    }
    const auto qr = X.colPivHouseholderQr();
    if (qr.rank() < X.cols()) throw std::invalid_argument("fit_envelope: rank-deficient regressors");
    const Eigen::VectorXd beta = qr.solve(y);
    coef_full.setZero();
    for (std::size_t c = 0; c < cols.size(); ++c) coef_full(cols[c]) = beta(static_cast<Eigen::Index>(c));
    offset = beta(beta.size() - 1);
    resid = y - X * beta;

    // Clamp the worst sign violation among decay slots and refit.
    double worst = 0.0;
    std::size_t worst_c = slots.size();
    for (std::size_t c = 0; c < slots.size(); ++c)
      if (active[c] && roles[slots[c]] < 0 && coef_full(c) > worst) {
        worst = coef_full(c);
        worst_c = c;
      }
    if (worst_c == slots.size()) break;
    active[worst_c] = false;
    fit.clamped[slots[worst_c]] = true;
  }
  for (std::size_t c = 0; c < slots.size(); ++c) {
    const double b = active[c] ? coef_full(c) : 0.0;
    fit.rates[slots[c]] = roles[slots[c]] > 0 ? b : -b;
  }
  fit.log_offset = offset;
  fit.residual_rms = std::sqrt(resid.squaredNorm() / static_cast<double>(m));
  fit.used_points = rows.size();
  fit.used_fraction = static_cast<double>(rows.size()) / static_cast<double>(std::max<std::size_t>(in_box, 1));
  return fit;
}

EnvelopeFit fit_envelope(const STFTField& field, const EnvelopeModel& model, const FitOptions& options) {
  return fit_envelope(field.as_function(), model, options);
}

nlohmann::json ClassVerdict::to_json() const {
  auto fits = [](const std::vector<EnvelopeFit>& v) {
    auto a = nlohmann::json::array();
    for (const auto& f : v) a.push_back(f.to_json());
    return a;
  };
  return {{"s", s},
          {"sigma", sigma},
          {"r_hat", r_hat},
          {"h_hat", h_hat},
          {"some_h", some_h},
          {"every_h", every_h},
          {"every_r", every_r},
          {"patterns",
           {{"Gamma", gamma},
            {"Gamma^{;0}", gamma_upper0},
            {"Gamma_{;0}", gamma_lower0},
            {"Gamma^{;0}_{;0}", gamma_upper0_lower0}}},
          {"borderline_half_half", borderline},
          {"growth_fits", fits(growth_fits)},
          {"decay_fits", fits(decay_fits)}};
}

ClassVerdict classify_field(const STFTField& field, double s, double sigma, const ClassifyOptions& options) {
  if (field.pos_grid.dims() != 2) throw std::invalid_argument("classify needs a 4d field (x, xi, eta, y)");
  if (options.box_fractions.empty() || options.h_ladder.empty() || options.r_ladder.empty())
    throw std::invalid_argument("classify ladders must be nonempty");
  for (double v : options.h_ladder)
    if (!(v > 0.0)) throw std::invalid_argument("h ladder entries must be positive");
  for (double v : options.r_ladder)
    if (!(v > 0.0)) throw std::invalid_argument("r ladder entries must be positive");

  const Grid full = field.grid();
  const Grid& pos = field.pos_grid;
  const Grid& freq = field.freq_grid;
  const std::size_t np = pos.size(), nf = freq.size();

  ClassVerdict v;
  v.s = s;
  v.sigma = sigma;
  v.borderline = s == 0.5 && sigma == 0.5;
  v.r_hat = -std::numeric_limits<double>::infinity();
  v.h_hat = std::numeric_limits<double>::infinity();

  std::vector<double> xp(2), xf(2);
  for (double frac : options.box_fractions) {
    std::vector<bool> pos_in(np), freq_in(nf);
    for (std::size_t i = 0; i < np; ++i) pos_in[i] = in_interior(pos, i, frac);
    for (std::size_t j = 0; j < nf; ++j) freq_in[j] = in_interior(freq, j, frac);

    std::vector<cplx> G(np, 0.0);
    for (std::size_t i = 0; i < np; ++i) {
      double m = 0.0;
      for (std::size_t j = 0; j < nf; ++j)
        if (freq_in[j]) m = std::max(m, std::abs(field.values[i * nf + j]));
      G[i] = m;
    }
    FitOptions fo;
    fo.box_fraction = frac;
    const EnvelopeFit gfit =
        fit_envelope(SampledFunction(pos, std::move(G)), EnvelopeModel::growth_growth({s, sigma}), fo);
    const double rx = std::max(gfit.rates[0], 0.0), rxi = std::max(gfit.rates[1], 0.0);

    std::vector<cplx> D(nf, 0.0);
    std::vector<double> log_w(np);
    for (std::size_t i = 0; i < np; ++i) {
      pos.coords(i, xp);
      log_w[i] = rx * std::pow(std::abs(xp[0]), 1.0 / s) + rxi * std::pow(std::abs(xp[1]), 1.0 / sigma);
    }
    for (std::size_t j = 0; j < nf; ++j) {
      double m = 0.0;
      for (std::size_t i = 0; i < np; ++i)
        if (pos_in[i]) m = std::max(m, std::abs(field.values[i * nf + j]) * std::exp(-log_w[i]));
      D[j] = m;
    }
    const EnvelopeFit dfit =
        fit_envelope(SampledFunction(freq, std::move(D)), EnvelopeModel::decay_decay({sigma, s}), fo);

    v.r_hat = std::max({v.r_hat, gfit.rates[0], gfit.rates[1]});
    v.h_hat = std::min({v.h_hat, dfit.rates[0], dfit.rates[1]});
    v.growth_fits.push_back(gfit);
    v.decay_fits.push_back(dfit);
  }

  v.some_h = v.h_hat > 0.0;
  v.every_h = true;
  for (double h : options.h_ladder) v.every_h = v.every_h && v.h_hat >= (1.0 + options.margin) * h;
  v.every_r = true;
  for (double r : options.r_ladder) v.every_r = v.every_r && v.r_hat <= (1.0 - options.margin) * r;
  const bool some_r = std::isfinite(v.r_hat);
  v.gamma = v.some_h && some_r;
  v.gamma_upper0 = v.every_h && some_r;
  v.gamma_lower0 = v.some_h && v.every_r;
  v.gamma_upper0_lower0 = v.every_h && v.every_r;
  return v;
}

ClassVerdict classify_symbol(const SampledFunction& a, const SampledFunction& window, double s, double sigma,
                             const ClassifyOptions& options) {
  return classify_field(stft4(a, window), s, sigma, options);
}

double mixed_norm(const SampledFunction& field, const Weight& omega, double R, double q, double s, double sigma) {
  if (!(q >= 1.0)) throw std::invalid_argument("mixed_norm needs q in [1, infinity]");
  const Grid& g = field.grid();
  if (g.dims() != 4) throw std::invalid_argument("mixed_norm needs a field with slots (x, xi, eta, y)");
  const Grid inner_grid({g.axis(0), g.axis(1)});
  const Grid outer_grid({g.axis(2), g.axis(3)});
  const std::size_t ni = inner_grid.size(), no = outer_grid.size();

  std::vector<double> log_w(ni);
  std::vector<bool> in_inner(ni);
  std::vector<double> c(2);
  for (std::size_t i = 0; i < ni; ++i) {
    inner_grid.coords(i, c);
    log_w[i] = omega.log_value(c[0], c[1]);
    in_inner[i] = in_interior(inner_grid, i, 0.9);
  }
  const bool sup_norm = std::isinf(q);
  double acc = 0.0;
  for (std::size_t j = 0; j < no; ++j) {
    if (!in_interior(outer_grid, j, 0.9)) continue;
    outer_grid.coords(j, c);  // (eta, y)
    double sup = 0.0;
    for (std::size_t i = 0; i < ni; ++i)
      if (in_inner[i]) sup = std::max(sup, std::abs(field[i * no + j]) * std::exp(-log_w[i]));
    const double val = sup * std::exp(R * (std::pow(std::abs(c[1]), 1.0 / s) + std::pow(std::abs(c[0]), 1.0 / sigma)));
    if (sup_norm)
      acc = std::max(acc, val);
    else
      acc += std::pow(val, q);
  }
  if (sup_norm) return acc;
  return std::pow(acc * outer_grid.cell_volume(), 1.0 / q);
}

double mixed_norm(const STFTField& field, const Weight& omega, double R, double q, double s, double sigma) {
  return mixed_norm(field.as_function(), omega, R, q, s, sigma);
}

}  // namespace gsq
