#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "gsq/calculus.hpp"
#include "gsq/envelope.hpp"
#include "gsq/io.hpp"
#include "gsq/limits.hpp"
#include "gsq/stft.hpp"
#include "gsq/windows.hpp"

namespace gsq::cli {

namespace {

using nlohmann::json;

constexpr double kInf = std::numeric_limits<double>::infinity();

json q_to_json(double q) { return std::isinf(q) ? json("inf") : json(q); }

double q_from_json(const json& j) {
  if (j.is_string()) {
    if (j.get<std::string>() == "inf") return kInf;
    throw ConfigError("q entries are numbers or \"inf\"");
  }
  return j.get<double>();
}

void require_positive_ladder(const std::vector<double>& v, const char* name) {
  if (v.empty()) throw ConfigError(std::string(name) + " must be nonempty");
  for (double x : v)
    if (!(x > 0.0)) throw ConfigError(std::string(name) + " entries must be positive");
}

// Key-value list "r=0.5,s=2".
std::map<std::string, double> parse_kv(const std::string& text) {
  std::map<std::string, double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw ConfigError("expected key=value in '" + text + "'");
    try {
      out[item.substr(0, eq)] = std::stod(item.substr(eq + 1));
    } catch (const std::logic_error&) {
      throw ConfigError("bad number in '" + item + "'");
    }
  }
  return out;
}

int parse_index(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    const int k = std::stoi(text, &used);
    if (used != text.size() || k < 0) throw std::invalid_argument(text);
    return k;
  } catch (const std::logic_error&) {
    throw ConfigError("bad index in " + what);
  }
}

SampledFunction gauss_symbol(const Grid& ps, double x0, double xi_scale) {
  return sample(
      ps,
      [=](std::span<const double> v) {
        return std::exp(-0.5 * ((v[0] - x0) * (v[0] - x0) + xi_scale * v[1] * v[1]));
      },
      "gauss2d");
}

Grid symbol_grid(const RunConfig& cfg) {
  if (cfg.d != 1) throw ConfigError("this check needs d = 1");
  return phase_space_grid(cfg.base_grid());
}

double tolerance_or(const RunConfig& cfg, double fallback) { return cfg.tolerance.value_or(fallback); }

SharpRoute sharp_route(const RunConfig& cfg) {
  return cfg.route == "multiplier" ? SharpRoute::multiplier : SharpRoute::kernel;
}

std::vector<SampledFunction> hermites(const Grid& base, int last) {
  std::vector<SampledFunction> out;
  for (int k = 0; k <= last; ++k) out.push_back(hermite(k, base));
  return out;
}

// Checks ------------------------------------------------------------------

CheckReport check_transfer(const RunConfig& cfg) {
  const Grid base = cfg.base_grid();
  if (cfg.d != 1) throw ConfigError("transfer needs d = 1");
  const auto a = gauss_symbol(phase_space_grid(base), 0.0, 1.0);
  CheckReport rep{"transfer", 0.0, tolerance_or(cfg, 1e-8), false, json::array()};
  const std::pair<double, double> pairs[] = {{0.0, 0.5}, {0.0, 1.0}, {0.5, 1.0}};
  for (const auto& [ta, tb] : pairs) {
    const auto A = QuantMatrix::scalar(ta), B = QuantMatrix::scalar(tb);
    const auto b = quant_transfer(a, A - B);
    double dev = 0.0;
    for (const auto& f : hermites(base, 6))
      dev = std::max(dev, max_abs_diff_interior(apply_op(a, A, f), apply_op(b, B, f), 1.0));
    rep.details.push_back({{"t_a", ta}, {"t_b", tb}, {"max_dev", dev}});
    rep.max_dev = std::max(rep.max_dev, dev);
  }
  rep.pass = rep.max_dev <= rep.tolerance;
  return rep;
}

CheckReport check_sharp_hom(const RunConfig& cfg) {
  const Grid ps = symbol_grid(cfg);
  const Grid base = cfg.base_grid();
  const auto A = cfg.quant_matrix();
  const auto a1 = gauss_symbol(ps, 0.0, 1.0), a2 = gauss_symbol(ps, 0.5, 0.5);
  const auto c = sharpA(a1, a2, A, sharp_route(cfg));
  CheckReport rep{"sharp-hom", 0.0, tolerance_or(cfg, 1e-7), false, json::object()};
  for (const auto& f : hermites(base, 6))
    rep.max_dev = std::max(rep.max_dev, max_abs_diff_interior(apply_op(c, A, f), apply_op(a1, A, apply_op(a2, A, f)), 1.0));
  rep.details = {{"matrix", A.to_json()}, {"route", cfg.route}, {"hermite_max", 6}};
  rep.pass = rep.max_dev <= rep.tolerance;
  return rep;
}

CheckReport from_deviation(const DeviationReport& d, double tol) {
  CheckReport rep{d.check, d.max_dev, tol, d.max_dev <= tol, d.to_json()};
  return rep;
}

CheckReport check_stft_kernel(const RunConfig& cfg) {
  const Grid ps = symbol_grid(cfg);
  const auto d = stft_kernel_relation_check(gauss_symbol(ps, 0.0, 1.0), gaussian_window(ps), cfg.quant_matrix(), 4);
  auto rep = from_deviation(d, tolerance_or(cfg, 1e-7));
  rep.check = "stft-kernel";
  return rep;
}

CheckReport check_covariance(const RunConfig& cfg) {
  const Grid ps = symbol_grid(cfg);
  const auto d = stft_covariance_check(gauss_symbol(ps, 0.5, 0.5), gaussian_window(ps), cfg.quant_matrix());
  auto rep = from_deviation(d, tolerance_or(cfg, 1e-7));
  rep.check = "covariance";
  return rep;
}

SampledFunction random_hermite_span(const Grid& base, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  SampledFunction f(base);
  for (int k = 0; k <= 10; ++k) f += cplx(nd(rng), nd(rng)) * hermite(k, base);
  f *= 1.0 / l2_norm(f);
  return f;
}

CheckReport check_moyal(const RunConfig& cfg) {
  if (cfg.d != 1) throw ConfigError("moyal needs d = 1");
  const Grid base = cfg.base_grid();
  std::mt19937_64 rng(cfg.seed);
  const auto phi = make_window(base, cfg);
  CheckReport rep{"moyal", 0.0, tolerance_or(cfg, 1e-10), false, json::object()};
  for (int p = 0; p < 20; ++p) {
    const auto f = random_hermite_span(base, rng);
    const auto g = random_hermite_span(base, rng);
    const auto psi = random_hermite_span(base, rng);
    const auto m = moyal_check(f, g, phi, psi);
    rep.max_dev = std::max(rep.max_dev, std::abs(m.lhs - m.rhs));
  }
  rep.details = {{"pairs", 20}, {"seed", cfg.seed}};
  rep.pass = rep.max_dev <= rep.tolerance;
  return rep;
}

CheckReport check_inversion(const RunConfig& cfg) {
  if (cfg.d != 1) throw ConfigError("inversion needs d = 1");
  const Grid base = cfg.base_grid();
  const auto w = make_window(base, cfg);
  CheckReport rep{"inversion", 0.0, tolerance_or(cfg, 1e-10), false, json::array()};
  for (const auto& f : hermites(base, 10)) {
    const double e = l2_norm(istft(stft(f, w), w) - f) / l2_norm(f);
    rep.details.push_back({{"input", f.label()}, {"relative_l2", e}});
    rep.max_dev = std::max(rep.max_dev, e);
  }
  rep.pass = rep.max_dev <= rep.tolerance;
  return rep;
}

CheckReport check_m_bounds(const RunConfig& cfg) {
  CheckReport rep{"m-bounds", -kInf, tolerance_or(cfg, 0.01), true, json::object()};
  json bounds = json::array(), quotients = json::array();
  double worst_spread = 0.0;
  for (double s : {0.5, 1.0, 2.0})
    for (double tau : {0.25, 1.0, 4.0}) {
      const auto b = m_bounds_check(s, tau, 0.1, 20.0);
      const auto q = m_quotient_bound_check(s, tau, 10);
      rep.max_dev = std::max(rep.max_dev, b.worst_excess);
      worst_spread = std::max(worst_spread, q.spread);
      rep.pass = rep.pass && b.holds && q.interior_maxima;
      bounds.push_back(b.to_json());
      quotients.push_back(q.to_json());
    }
  constexpr double kSpreadLimit = 2.0;
  rep.pass = rep.pass && rep.max_dev <= rep.tolerance && worst_spread <= kSpreadLimit;
  rep.details = {{"bounds", bounds}, {"quotients", quotients}, {"worst_spread", worst_spread}, {"spread_limit", kSpreadLimit}};
  return rep;
}

CheckReport check_kappa(const RunConfig& cfg) {
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> mag(-3.0, 3.0), sgn(-1.0, 1.0), ex(0.3, 4.0);
  constexpr long kSamples = 1'000'000;
  long violations = 0;
  for (long i = 0; i < kSamples; ++i) {
    const double x = std::copysign(std::pow(10.0, mag(rng)), sgn(rng));
    const double y = std::copysign(std::pow(10.0, mag(rng)), sgn(rng));
    if (!power_triangle_check(x, y, ex(rng))) ++violations;
  }
  CheckReport rep{"kappa", static_cast<double>(violations), tolerance_or(cfg, 0.0), false,
                  {{"samples", kSamples}, {"seed", cfg.seed}, {"violations", violations}}};
  rep.pass = rep.max_dev <= rep.tolerance;
  return rep;
}

CheckReport check_mixed_norm(const RunConfig& cfg) {
  const Grid ps = symbol_grid(cfg);
  const auto V = stft4(gauss_symbol(ps, 0.0, 1.0), gaussian_window(ps));
  const auto omega = Weight::exponential(0.0, cfg.s, cfg.sigma);
  const std::vector<double> Rs{0.0, 0.1, 0.2, 0.4};
  CheckReport rep{"mixed-norm", 0.0, tolerance_or(cfg, 0.0), true, json::object()};
  json rows = json::array();
  for (double q : cfg.q) {
    std::vector<double> vals;
    for (double R : Rs) vals.push_back(mixed_norm(V, omega, R, q, cfg.s, cfg.sigma));
    bool up = true, down = true;
    for (std::size_t i = 1; i < vals.size(); ++i) {
      up = up && vals[i] >= vals[i - 1];
      down = down && vals[i] < vals[i - 1];
    }
    for (double v : vals)
      if (!std::isfinite(v)) {
        rep.pass = false;
        rep.max_dev += 1.0;
      }
    rows.push_back({{"q", q_to_json(q)},
                    {"values", vals},
                    {"trend", down ? "decreasing" : up ? "non-decreasing" : "mixed"}});
  }
  rep.details = {{"R", Rs}, {"norms", rows}};
  return rep;
}

CheckReport check_mollify(const RunConfig& cfg) {
  const Grid ps = symbol_grid(cfg);
  const auto a = gauss_symbol(ps, 0.0, 1.0);
  auto phi = gauss_symbol(ps, 0.0, 1.0);
  phi.set_label("phi");
  GevreyParams p;
  p.s = cfg.s;
  p.sigma = cfg.sigma;
  p.h = 1.0;
  p.validate();
  const std::size_t origin = ps.axis(0).origin() * ps.stride(0) + ps.axis(1).origin() * ps.stride(1);
  CheckReport rep{"mollify", 0.0, tolerance_or(cfg, 0.0), true, json::object()};
  std::vector<double> dist;
  for (double eps : {0.5, 0.25, 0.125}) {
    const auto m = mollify(a, phi, eps);
    dist.push_back(hr_norm(m.value - a, HrParams::symbol(p), cfg.cutoff));
    rep.max_dev = std::max(rep.max_dev, std::abs(m.value[origin] - a[origin]));
  }
  bool decreasing = true;
  for (std::size_t i = 1; i < dist.size(); ++i) decreasing = decreasing && dist[i] < dist[i - 1];
  rep.pass = decreasing && rep.max_dev <= rep.tolerance;
  rep.details = {{"eps", {0.5, 0.25, 0.125}}, {"hr_distance", dist}, {"strictly_decreasing", decreasing}};
  return rep;
}

CheckReport check_trace(const RunConfig& cfg) {
  const Grid ps = symbol_grid(cfg);
  const auto F = FourDField::tensor(gauss_symbol(ps, 0.0, 1.0), gauss_symbol(ps, 0.5, 0.5));
  GevreyParams p;
  p.s = cfg.s;
  p.sigma = cfg.sigma;
  p.h = 1.0;
  p.r = 0.1;
  const auto t = trace_leibniz_check(F, p, cfg.cutoff);
  CheckReport rep{"trace", std::max(0.0, t.trace_norm - t.field_norm), tolerance_or(cfg, 0.0), t.holds, t.to_json()};
  return rep;
}

// Commands ----------------------------------------------------------------

void emit(const json& j) { std::cout << j.dump(2) << '\n'; }

void write_function(const std::filesystem::path& path, const SampledFunction& f) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  if (path.extension() == ".json") {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open " + path.string());
    out << to_json(f).dump() << '\n';
  } else {
    write_gsq_file(path, f);
  }
}

void write_csv(const std::filesystem::path& path, const SampledFunction& f, const std::vector<std::string>& names) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open " + path.string());
  write_abs_csv(out, f, names);
}

std::vector<double> peak_coords(const SampledFunction& f) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < f.size(); ++i)
    if (std::abs(f[i]) > std::abs(f[best])) best = i;
  std::vector<double> x(f.grid().dims());
  f.grid().coords(best, x);
  return x;
}

json grid_json(const Grid& g) {
  json n = json::array(), L = json::array();
  for (const auto& a : g.axes()) {
    n.push_back(a.n);
    L.push_back(a.half_width);
  }
  return {{"n", n}, {"L", L}};
}

int cmd_gen(const RunConfig& cfg, const std::string& name, const std::string& out, const std::string& csv) {
  const auto f = builtin(name, cfg);
  const auto path = output_path(cfg, out);
  write_function(path, f);
  json j = {{"builtin", name}, {"grid", grid_json(f.grid())}, {"path", path.string()}};
  if (!csv.empty()) {
    const auto cpath = output_path(cfg, csv);
    write_csv(cpath, f, f.grid().dims() == 1 ? std::vector<std::string>{"x"} : std::vector<std::string>{"x", "xi"});
    j["csv"] = cpath.string();
  }
  emit(j);
  return kExitPass;
}

int cmd_stft(const RunConfig& cfg, const std::string& input, const std::string& prefix) {
  const auto f = load_input(input, cfg);
  const auto w = make_window(f.grid(), cfg);
  const STFTField V = f.grid().dims() == 2 ? stft4(f, w) : stft(f, w);
  const auto F = V.as_function();
  const auto gsq_path = output_path(cfg, prefix + ".gsq");
  const auto side_path = output_path(cfg, prefix + ".json");
  const auto csv_path = output_path(cfg, prefix + ".csv");
  write_function(gsq_path, F);
  {
    std::ofstream side(side_path);
    if (!side) throw ConfigError("cannot open " + side_path.string());
    side << V.sidecar().dump(2) << '\n';
  }
  write_csv(csv_path, F, V.slot_names());
  emit({{"input", f.label()},
        {"window", V.window_label},
        {"slots", V.slot_names()},
        {"peak", peak_coords(F)},
        {"files", {gsq_path.string(), side_path.string(), csv_path.string()}}});
  return kExitPass;
}

int cmd_quantize(const RunConfig& cfg, const std::string& symbol, const std::string& input, const std::string& out,
                 const std::string& kernel_out) {
  const auto a = load_input(symbol, cfg);
  const auto f = load_input(input, cfg);
  const auto A = cfg.quant_matrix();
  const auto g = apply_op(a, A, f);
  const auto path = output_path(cfg, out);
  write_function(path, g);
  json j = {{"symbol", a.label()}, {"input", f.label()}, {"matrix", A.to_json()}, {"path", path.string()}};
  if (!kernel_out.empty()) {
    const auto kpath = output_path(cfg, kernel_out);
    write_function(kpath, kernel_from_symbol(a, A).K);
    j["kernel"] = kpath.string();
  }
  emit(j);
  return kExitPass;
}

int cmd_compose(const RunConfig& cfg, const std::string& a_spec, const std::string& b_spec, const std::string& out) {
  const auto a = load_input(a_spec, cfg);
  const auto b = load_input(b_spec, cfg);
  const auto A = cfg.quant_matrix();
  const auto c = sharpA(a, b, A, sharp_route(cfg));
  const auto path = output_path(cfg, out);
  write_function(path, c);
  emit({{"a", a.label()}, {"b", b.label()}, {"matrix", A.to_json()}, {"route", cfg.route}, {"path", path.string()}});
  return kExitPass;
}

int cmd_classify(const RunConfig& cfg, const std::string& symbol) {
  const auto a = load_input(symbol, cfg);
  ClassifyOptions opt;
  opt.h_ladder = cfg.h_ladder;
  opt.r_ladder = cfg.r_ladder;
  const auto v = classify_symbol(a, make_window(a.grid(), cfg), cfg.s, cfg.sigma, opt);
  emit({{"symbol", a.label()}, {"verdict", v.to_json()}});
  return kExitPass;
}

int cmd_verify(const RunConfig& cfg, const std::string& name, const std::string& out) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto rep = run_check(name, cfg);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const json j = rep.to_json();
  if (!out.empty()) {
    const auto path = output_path(cfg, out);
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream o(path);
    if (!o) throw ConfigError("cannot open " + path.string());
    o << j.dump(2) << '\n';
  }
  emit(j);
  std::cerr << "timing " << name << ' ' << secs << " s\n";
  return rep.pass ? kExitPass : kExitCheckFail;
}

}  // namespace

// RunConfig ---------------------------------------------------------------

void RunConfig::validate() const {
  if (d != 1 && d != 2) throw ConfigError("d must be 1 or 2");
  if (n == 0 || n % 2 != 0) throw ConfigError("n must be positive and even");
  if (L && !(*L > 0.0)) throw ConfigError("L must be positive");
  if (!(s > 0.0) || !(sigma > 0.0)) throw ConfigError("s and sigma must be positive");
  require_positive_ladder(h_ladder, "h_ladder");
  require_positive_ladder(r_ladder, "r_ladder");
  if (q.empty()) throw ConfigError("q must be nonempty");
  for (double v : q)
    if (!(v >= 1.0)) throw ConfigError("q entries must be >= 1");
  if (route != "kernel" && route != "multiplier") throw ConfigError("route must be kernel or multiplier");
  if (window != "gaussian" && window.rfind("hermite:", 0) != 0) throw ConfigError("window must be gaussian or hermite:k");
  if (memory_bytes == 0) throw ConfigError("memory ceiling must be positive");
  if (cutoff < 0 || cutoff > 12) throw ConfigError("cutoff must be in [0, 12]");
  if (tolerance && !(*tolerance >= 0.0)) throw ConfigError("tolerance must be non-negative");
  quant_matrix();
}

double RunConfig::half_width() const { return L ? *L : balanced_half_width(n); }

Grid RunConfig::base_grid() const { return make_grid(d, n, half_width()); }

QuantMatrix RunConfig::quant_matrix() const {
  try {
    return parse_matrix(matrix);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("matrix: ") + e.what());
  }
}

json RunConfig::to_json() const {
  json qs = json::array();
  for (double v : q) qs.push_back(q_to_json(v));
  json j = {{"grid", {{"d", d}, {"n", n}, {"L", half_width()}}},
            {"params", {{"s", s}, {"sigma", sigma}, {"h_ladder", h_ladder}, {"r_ladder", r_ladder}, {"q", qs}}},
            {"matrix", matrix},
            {"route", route},
            {"window", window},
            {"memory_bytes", memory_bytes},
            {"seed", seed},
            {"output_dir", output_dir.string()},
            {"cutoff", cutoff}};
  if (tolerance) j["tolerance"] = *tolerance;
  return j;
}

RunConfig RunConfig::from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  RunConfig c;
  static const std::vector<std::string> known{"grid", "params", "matrix", "route", "window", "memory_bytes",
                                              "seed", "output_dir", "cutoff", "tolerance"};
  for (const auto& [k, v] : j.items())
    if (std::find(known.begin(), known.end(), k) == known.end()) throw ConfigError("unknown config key '" + k + "'");
  try {
    if (j.contains("grid")) {
      const auto& g = j.at("grid");
      if (g.contains("d")) c.d = g.at("d").get<int>();
      if (g.contains("n")) {
        const auto n = g.at("n").get<long long>();
        if (n <= 0) throw ConfigError("n must be positive and even");
        c.n = static_cast<std::size_t>(n);
      }
      if (g.contains("L") && !g.at("L").is_null()) c.L = g.at("L").get<double>();
    }
    if (j.contains("params")) {
      const auto& p = j.at("params");
      if (p.contains("s")) c.s = p.at("s").get<double>();
      if (p.contains("sigma")) c.sigma = p.at("sigma").get<double>();
      if (p.contains("h_ladder")) c.h_ladder = p.at("h_ladder").get<std::vector<double>>();
      if (p.contains("r_ladder")) c.r_ladder = p.at("r_ladder").get<std::vector<double>>();
      if (p.contains("q")) {
        c.q.clear();
        for (const auto& v : p.at("q")) c.q.push_back(q_from_json(v));
      }
    }
    if (j.contains("matrix")) {
      const auto& m = j.at("matrix");
      if (m.is_string()) {
        c.matrix = m.get<std::string>();
      } else if (m.is_number()) {
        c.matrix = "t=" + m.dump();
      } else if (m.is_array()) {
        std::string text;
        for (const auto& v : m) text += (text.empty() ? "" : ",") + v.dump();
        c.matrix = text;
      } else {
        throw ConfigError("matrix must be a string, number or list");
      }
    }
    if (j.contains("route")) c.route = j.at("route").get<std::string>();
    if (j.contains("window")) c.window = j.at("window").get<std::string>();
    if (j.contains("memory_bytes")) c.memory_bytes = j.at("memory_bytes").get<std::size_t>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
    if (j.contains("cutoff")) c.cutoff = j.at("cutoff").get<int>();
    if (j.contains("tolerance")) c.tolerance = j.at("tolerance").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("malformed config " + path.string() + ": " + e.what());
  }
  return from_json(j);
}

// Inputs ------------------------------------------------------------------

bool is_builtin(const std::string& name) {
  return name == "gaussian" || name == "gauss2d" || name == "one" || name.rfind("hermite:", 0) == 0 ||
         name.rfind("growth:", 0) == 0;
}

SampledFunction builtin(const std::string& name, const RunConfig& cfg) {
  const Grid base = cfg.base_grid();
  if (name == "gaussian") {
    auto f = gaussian_window(base);
    f.set_label("gaussian");
    return f;
  }
  if (name.rfind("hermite:", 0) == 0) {
    const int k = parse_index(name.substr(8), name);
    if (k > kMaxHermiteIndex) throw ConfigError("hermite index above " + std::to_string(kMaxHermiteIndex));
    if (base.dims() == 1) return hermite(k, base);
    return hermite_product(k, k, base);
  }
  if (cfg.d != 1) throw ConfigError("symbol builtins need d = 1");
  const Grid ps = phase_space_grid(base);
  if (name == "gauss2d") return gauss_symbol(ps, 0.0, 1.0);
  if (name == "one") return sample(ps, [](std::span<const double>) { return 1.0; }, "one");
  if (name.rfind("growth:", 0) == 0) {
    auto kv = parse_kv(name.substr(7));
    for (const auto& [k, v] : kv)
      if (k != "r" && k != "s" && k != "sigma") throw ConfigError("growth: unknown key '" + k + "'");
    const double r = kv.count("r") ? kv["r"] : 0.5;
    const double s = kv.count("s") ? kv["s"] : 2.0;
    const double sg = kv.count("sigma") ? kv["sigma"] : s;
    if (!(s > 0.0) || !(sg > 0.0)) throw ConfigError("growth: exponents must be positive");
    return sample(
        ps,
        [=](std::span<const double> v) {
          return std::exp(r * (std::pow(std::abs(v[0]), 1.0 / s) + std::pow(std::abs(v[1]), 1.0 / sg)));
        },
        name);
  }
  throw ConfigError("unknown builtin '" + name + "'");
}

SampledFunction load_input(const std::string& spec, const RunConfig& cfg) {
  const std::filesystem::path p(spec);
  if (std::filesystem::exists(p)) {
    try {
      if (p.extension() == ".json") {
        std::ifstream in(p);
        auto f = from_json(json::parse(in));
        if (f.label().empty()) f.set_label(p.stem().string());
        return f;
      }
      auto f = read_gsq_file(p);
      if (f.label().empty()) f.set_label(p.stem().string());
      return f;
    } catch (const std::exception& e) {
      throw ConfigError("cannot read " + spec + ": " + e.what());
    }
  }
  if (is_builtin(spec)) return builtin(spec, cfg);
  throw ConfigError("no such file or builtin: " + spec);
}

SampledFunction make_window(const Grid& grid, const RunConfig& cfg) {
  if (cfg.window == "gaussian") return gaussian_window(grid);
  const int k = parse_index(cfg.window.substr(8), "window");
  if (k > kMaxHermiteIndex) throw ConfigError("window index above " + std::to_string(kMaxHermiteIndex));
  if (grid.dims() == 1) return hermite(k, grid);
  if (grid.dims() == 2) return hermite_product(k, k, grid);
  throw ConfigError("hermite windows need a 1d or 2d grid");
}

std::filesystem::path output_path(const RunConfig& cfg, const std::string& name) {
  const std::filesystem::path p(name);
  return p.is_absolute() ? p : cfg.output_dir / p;
}

// Checks ------------------------------------------------------------------

json CheckReport::to_json() const {
  return {{"check", check}, {"max_dev", max_dev}, {"tolerance", tolerance}, {"pass", pass}, {"details", details}};
}

const std::vector<std::string>& check_names() {
  static const std::vector<std::string> names{"transfer", "sharp-hom", "stft-kernel", "covariance",
                                              "moyal",    "inversion", "m-bounds",    "kappa",
                                              "mixed-norm", "mollify", "trace"};
  return names;
}

CheckReport run_check(const std::string& name, const RunConfig& cfg) {
  cfg.validate();
  if (name == "transfer") return check_transfer(cfg);
  if (name == "sharp-hom") return check_sharp_hom(cfg);
  if (name == "stft-kernel") return check_stft_kernel(cfg);
  if (name == "covariance") return check_covariance(cfg);
  if (name == "moyal") return check_moyal(cfg);
  if (name == "inversion") return check_inversion(cfg);
  if (name == "m-bounds") return check_m_bounds(cfg);
  if (name == "kappa") return check_kappa(cfg);
  if (name == "mixed-norm") return check_mixed_norm(cfg);
  if (name == "mollify") return check_mollify(cfg);
  if (name == "trace") return check_trace(cfg);
  throw ConfigError("unknown check '" + name + "'");
}

// Entry point -------------------------------------------------------------

int run(int argc, char** argv) {
  CLI::App app{"Gelfand-Shilov symbol calculus toolkit"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::optional<int> d;
  std::optional<std::size_t> n, memory;
  std::optional<double> L, s, sigma, tolerance;
  std::optional<std::string> matrix, route, window, out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> cutoff;
  std::optional<unsigned> threads;
  app.add_option("--config", config_path, "JSON run configuration");
  app.add_option("--d", d, "base dimension (1 or 2)");
  app.add_option("--n", n, "nodes per axis (even)");
  app.add_option("--L", L, "half width of the base box");
  app.add_option("--s", s, "Gelfand-Shilov decay index");
  app.add_option("--sigma", sigma, "Gelfand-Shilov regularity index");
  app.add_option("--matrix", matrix, "quantization matrix: t=0.5 or row-major list");
  app.add_option("--route", route, "twisted product route: kernel or multiplier");
  app.add_option("--window", window, "gaussian or hermite:k");
  app.add_option("--seed", seed, "RNG seed");
  app.add_option("--out-dir", out_dir, "directory for relative output paths");
  app.add_option("--memory", memory, "memory ceiling in bytes");
  app.add_option("--cutoff", cutoff, "derivative cutoff for norms");
  app.add_option("--tolerance", tolerance, "override the check tolerance");
  app.add_option("--threads", threads, "worker threads (default GSQ_THREADS or all cores)");

  std::string gen_name, gen_out, gen_csv;
  auto* gen = app.add_subcommand("gen", "write a builtin input");
  gen->add_option("--builtin", gen_name, "builtin name")->required();
  gen->add_option("--out", gen_out, "output file (.gsq or .json)")->required();
  gen->add_option("--csv", gen_csv, "optional |f| CSV");

  std::string stft_in, stft_out = "stft";
  auto* stft_cmd = app.add_subcommand("stft", "short-time Fourier transform of an input");
  stft_cmd->add_option("--input", stft_in, "GSQ1 file or builtin")->required();
  stft_cmd->add_option("--out", stft_out, "output prefix");

  std::string q_sym, q_in, q_out = "op.gsq", q_kernel;
  auto* quant = app.add_subcommand("quantize", "apply Op_A(a) to a function");
  quant->add_option("--symbol", q_sym, "symbol file or builtin")->required();
  quant->add_option("--input", q_in, "function file or builtin")->required();
  quant->add_option("--out", q_out, "output file");
  quant->add_option("--kernel-out", q_kernel, "optional kernel file");

  std::string c_a, c_b, c_out = "compose.gsq";
  auto* comp = app.add_subcommand("compose", "twisted product a #_A b");
  comp->add_option("--a", c_a, "first symbol")->required();
  comp->add_option("--b", c_b, "second symbol")->required();
  comp->add_option("--out", c_out, "output file");

  std::string cl_sym;
  auto* cls = app.add_subcommand("classify", "STFT envelope verdict for a symbol");
  cls->add_option("--symbol", cl_sym, "symbol file or builtin")->required();

  std::string v_check, v_out;
  auto* ver = app.add_subcommand("verify", "run a named identity check");
  ver->add_option("--check", v_check, "check name")->required();
  ver->add_option("--out", v_out, "optional report file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitPass : kExitUsage;
  }

  try {
    RunConfig cfg = config_path.empty() ? RunConfig{} : RunConfig::load(config_path);
    if (d) cfg.d = *d;
    if (n) cfg.n = *n;
    if (L) cfg.L = *L;
    if (s) cfg.s = *s;
    if (sigma) cfg.sigma = *sigma;
    if (matrix) cfg.matrix = *matrix;
    if (route) cfg.route = *route;
    if (window) cfg.window = *window;
    if (seed) cfg.seed = *seed;
    if (out_dir) cfg.output_dir = *out_dir;
    if (memory) cfg.memory_bytes = *memory;
    if (cutoff) cfg.cutoff = *cutoff;
    if (tolerance) cfg.tolerance = *tolerance;
    cfg.validate();
    limits().max_bytes = cfg.memory_bytes;
    if (threads) limits().threads = *threads;

    if (gen->parsed()) return cmd_gen(cfg, gen_name, gen_out, gen_csv);
    if (stft_cmd->parsed()) return cmd_stft(cfg, stft_in, stft_out);
    if (quant->parsed()) return cmd_quantize(cfg, q_sym, q_in, q_out, q_kernel);
    if (comp->parsed()) return cmd_compose(cfg, c_a, c_b, c_out);
    if (cls->parsed()) return cmd_classify(cfg, cl_sym);
    if (ver->parsed()) return cmd_verify(cfg, v_check, v_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace gsq::cli
