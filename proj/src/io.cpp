#include "gsq/io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "gsq/limits.hpp"

namespace gsq {

namespace {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <class T>
T byteswap_if_big(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(v);
    std::reverse(bytes.begin(), bytes.end());
    return std::bit_cast<T>(bytes);
  }
  return v;
}

template <class T>
void put(std::ostream& out, T v) {
  v = byteswap_if_big(v);
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw std::runtime_error("GSQ1: truncated input");
  return byteswap_if_big(v);
}

}  // namespace

void write_gsq(std::ostream& out, const SampledFunction& f) {
  const Grid& g = f.grid();
  out.write(kGsqMagic, sizeof(kGsqMagic));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(g.dims()));
  for (const auto& a : g.axes()) put<std::uint32_t>(out, static_cast<std::uint32_t>(a.n));
  for (const auto& a : g.axes()) put<double>(out, a.half_width);
  for (const auto& v : f.values()) {
    put<double>(out, v.real());
    put<double>(out, v.imag());
  }
  if (!out) throw std::runtime_error("GSQ1: write failed");
}

SampledFunction read_gsq(std::istream& in) {
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kGsqMagic, sizeof(magic)) != 0)
    throw std::runtime_error("GSQ1: bad magic");
  const auto d = get<std::uint32_t>(in);
  if (d == 0 || d > 8) throw std::runtime_error("GSQ1: unsupported dimension " + std::to_string(d));
  std::vector<Axis> axes(d);
  for (auto& a : axes) a.n = get<std::uint32_t>(in);
  for (auto& a : axes) a.half_width = get<double>(in);
  Grid grid(std::move(axes));
  require_complex_capacity(grid.size(), "GSQ1 read");
  std::vector<cplx> values(grid.size());
  for (auto& v : values) {
    const double re = get<double>(in);
    const double im = get<double>(in);
    v = {re, im};
  }
  return SampledFunction(std::move(grid), std::move(values));
}

void write_gsq_file(const std::filesystem::path& path, const SampledFunction& f) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_gsq(out, f);
}

SampledFunction read_gsq_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  auto f = read_gsq(in);
  f.set_label(path.filename().string());
  return f;
}

nlohmann::json to_json(const SampledFunction& f) {
  nlohmann::json j;
  std::vector<std::size_t> n;
  std::vector<double> L;
  for (const auto& a : f.grid().axes()) {
    n.push_back(a.n);
    L.push_back(a.half_width);
  }
  j["grid"] = {{"n", n}, {"L", L}};
  j["label"] = f.label();
  std::vector<double> re, im;
  re.reserve(f.size());
  im.reserve(f.size());
  for (const auto& v : f.values()) {
    re.push_back(v.real());
    im.push_back(v.imag());
  }
  j["re"] = std::move(re);
  j["im"] = std::move(im);
  return j;
}

SampledFunction from_json(const nlohmann::json& j) {
  const auto n = j.at("grid").at("n").get<std::vector<std::size_t>>();
  const auto L = j.at("grid").at("L").get<std::vector<double>>();
  if (n.size() != L.size()) throw std::invalid_argument("grid n/L length mismatch");
  std::vector<Axis> axes;
  for (std::size_t i = 0; i < n.size(); ++i) axes.push_back(Axis{n[i], L[i]});
  const auto re = j.at("re").get<std::vector<double>>();
  const auto im = j.at("im").get<std::vector<double>>();
  if (re.size() != im.size()) throw std::invalid_argument("re/im length mismatch");
  std::vector<cplx> values(re.size());
  for (std::size_t i = 0; i < re.size(); ++i) values[i] = {re[i], im[i]};
  return SampledFunction(Grid(std::move(axes)), std::move(values), j.value("label", std::string{}));
}

void write_abs_csv(std::ostream& out, const SampledFunction& f, const std::vector<std::string>& axis_names) {
  const Grid& g = f.grid();
  for (std::size_t i = 0; i < g.dims(); ++i)
    out << (i < axis_names.size() ? axis_names[i] : "x" + std::to_string(i)) << ',';
  out << "abs\n";
  std::vector<double> x(g.dims());
  out << std::setprecision(17);
  for (std::size_t k = 0; k < f.size(); ++k) {
    g.coords(k, x);
    for (double c : x) out << c << ',';
    out << std::abs(f[k]) << '\n';
  }
}

}  // namespace gsq
