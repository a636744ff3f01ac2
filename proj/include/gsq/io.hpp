#pragma once

// GSQ1 binary arrays:
//
//   8 bytes   magic "GSQARR01"
//   u32       d
//   u32 x d   n per axis
//   f64 x d   L per axis
//   f64 x 2N  values as interleaved (re, im), row-major
//
// All fields little-endian.

#include <filesystem>
#include <iosfwd>
#include <string>

#include <json.hpp>

#include "gsq/grid.hpp"

namespace gsq {

inline constexpr char kGsqMagic[8] = {'G', 'S', 'Q', 'A', 'R', 'R', '0', '1'};

void write_gsq(std::ostream& out, const SampledFunction& f);
SampledFunction read_gsq(std::istream& in);

void write_gsq_file(const std::filesystem::path& path, const SampledFunction& f);
SampledFunction read_gsq_file(const std::filesystem::path& path);

/// {"grid": {"n": [...], "L": [...]}, "label": ..., "re": [...], "im": [...]}.
nlohmann::json to_json(const SampledFunction& f);
SampledFunction from_json(const nlohmann::json& j);

/// One row per node: coordinates, then |f|.
void write_abs_csv(std::ostream& out, const SampledFunction& f,
                   const std::vector<std::string>& axis_names);

}  // namespace gsq
