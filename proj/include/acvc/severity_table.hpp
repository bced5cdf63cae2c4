/* Copyright 2026 The ACVC Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#ifndef ACVC_SEVERITY_TABLE_HPP_
#define ACVC_SEVERITY_TABLE_HPP_

#include <array>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "acvc/corruption_kind.hpp"
#include "acvc/errors.hpp"
#include "acvc/fourier.hpp"

namespace acvc {

using ParamList = std::vector<std::pair<std::string, double>>;

/// Per-kind, per-level corruption parameters.
///
/// Text form, one entry per line:
///
///     kind level param=value [param=value ...]
///
/// Values use the shortest decimal that round-trips to the same double.
/// Blank lines and lines starting with '#' are ignored when parsing.
class SeverityTable {
 public:
  void set(CorruptionKind kind, int level, ParamList params) {
    check_level(level);
    entries_[kind][static_cast<std::size_t>(level - 1)] = std::move(params);
  }

  bool has(CorruptionKind kind) const { return entries_.contains(kind); }

  const ParamList& params(CorruptionKind kind, int level) const {
    check_level(level);
    auto it = entries_.find(kind);
    if (it == entries_.end())
      throw DomainError("severity table has no entry for '" +
                        std::string(name_of(kind)) + "'");
    return it->second[static_cast<std::size_t>(level - 1)];
  }

  double param(CorruptionKind kind, int level, std::string_view name) const {
    for (const auto& [key, value] : params(kind, level))
      if (key == name) return value;
    throw DomainError("severity table entry '" + std::string(name_of(kind)) + " " +
                      std::to_string(level) + "' lacks parameter '" +
                      std::string(name) + "'");
  }

  // Every photometric kind needs all five levels; Fourier rows, when
  // present, must equal the compiled-in constants.
  void validate() const {
    for (int i = 0; i < kImageNetCKindCount; ++i) {
      const auto kind = static_cast<CorruptionKind>(i);
      if (!has(kind))
        throw DomainError("severity table is missing kind '" +
                          std::string(name_of(kind)) + "'");
      for (int level = 1; level <= 5; ++level)
        if (params(kind, level).empty())
          throw DomainError("severity table is missing '" +
                            std::string(name_of(kind)) + " " +
                            std::to_string(level) + "'");
    }
    for (int level = 1; level <= 5; ++level) {
      const FourierSeverity fs = fourier_severity(level);
      check_fixed(CorruptionKind::phase_scaling, level, "alpha", fs.alpha);
      check_fixed(CorruptionKind::constant_amplitude, level, "beta", fs.beta);
      check_fixed(CorruptionKind::high_pass, level, "d_fraction", fs.d_fraction);
    }
  }

  std::string serialize() const {
    std::string out;
    for (const auto& [kind, levels] : entries_)
      for (int level = 1; level <= 5; ++level) {
        const ParamList& ps = levels[static_cast<std::size_t>(level - 1)];
        if (ps.empty()) continue;
        out += name_of(kind);
        out += ' ';
        out += std::to_string(level);
        for (const auto& [key, value] : ps) {
          out += ' ';
          out += key;
          out += '=';
          out += format_number(value);
        }
        out += '\n';
      }
    return out;
  }

  static SeverityTable parse(std::string_view text) {
    SeverityTable table;
    std::istringstream in{std::string(text)};
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      std::istringstream fields(line);
      std::string kind_name;
      if (!(fields >> kind_name) || kind_name[0] == '#') continue;
      const auto where = "severity table line " + std::to_string(line_no) + ": ";
      auto kind = try_parse_kind(kind_name);
      if (!kind) throw DomainError(where + "unknown kind '" + kind_name + "'");
      int level = 0;
      if (!(fields >> level) || level < 1 || level > 5)
        throw DomainError(where + "level must be in 1..5");
      ParamList params;
      std::string token;
      while (fields >> token) {
        const auto eq = token.find('=');
        if (eq == std::string::npos || eq == 0)
          throw DomainError(where + "expected param=value, got '" + token + "'");
        params.emplace_back(token.substr(0, eq), parse_number(token.substr(eq + 1), where));
      }
      if (params.empty()) throw DomainError(where + "no parameters");
      table.set(*kind, level, std::move(params));
    }
    table.validate();
    return table;
  }

  static std::string format_number(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return {buf, res.ptr};
  }

 private:
  static double parse_number(const std::string& s, const std::string& where) {
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
      throw DomainError(where + "bad number '" + s + "'");
    return v;
  }

  void check_fixed(CorruptionKind kind, int level, std::string_view key,
                   double expected) const {
    if (!has(kind)) return;
    const ParamList& ps = params(kind, level);
    for (const auto& [k, v] : ps)
      if (k == key && v == expected) return;
    throw DomainError("Fourier severities are fixed: '" + std::string(name_of(kind)) +
                      " " + std::to_string(level) + "' must have " + std::string(key) +
                      "=" + format_number(expected));
  }

  std::map<CorruptionKind, std::array<ParamList, 5>> entries_;
};

/// The shipped parameterisation. data/severity_table.txt is this table
/// serialised; a unit test keeps the two identical.
inline SeverityTable default_severity_table() {
  using K = CorruptionKind;
  SeverityTable t;
  auto rows = [&t](K kind, std::array<ParamList, 5> levels) {
    for (int l = 1; l <= 5; ++l) t.set(kind, l, levels[static_cast<std::size_t>(l - 1)]);
  };
  // Weather
  rows(K::fog, {{{{"intensity", 0.2}, {"decay", 3}},
                 {{"intensity", 0.5}, {"decay", 3}},
                 {{"intensity", 0.75}, {"decay", 2.5}},
                 {{"intensity", 1}, {"decay", 2}},
                 {{"intensity", 1.5}, {"decay", 1.75}}}});
  rows(K::snow,
       {{{{"loc", 0.1}, {"scale", 0.2}, {"zoom", 1}, {"threshold", 0.6}, {"length", 5}, {"blend", 0.95}},
         {{"loc", 0.1}, {"scale", 0.2}, {"zoom", 1}, {"threshold", 0.5}, {"length", 6}, {"blend", 0.9}},
         {{"loc", 0.15}, {"scale", 0.3}, {"zoom", 1.75}, {"threshold", 0.55}, {"length", 6}, {"blend", 0.9}},
         {{"loc", 0.25}, {"scale", 0.3}, {"zoom", 2.25}, {"threshold", 0.6}, {"length", 7}, {"blend", 0.85}},
         {{"loc", 0.3}, {"scale", 0.3}, {"zoom", 1.25}, {"threshold", 0.65}, {"length", 8}, {"blend", 0.8}}}});
  rows(K::frost, {{{{"image_weight", 1}, {"frost_weight", 0.3}},
                   {{"image_weight", 0.85}, {"frost_weight", 0.45}},
                   {{"image_weight", 0.75}, {"frost_weight", 0.55}},
                   {{"image_weight", 0.7}, {"frost_weight", 0.6}},
                   {{"image_weight", 0.6}, {"frost_weight", 0.7}}}});
  rows(K::spatter,
       {{{{"sigma", 2}, {"threshold", 1.6}, {"intensity", 0.5}, {"mud", 0}},
         {{"sigma", 1.5}, {"threshold", 1.3}, {"intensity", 0.55}, {"mud", 0}},
         {{"sigma", 1.5}, {"threshold", 1}, {"intensity", 0.6}, {"mud", 0}},
         {{"sigma", 1}, {"threshold", 0.8}, {"intensity", 0.7}, {"mud", 0}},
         {{"sigma", 1}, {"threshold", 0.6}, {"intensity", 0.85}, {"mud", 0}}}});
  // Blur
  rows(K::gaussian_blur, {{{{"sigma", 0.5}}, {{"sigma", 0.75}}, {{"sigma", 1}},
                           {{"sigma", 1.25}}, {{"sigma", 1.5}}}});
  // Below sigma ~0.7 the unsmoothed shuffle dominates and level 1 would
  // distort more than level 2.
  rows(K::glass_blur,
       {{{{"sigma", 0.7}, {"max_delta", 1}, {"iterations", 1}},
         {{"sigma", 0.75}, {"max_delta", 1}, {"iterations", 2}},
         {{"sigma", 0.8}, {"max_delta", 2}, {"iterations", 1}},
         {{"sigma", 0.9}, {"max_delta", 2}, {"iterations", 2}},
         {{"sigma", 0.95}, {"max_delta", 2}, {"iterations", 3}}}});
  rows(K::motion_blur, {{{{"length", 3}, {"sigma", 1}},
                         {{"length", 5}, {"sigma", 1.5}},
                         {{"length", 7}, {"sigma", 2}},
                         {{"length", 9}, {"sigma", 2.5}},
                         {{"length", 11}, {"sigma", 3}}}});
  rows(K::defocus_blur, {{{{"radius", 1}, {"alias_sigma", 0.5}},
                          {{"radius", 1.5}, {"alias_sigma", 0.5}},
                          {{"radius", 2}, {"alias_sigma", 0.5}},
                          {{"radius", 2.5}, {"alias_sigma", 0.5}},
                          {{"radius", 3}, {"alias_sigma", 0.5}}}});
  rows(K::zoom_blur, {{{{"max_zoom", 1.06}, {"copies", 3}},
                       {{"max_zoom", 1.11}, {"copies", 4}},
                       {{"max_zoom", 1.16}, {"copies", 5}},
                       {{"max_zoom", 1.21}, {"copies", 6}},
                       {{"max_zoom", 1.26}, {"copies", 7}}}});
  // Noise
  rows(K::shot_noise, {{{{"photons", 250}}, {{"photons", 100}}, {{"photons", 50}},
                        {{"photons", 30}}, {{"photons", 20}}}});
  rows(K::impulse_noise, {{{{"amount", 0.02}}, {{"amount", 0.04}}, {{"amount", 0.06}},
                           {{"amount", 0.09}}, {{"amount", 0.12}}}});
  rows(K::gaussian_noise, {{{{"sigma", 0.04}}, {{"sigma", 0.06}}, {{"sigma", 0.08}},
                            {{"sigma", 0.1}}, {{"sigma", 0.12}}}});
  rows(K::speckle_noise, {{{{"sigma", 0.1}}, {{"sigma", 0.15}}, {{"sigma", 0.2}},
                           {{"sigma", 0.3}}, {{"sigma", 0.4}}}});
  // Digital
  rows(K::jpeg_compression, {{{{"quality", 60}}, {{"quality", 40}}, {{"quality", 25}},
                              {{"quality", 15}}, {{"quality", 8}}}});
  // Factors avoid block sizes that tile 32 exactly; an aligned grid
  // reproduces blocky content losslessly.
  rows(K::pixelate, {{{{"factor", 0.9}}, {{"factor", 0.72}}, {{"factor", 0.53}},
                      {{"factor", 0.47}}, {{"factor", 0.31}}}});
  rows(K::elastic, {{{{"alpha", 0.75}, {"sigma", 2.5}},
                     {{"alpha", 1.25}, {"sigma", 2.5}},
                     {{"alpha", 1.75}, {"sigma", 2.5}},
                     {{"alpha", 2.25}, {"sigma", 2.5}},
                     {{"alpha", 2.75}, {"sigma", 2.5}}}});
  rows(K::saturate, {{{{"factor", 1.5}}, {{"factor", 2}}, {{"factor", 3}},
                      {{"factor", 4}}, {{"factor", 5}}}});
  rows(K::brightness, {{{{"delta", 0.1}}, {{"delta", 0.2}}, {{"delta", 0.3}},
                        {{"delta", 0.4}}, {{"delta", 0.5}}}});
  rows(K::contrast, {{{{"factor", 0.75}}, {{"factor", 0.5}}, {{"factor", 0.4}},
                      {{"factor", 0.3}}, {{"factor", 0.15}}}});
  // Fourier: fixed, exported for reference.
  for (int l = 1; l <= 5; ++l) {
    const FourierSeverity fs = fourier_severity(l);
    t.set(K::phase_scaling, l, {{"alpha", fs.alpha}});
    t.set(K::constant_amplitude, l, {{"beta", fs.beta}});
    t.set(K::high_pass, l, {{"d_fraction", fs.d_fraction}});
  }
  return t;
}

inline SeverityTable load_severity_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read severity table '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return SeverityTable::parse(buffer.str());
}

/// Resolution order: explicit path, then $CORRUPTOR_SEVERITY_TABLE, then the
/// repository fixture, then the compiled-in default.
inline SeverityTable resolve_severity_table(const std::string& override_path = {}) {
  if (!override_path.empty()) return load_severity_table(override_path);
  if (const char* env = std::getenv("CORRUPTOR_SEVERITY_TABLE"); env && *env)
    return load_severity_table(env);
#ifdef ACVC_DEFAULT_SEVERITY_TABLE
  if (std::filesystem::exists(ACVC_DEFAULT_SEVERITY_TABLE))
    return load_severity_table(ACVC_DEFAULT_SEVERITY_TABLE);
#endif
  return default_severity_table();
}

}  // namespace acvc

#endif  // ACVC_SEVERITY_TABLE_HPP_
