// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "spikecount/entry.hpp"
#include "spikecount/lattice.hpp"
#include "spikecount/region.hpp"

namespace spikecount {

// Flat `key = value` experiment description: one pair per line, '#' starts a
// comment, lists are comma-separated, and rational grids may be given
// geometrically as start:stop:factor (endpoints inclusive up to the exact
// rational step).  Paths are resolved relative to the config file.
struct ExperimentConfig {
  std::string matrix_path;  // resolved; empty when the config has no matrix
  RegionFlavor flavor = RegionFlavor::supnorm;
  std::vector<Rat> eps_grid;
  std::vector<Rat> T_grid;
  std::vector<long long> Q_list;
  long precision_bits = kDefaultPrec;
  std::size_t enumeration_budget = kDefaultNodeBudget;
  std::uint64_t seed = 1;
  std::string output_path;  // empty means stdout unless the CLI overrides

  // partition inspection
  int M = 0;  // 0 means "take M from the matrix"
  std::vector<Rat> beta;

  // affine-slice checks
  std::vector<Rat> delta_list;
  std::vector<std::string> offset_entries;
  std::string check_mode = "lemma8";  // or lemma7
  double eps_prime = 1.0;

  std::uint64_t config_hash = 0;  // FNV-1a of the raw config bytes
};

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

namespace detail {

inline std::string trim(std::string s) {
  const char* ws = " \t\r\n";
  const auto a = s.find_first_not_of(ws);
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(ws);
  return s.substr(a, b - a + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(trim(cur));
  if (!s.empty() && s.back() == sep) out.push_back("");
  return out;
}

inline Rat parse_rat_token(const std::string& tok) {
  const EntryExpr e = parse_entry(tok);
  if (!e.value.is_rational()) throw ParseError("expected a rational value, got '" + tok + "'");
  return e.value.rational();
}

// Comma list of rationals, or a geometric ramp start:stop:factor walked with
// exact rational steps, endpoints inclusive.
inline std::vector<Rat> parse_rat_grid(const std::string& value) {
  std::vector<Rat> out;
  if (value.find(':') != std::string::npos) {
    const auto parts = split(value, ':');
    if (parts.size() != 3) throw ParseError("geometric grid must be start:stop:factor");
    const Rat start = parse_rat_token(parts[0]);
    const Rat stop = parse_rat_token(parts[1]);
    const Rat factor = parse_rat_token(parts[2]);
    if (!(start > 0) || !(stop > 0)) throw ParseError("grid endpoints must be positive");
    if (!(factor > 0) || factor == 1) throw ParseError("grid factor must be positive and != 1");
    const bool descending = factor < 1;
    if (descending ? stop > start : stop < start)
      throw ParseError("grid endpoints disagree with the factor direction");
    for (Rat v = start; descending ? v >= stop : v <= stop; v *= factor) {
      out.push_back(v);
      if (out.size() > 10000) throw ParseError("geometric grid longer than 10000 points");
    }
  } else {
    for (const auto& tok : split(value, ','))
      if (!tok.empty()) out.push_back(parse_rat_token(tok));
  }
  if (out.empty()) throw ParseError("empty grid");
  return out;
}

inline std::vector<long long> parse_int_list(const std::string& value) {
  std::vector<long long> out;
  for (const auto& tok : split(value, ',')) {
    if (tok.empty()) continue;
    std::size_t used = 0;
    long long v = 0;
    try {
      v = std::stoll(tok, &used);
    } catch (const std::exception&) {
      throw ParseError("bad integer '" + tok + "'");
    }
    if (used != tok.size()) throw ParseError("bad integer '" + tok + "'");
    out.push_back(v);
  }
  if (out.empty()) throw ParseError("empty integer list");
  return out;
}

inline long long parse_int_scalar(const std::string& value) {
  const auto list = parse_int_list(value);
  if (list.size() != 1) throw ParseError("expected a single integer, got '" + value + "'");
  return list[0];
}

inline double parse_double_scalar(const std::string& value) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(value, &used);
  } catch (const std::exception&) {
    throw ParseError("bad number '" + value + "'");
  }
  if (used != value.size()) throw ParseError("bad number '" + value + "'");
  return v;
}

}  // namespace detail

inline ExperimentConfig parse_config(const std::string& text, const std::string& base_dir = ".") {
  ExperimentConfig cfg;
  cfg.config_hash = fnv1a64(text);
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ParseError("line " + std::to_string(lineno) + ": empty key or value");

    if (key == "matrix") {
      std::filesystem::path p(value);
      if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
      cfg.matrix_path = p.string();
    } else if (key == "flavor") {
      if (value == "supnorm")
        cfg.flavor = RegionFlavor::supnorm;
      else if (value == "euclidean")
        cfg.flavor = RegionFlavor::euclidean;
      else
        throw ParseError("flavor must be supnorm or euclidean");
    } else if (key == "eps") {
      cfg.eps_grid = detail::parse_rat_grid(value);
    } else if (key == "T") {
      cfg.T_grid = detail::parse_rat_grid(value);
    } else if (key == "Q") {
      cfg.Q_list = detail::parse_int_list(value);
    } else if (key == "delta") {
      cfg.delta_list = detail::parse_rat_grid(value);
    } else if (key == "beta") {
      cfg.beta = detail::parse_rat_grid(value);
    } else if (key == "offset") {
      for (const auto& tok : detail::split(value, ','))
        if (!tok.empty()) cfg.offset_entries.push_back(tok);
    } else if (key == "mode") {
      if (value != "lemma7" && value != "lemma8")
        throw ParseError("mode must be lemma7 or lemma8");
      cfg.check_mode = value;
    } else if (key == "eps_prime") {
      cfg.eps_prime = detail::parse_double_scalar(value);
    } else if (key == "M") {
      cfg.M = static_cast<int>(detail::parse_int_scalar(value));
    } else if (key == "precision") {
      cfg.precision_bits = detail::parse_int_scalar(value);
      if (cfg.precision_bits < 16 || cfg.precision_bits > 1 << 20)
        throw ParseError("precision out of range");
    } else if (key == "budget") {
      const long long b = detail::parse_int_scalar(value);
      if (b < 1) throw ParseError("budget must be positive");
      cfg.enumeration_budget = static_cast<std::size_t>(b);
    } else if (key == "seed") {
      cfg.seed = static_cast<std::uint64_t>(detail::parse_int_scalar(value));
    } else if (key == "out") {
      std::filesystem::path p(value);
      if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
      cfg.output_path = p.string();
    } else {
      throw ParseError("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
  }
  if (!cfg.matrix_path.empty() && !std::filesystem::exists(cfg.matrix_path))
    throw ValidationError("matrix file not found: " + cfg.matrix_path);
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  const std::string text = read_text_file(path);
  const std::string dir = std::filesystem::path(path).parent_path().string();
  return parse_config(text, dir.empty() ? "." : dir);
}

inline LinearFormSystem load_matrix(const ExperimentConfig& cfg) {
  if (cfg.matrix_path.empty()) throw ValidationError("config has no matrix path");
  return parse_matrix(read_text_file(cfg.matrix_path));
}

}  // namespace spikecount
