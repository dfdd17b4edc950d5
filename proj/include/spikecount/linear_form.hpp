// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <sstream>
#include <vector>

#include "spikecount/entry.hpp"

namespace spikecount {

// M real linear forms in N integer variables, entries exact.  The double
// enclosures of the entries are cached; exact and mpfr evaluations are
// computed on demand (they sit on the rare escalation path).
struct LinearFormSystem {
  int M = 0, N = 0;
  std::vector<std::vector<EntryExpr>> rows;  // M x N
  std::vector<std::vector<DItv>> dentries;   // double enclosures, M x N

  const QuadLin& entry(int i, int j) const { return rows[i][j].value; }
};

inline LinearFormSystem make_system(std::vector<std::vector<EntryExpr>> rows) {
  LinearFormSystem sys;
  if (rows.empty() || rows[0].empty()) throw ValidationError("matrix must be nonempty");
  sys.M = static_cast<int>(rows.size());
  sys.N = static_cast<int>(rows[0].size());
  for (const auto& r : rows)
    if (static_cast<int>(r.size()) != sys.N)
      throw ValidationError("matrix rows must have equal length");
  sys.rows = std::move(rows);
  sys.dentries.resize(sys.M);
  for (int i = 0; i < sys.M; ++i)
    for (int j = 0; j < sys.N; ++j) sys.dentries[i].push_back(sys.rows[i][j].value.eval_d());
  return sys;
}

// One row per line, entries separated by whitespace, '#' starts a comment.
inline LinearFormSystem parse_matrix(const std::string& text) {
  std::vector<std::vector<EntryExpr>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (size_t h = line.find('#'); h != std::string::npos) line.erase(h);
    std::istringstream ls(line);
    std::vector<EntryExpr> row;
    std::string tok;
    while (ls >> tok) row.push_back(parse_entry(tok));
    if (!row.empty()) rows.push_back(std::move(row));
  }
  return make_system(std::move(rows));
}

inline LinearFormSystem system_from_strings(const std::vector<std::vector<std::string>>& cells) {
  std::vector<std::vector<EntryExpr>> rows;
  for (const auto& r : cells) {
    std::vector<EntryExpr> row;
    for (const auto& c : r) row.push_back(parse_entry(c));
    rows.push_back(std::move(row));
  }
  return make_system(std::move(rows));
}

// L_i(q) at the three rigor levels.
inline DItv row_value_d(const LinearFormSystem& sys, int i, std::span<const long long> q) {
  DItv acc{0.0, 0.0};
  for (int j = 0; j < sys.N; ++j) {
    if (q[j] == 0) continue;
    acc = acc + sys.dentries[i][j].scale_long(q[j]);
  }
  return acc;
}

inline Ival row_value_ival(const LinearFormSystem& sys, int i, std::span<const long long> q,
                           mpfr_prec_t p) {
  Ival acc = Ival::of_long(0, p);
  for (int j = 0; j < sys.N; ++j) {
    if (q[j] == 0) continue;
    acc = Ival::add(acc, Ival::mul_rat(sys.entry(i, j).eval(p), Rat(q[j]), p), p);
  }
  return acc;
}

inline QuadLin row_value_exact(const LinearFormSystem& sys, int i, std::span<const long long> q) {
  QuadLin acc;
  for (int j = 0; j < sys.N; ++j) {
    if (q[j] == 0) continue;
    acc += sys.entry(i, j).scaled(Rat(q[j]));
  }
  return acc;
}

}  // namespace spikecount
