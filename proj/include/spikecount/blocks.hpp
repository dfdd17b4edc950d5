// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <numeric>
#include <vector>

#include "spikecount/rat.hpp"

namespace spikecount {

// Coordinate split of R^(Mcal+Ncal) into M x-blocks and N y-blocks.
struct BlockStructure {
  std::vector<int> m;  // x-block dimensions
  std::vector<int> n;  // y-block dimensions

  int M() const { return static_cast<int>(m.size()); }
  int N() const { return static_cast<int>(n.size()); }
  int x_dim() const { return std::accumulate(m.begin(), m.end(), 0); }
  int y_dim() const { return std::accumulate(n.begin(), n.end(), 0); }
  int dim() const { return x_dim() + y_dim(); }
  int x_off(int i) const { return std::accumulate(m.begin(), m.begin() + i, 0); }
  int y_off(int j) const { return x_dim() + std::accumulate(n.begin(), n.begin() + j, 0); }

  void validate() const {
    if (m.empty() || n.empty()) throw ValidationError("block structure needs x and y blocks");
    for (int d : m)
      if (d <= 0) throw ValidationError("x-block dimensions must be positive");
    for (int d : n)
      if (d <= 0) throw ValidationError("y-block dimensions must be positive");
  }

  // M scalar x-blocks plus one N-dimensional y-block: the layout the
  // linear-form lattices live in.
  static BlockStructure scalar_rows(int M, int N) {
    BlockStructure b;
    b.m.assign(M, 1);
    b.n.assign(1, N);
    return b;
  }
};

// Block weights; A = B + C is the total.
struct Weights {
  std::vector<Rat> beta, gamma;

  Rat B() const { return std::accumulate(beta.begin(), beta.end(), Rat(0)); }
  Rat C() const { return std::accumulate(gamma.begin(), gamma.end(), Rat(0)); }
  Rat A() const { return B() + C(); }
  bool all_integer() const {
    for (const Rat& w : beta)
      if (rat_den(w) != 1) return false;
    for (const Rat& w : gamma)
      if (rat_den(w) != 1) return false;
    return true;
  }
  static Weights canonical(int M, int N) {
    Weights w;
    w.beta.assign(M, Rat(1));
    w.gamma.assign(1, Rat(N));
    return w;
  }
};

// The subspace {x_i = 0 for i in zero_x, y_j = 0 for j in zero_y}; block
// indices are 0-based.  At least one block must be listed.
struct SubspaceC {
  std::vector<int> zero_x, zero_y;

  static SubspaceC y_zero(const BlockStructure& bs) {
    SubspaceC c;
    for (int j = 0; j < bs.N(); ++j) c.zero_y.push_back(j);
    return c;
  }
};

// Ambient coordinate indices pinned to zero by C.
inline std::vector<int> zeroed_coords(const BlockStructure& bs, const SubspaceC& c) {
  if (c.zero_x.empty() && c.zero_y.empty())
    throw ValidationError("subspace must pin at least one block");
  std::vector<int> out;
  for (int i : c.zero_x) {
    if (i < 0 || i >= bs.M()) throw ValidationError("bad x-block index in subspace");
    for (int t = 0; t < bs.m[i]; ++t) out.push_back(bs.x_off(i) + t);
  }
  for (int j : c.zero_y) {
    if (j < 0 || j >= bs.N()) throw ValidationError("bad y-block index in subspace");
    for (int t = 0; t < bs.n[j]; ++t) out.push_back(bs.y_off(j) + t);
  }
  return out;
}

}  // namespace spikecount
