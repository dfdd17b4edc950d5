// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "spikecount/rat.hpp"

namespace spikecount {

// g = gcd(a,b) >= 0 with s*a + t*b = g.
inline Int ext_gcd(Int a, Int b, Int& s, Int& t) {
  Int s0(1), s1(0), t0(0), t1(1);
  while (b != 0) {
    Int q = a / b;  // truncated; fine for the invariant chain
    Int r = a - q * b;
    a = b;
    b = r;
    Int s2 = s0 - q * s1, t2 = t0 - q * t1;
    s0 = s1;
    s1 = s2;
    t0 = t1;
    t1 = t2;
  }
  if (a < 0) {
    a = -a;
    s0 = -s0;
    t0 = -t0;
  }
  s = s0;
  t = t0;
  return a;
}

// Basis of {u in Z^n : A u = 0} for an integer matrix A (r rows, n cols).
// Row-echelon reduction over Z of [A^T | I_n]: rows whose A^T-part vanishes
// generate exactly the kernel lattice.
inline std::vector<std::vector<Int>> integer_kernel(const std::vector<std::vector<Int>>& A) {
  size_t r = A.size();
  size_t n = r == 0 ? 0 : A[0].size();
  if (n == 0) return {};
  // G: n rows, r + n cols; row j = (column j of A, e_j)
  std::vector<std::vector<Int>> G(n, std::vector<Int>(r + n, Int(0)));
  for (size_t j = 0; j < n; ++j) {
    for (size_t i = 0; i < r; ++i) G[j][i] = A[i][j];
    G[j][r + j] = 1;
  }
  size_t cur = 0;
  for (size_t col = 0; col < r && cur < n; ++col) {
    size_t piv = cur;
    while (piv < n && G[piv][col] == 0) ++piv;
    if (piv == n) continue;
    std::swap(G[cur], G[piv]);
    for (size_t k = cur + 1; k < n; ++k) {
      if (G[k][col] == 0) continue;
      Int s, t;
      Int g = ext_gcd(G[cur][col], G[k][col], s, t);
      Int a = G[cur][col] / g, b = G[k][col] / g;
      for (size_t c2 = 0; c2 < r + n; ++c2) {
        Int x = G[cur][c2], y = G[k][c2];
        G[cur][c2] = s * x + t * y;  // unimodular: det = s*a + t*b = 1
        G[k][c2] = a * y - b * x;
      }
    }
    ++cur;
  }
  std::vector<std::vector<Int>> kernel;
  for (size_t j = 0; j < n; ++j) {
    bool left_zero = true;
    for (size_t i = 0; i < r && left_zero; ++i) left_zero = G[j][i] == 0;
    if (!left_zero) continue;
    bool all_zero = true;
    std::vector<Int> u(n);
    for (size_t c2 = 0; c2 < n; ++c2) {
      u[c2] = G[j][r + c2];
      if (u[c2] != 0) all_zero = false;
    }
    if (!all_zero) kernel.push_back(std::move(u));
  }
  return kernel;
}

}  // namespace spikecount
