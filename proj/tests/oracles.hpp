// SPDX-License-Identifier: Apache-2.0
// Independent numeric oracles used by tests; deliberately avoid the library's
// own closed forms.
#pragma once

#include <algorithm>
#include <cmath>

namespace oracles {

// Volume of {|x1 x2| < eps, |x_i| <= T} x [-Q,Q]^N by midpoint quadrature of
// the exact inner integral: Vol = 2^{2+N} Q^N * int_0^T min(T, eps/x) dx.
inline double quadrature_volume_m2(double eps, double T, int N, double Q, long long cells) {
  double h = T / static_cast<double>(cells);
  double acc = 0;
  for (long long i = 0; i < cells; ++i) {
    double x = (static_cast<double>(i) + 0.5) * h;
    acc += std::min(T, eps / x);
  }
  double inner = acc * h;
  return std::pow(2.0, 2 + N) * std::pow(Q, N) * inner;
}

}  // namespace oracles
