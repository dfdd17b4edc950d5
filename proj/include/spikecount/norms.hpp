// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "spikecount/quadlin.hpp"

namespace spikecount {

// ||x|| = min_n |x - n| in [0, 1/2].  The subtraction x - rint(x) is exact in
// mpfr (the trailing bits survive), so a dyadic tie comes out as exactly 1/2.
inline Real dist_to_nearest_int(const Real& x) {
  Real n(x.prec());
  mpfr_rint(n.raw(), x.raw(), MPFR_RNDN);
  return Real::abs(Real::sub(x, n, x.prec(), MPFR_RNDN), x.prec());
}

inline Real euclidean_norm(const std::vector<Real>& v, mpfr_prec_t p) {
  Real acc(p);
  for (const Real& c : v) {
    Real t(p);
    mpfr_hypot(t.raw(), acc.raw(), c.raw(), MPFR_RNDN);
    acc = t;
  }
  return acc;
}

// prod_i |block_i|_2 ^ weight_i
inline Real multiplicative_norm(const std::vector<std::vector<Real>>& blocks,
                                const std::vector<Rat>& weights,
                                mpfr_prec_t p = kDefaultPrec) {
  if (blocks.size() != weights.size())
    throw ValidationError("multiplicative_norm: blocks/weights size mismatch");
  Real acc = Real::from_rat(Rat(1), p);
  for (size_t i = 0; i < blocks.size(); ++i) {
    Real nrm = euclidean_norm(blocks[i], p);
    Real w = Real::from_rat(weights[i], p);
    acc = Real::mul(acc, Real::pow(nrm, w, p), p);
  }
  return acc;
}

// (prod_j Q_j^{gamma_j})^{1/C} with C = sum gamma_j.
inline Real geometric_mean_Q(const std::vector<Rat>& Qs, const std::vector<Rat>& gamma,
                             mpfr_prec_t p = kDefaultPrec) {
  if (Qs.empty() || Qs.size() != gamma.size())
    throw ValidationError("geometric_mean_Q: bad block lists");
  Rat C(0);
  for (const Rat& g : gamma) {
    if (g <= 0) throw ValidationError("geometric_mean_Q: weights must be positive");
    C += g;
  }
  Real acc(p);
  mpfr_set_zero(acc.raw(), 1);
  for (size_t j = 0; j < Qs.size(); ++j) {
    if (Qs[j] <= 0) throw ValidationError("geometric_mean_Q: Q_j must be positive");
    Real lq = Real::log(Real::from_rat(Qs[j], p), p);
    acc = Real::add(acc, Real::mul_rat(lq, gamma[j], p), p);
  }
  return Real::exp(Real::mul_rat(acc, Rat(1) / C, p), p);
}

}  // namespace spikecount
