// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <boost/multiprecision/gmp.hpp>

#include "spikecount/errors.hpp"

namespace spikecount {

using Int = boost::multiprecision::mpz_int;
using Rat = boost::multiprecision::mpq_rational;

inline Int rat_num(const Rat& r) { return Int(boost::multiprecision::numerator(r)); }
inline Int rat_den(const Rat& r) { return Int(boost::multiprecision::denominator(r)); }

// floor(a/b) for b > 0 in the canonical mpq form (denominator positive).
inline Int floor_rat(const Rat& r) {
  Int n = rat_num(r), d = rat_den(r);
  Int q = n / d;           // truncates toward zero
  if (n < 0 && q * d != n) q -= 1;
  return q;
}

inline Int ceil_rat(const Rat& r) { return -floor_rat(-r); }

// Nearest integer; *tie set when r is exactly halfway (then the lower
// neighbour is returned).
inline Int round_rat(const Rat& r, bool* tie = nullptr) {
  Int f = floor_rat(r);
  Rat frac = r - Rat(f);
  if (tie) *tie = false;
  if (frac < Rat(1, 2)) return f;
  if (frac > Rat(1, 2)) return f + 1;
  if (tie) *tie = true;
  return f;
}

// max over the half-open distance classes: ||r|| = min_n |r - n| <= 1/2,
// with the exact value 1/2 preserved on ties.
inline Rat dist_to_nearest_int(const Rat& r) {
  bool tie = false;
  Int n = round_rat(r, &tie);
  if (tie) return Rat(1, 2);
  Rat d = r - Rat(n);
  return d < 0 ? Rat(-d) : d;
}

inline Rat pow_rat(const Rat& base, long e) {
  if (e == 0) return Rat(1);
  Rat b = e > 0 ? base : Rat(1) / base;
  unsigned long k = static_cast<unsigned long>(e > 0 ? e : -e);
  Rat acc(1);
  while (k) {
    if (k & 1) acc *= b;
    b *= b;
    k >>= 1;
  }
  return acc;
}

}  // namespace spikecount
