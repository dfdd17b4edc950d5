// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <numeric>

#include "spikecount/errors.hpp"
#include "spikecount/interval.hpp"

namespace spikecount {

// n = s^2 * sf with sf squarefree; returns sf and writes s.
inline long long squarefree_part(long long n, long long* square_root_out = nullptr) {
  long long s = 1, sf = 1;
  for (long long f = 2; f * f <= n; ++f) {
    long long e = 0;
    while (n % f == 0) {
      n /= f;
      ++e;
    }
    for (long long i = 0; i + 1 < e; i += 2) s *= f;
    if (e & 1) sf *= f;
  }
  sf *= n;
  if (square_root_out) *square_root_out = s;
  return sf;
}

// Element of the ring generated over Q by square roots of positive integers:
// sum of coeff_d * sqrt(d) over squarefree d >= 1 (d = 1 is the rational
// part).  Closed under +,-,* since sqrt(d1)*sqrt(d2) = g*sqrt((d1/g)(d2/g))
// for g = gcd.  Zero iff the term map is empty, by linear independence of
// the sqrt(d) over Q; that makes equality and ties exactly decidable.
class QuadLin {
 public:
  QuadLin() = default;
  QuadLin(const Rat& r) { set_term(1, r); }  // NOLINT: implicit by design
  QuadLin(long long n) { set_term(1, Rat(n)); }
  static QuadLin surd(const Rat& coeff, long long d) {
    if (d <= 0) throw DomainError("surd radicand must be positive");
    long long s = 1;
    long long sf = squarefree_part(d, &s);
    QuadLin x;
    x.set_term(sf, coeff * s);
    return x;
  }
  static QuadLin sqrt_int(long long n) { return surd(Rat(1), n); }

  const std::map<long long, Rat>& terms() const { return t_; }
  bool is_zero() const { return t_.empty(); }
  bool is_rational() const { return t_.empty() || (t_.size() == 1 && t_.begin()->first == 1); }
  Rat rational() const {
    if (t_.empty()) return Rat(0);
    return t_.begin()->second;
  }

  friend QuadLin operator+(const QuadLin& a, const QuadLin& b) {
    QuadLin r = a;
    for (const auto& [d, c] : b.t_) r.add_term(d, c);
    return r;
  }
  friend QuadLin operator-(const QuadLin& a, const QuadLin& b) {
    QuadLin r = a;
    for (const auto& [d, c] : b.t_) r.add_term(d, -c);
    return r;
  }
  friend QuadLin operator-(const QuadLin& a) {
    QuadLin r;
    for (const auto& [d, c] : a.t_) r.set_term(d, -c);
    return r;
  }
  friend QuadLin operator*(const QuadLin& a, const QuadLin& b) {
    QuadLin r;
    for (const auto& [d1, c1] : a.t_)
      for (const auto& [d2, c2] : b.t_) {
        long long g = std::gcd(d1, d2);
        r.add_term((d1 / g) * (d2 / g), c1 * c2 * g);
      }
    return r;
  }
  QuadLin& operator+=(const QuadLin& b) { return *this = *this + b; }
  QuadLin& operator-=(const QuadLin& b) { return *this = *this - b; }
  QuadLin& operator*=(const QuadLin& b) { return *this = *this * b; }
  QuadLin scaled(const Rat& k) const {
    QuadLin r;
    if (k == 0) return r;
    for (const auto& [d, c] : t_) r.set_term(d, c * k);
    return r;
  }
  QuadLin pow_ui(unsigned e) const {
    QuadLin acc(Rat(1)), b = *this;
    while (e) {
      if (e & 1) acc *= b;
      b *= b;
      e >>= 1;
    }
    return acc;
  }

  Ival eval(mpfr_prec_t p) const {
    Ival acc = Ival::of_long(0, p);
    for (const auto& [d, c] : t_) {
      if (d == 1) {
        acc = Ival::add_rat(acc, c, p);
      } else {
        acc = Ival::add(acc, Ival::mul_rat(Ival::sqrt_long(d, p), c, p), p);
      }
    }
    return acc;
  }
  DItv eval_d() const {
    DItv acc{0.0, 0.0};
    for (const auto& [d, c] : t_) {
      DItv cd = DItv::exact(c.convert_to<double>()).widened();
      if (d == 1) {
        acc = acc + cd;
      } else {
        DItv sq = DItv::exact(std::sqrt(static_cast<double>(d))).widened();
        acc = acc + sq * cd;
      }
    }
    return acc;
  }

  // Exact sign.  Nonzero multi-surd values separate from zero at finite
  // precision; the cap throw is the honest fallback, not a code path real
  // inputs hit.
  int sign(mpfr_prec_t cap = kPrecCap) const {
    if (t_.empty()) return 0;
    if (t_.size() == 1) return t_.begin()->second < 0 ? -1 : 1;
    for (mpfr_prec_t p = kMinPrec;; p *= 2) {
      if (p > cap) throw UndecidableComparison("sign of surd expression undecided at precision cap");
      Ival e = eval(p);
      if (!e.contains_zero()) return e.lo().sign();
    }
  }
  QuadLin abs() const { return sign() < 0 ? -*this : *this; }

  // -1 / 0 / +1 with 0 meaning exact equality.
  friend int compare_exact(const QuadLin& a, const QuadLin& b) { return (a - b).sign(); }

 private:
  void set_term(long long d, const Rat& c) {
    if (c != 0) t_[d] = c;
  }
  void add_term(long long d, const Rat& c) {
    auto it = t_.find(d);
    if (it == t_.end()) {
      if (c != 0) t_.emplace(d, c);
    } else {
      it->second += c;
      if (it->second == 0) t_.erase(it);
    }
  }
  std::map<long long, Rat> t_;
};

// Nearest integer; writes 1 to *tie when x sits exactly halfway (the lower
// neighbour is returned then).  Exact for every representable x.
inline Int nearest_int(const QuadLin& x, bool* tie = nullptr) {
  if (tie) *tie = false;
  if (x.is_rational()) return round_rat(x.rational(), tie);
  Int n = x.eval(kMinPrec).mid().round_to_int();
  for (int guard = 0; guard < 4; ++guard) {
    QuadLin d = x - QuadLin(Rat(n));
    int above = (d - QuadLin(Rat(1, 2))).sign();   // d vs 1/2
    int below = (d + QuadLin(Rat(1, 2))).sign();   // d vs -1/2
    if (above > 0) {
      n += 1;
      continue;
    }
    if (below < 0) {
      n -= 1;
      continue;
    }
    if (above == 0 && tie) *tie = true;      // d == 1/2: report lower neighbour
    if (below == 0) {                        // d == -1/2: lower neighbour is n-1
      n -= 1;
      if (tie) *tie = true;
    }
    return n;
  }
  throw Error("nearest_int failed to settle");
}

inline Int floor_int(const QuadLin& x) {
  if (x.is_rational()) return floor_rat(x.rational());
  Int n = x.eval(kMinPrec).mid().floor_to_int();
  for (int guard = 0; guard < 4; ++guard) {
    if ((x - QuadLin(Rat(n))).sign() < 0) {
      n -= 1;
      continue;
    }
    if ((x - QuadLin(Rat(n + 1))).sign() >= 0) {
      n += 1;
      continue;
    }
    return n;
  }
  throw Error("floor_int failed to settle");
}

// ||x|| = min over integers n of |x - n|; exactly 1/2 on ties.
inline QuadLin dist_to_nearest_int(const QuadLin& x) {
  bool tie = false;
  Int n = nearest_int(x, &tie);
  if (tie) return QuadLin(Rat(1, 2));
  return (x - QuadLin(Rat(n))).abs();
}

}  // namespace spikecount
