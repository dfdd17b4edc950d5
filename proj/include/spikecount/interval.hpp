// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <functional>
#include <limits>

#include "spikecount/real.hpp"

namespace spikecount {

enum class Ordering { LT, GT, UNDECIDED };

// Cheap first-stage enclosure: double endpoints widened by one ulp after
// every operation.  Each double op is correctly rounded, so the true value
// stays inside.  No directed-rounding mode switches needed.
struct DItv {
  double lo = 0.0, hi = 0.0;

  static DItv exact(double x) { return {x, x}; }
  static DItv of_long(long long n) {
    double d = static_cast<double>(n);
    DItv r{d, d};
    // exact only within the 53-bit range
    if (n > (1LL << 53) || n < -(1LL << 53)) r = r.widened();
    return r;
  }
  DItv widened() const {
    constexpr double inf = std::numeric_limits<double>::infinity();
    return {std::nextafter(lo, -inf), std::nextafter(hi, inf)};
  }
  friend DItv operator+(const DItv& a, const DItv& b) {
    return DItv{a.lo + b.lo, a.hi + b.hi}.widened();
  }
  friend DItv operator-(const DItv& a, const DItv& b) {
    return DItv{a.lo - b.hi, a.hi - b.lo}.widened();
  }
  friend DItv operator-(const DItv& a) { return {-a.hi, -a.lo}; }
  friend DItv operator*(const DItv& a, const DItv& b) {
    double p1 = a.lo * b.lo, p2 = a.lo * b.hi, p3 = a.hi * b.lo, p4 = a.hi * b.hi;
    return DItv{std::min(std::min(p1, p2), std::min(p3, p4)),
                std::max(std::max(p1, p2), std::max(p3, p4))}
        .widened();
  }
  DItv abs() const {
    if (lo >= 0.0) return *this;
    if (hi <= 0.0) return {-hi, -lo};
    return {0.0, std::max(-lo, hi)};
  }
  DItv scale_long(long long k) const { return *this * of_long(k); }
  bool certainly_lt(double t) const { return hi < t; }
  bool certainly_ge(double t) const { return lo >= t; }
  double mid() const { return 0.5 * (lo + hi); }
};

// Enclosure of min_n |x - n| for a narrow interval x.  Falls back to the
// trivial [0, 1/2] when the interval is wide or out of exact-double range,
// which simply routes the caller to an exact path.
inline DItv dist_to_nearest_itv(const DItv& x) {
  if (!(x.hi - x.lo < 0.5) || !(std::fabs(x.lo) < 4.0e15)) return {0.0, 0.5};
  const long long m = std::llround(0.5 * (x.lo + x.hi));
  double lo = std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  for (long long n : {m - 1, m, m + 1}) {
    DItv s = (x - DItv::of_long(n)).abs();
    lo = std::min(lo, s.lo);
    hi = std::min(hi, s.hi);  // pointwise min of the three candidates
  }
  return {std::max(lo, 0.0), hi};
}

// MPFR interval with outward rounding.  Both endpoints carry the same
// precision; every constructor and operation keeps the true value enclosed.
class Ival {
 public:
  Ival() = default;
  Ival(Real lo, Real hi) : lo_(std::move(lo)), hi_(std::move(hi)) {}

  static Ival exact(const Real& x) { return {x, x}; }
  static Ival of_rat(const Rat& q, mpfr_prec_t p) {
    return {Real::from_rat(q, p, MPFR_RNDD), Real::from_rat(q, p, MPFR_RNDU)};
  }
  static Ival of_int(const Int& n, mpfr_prec_t p) {
    return {Real::from_int(n, p, MPFR_RNDD), Real::from_int(n, p, MPFR_RNDU)};
  }
  static Ival of_long(long long n, mpfr_prec_t p) { return of_int(Int(n), p); }

  const Real& lo() const { return lo_; }
  const Real& hi() const { return hi_; }
  mpfr_prec_t prec() const { return std::max(lo_.prec(), hi_.prec()); }

  static Ival add(const Ival& a, const Ival& b, mpfr_prec_t p) {
    return {Real::add(a.lo_, b.lo_, p, MPFR_RNDD), Real::add(a.hi_, b.hi_, p, MPFR_RNDU)};
  }
  static Ival sub(const Ival& a, const Ival& b, mpfr_prec_t p) {
    return {Real::sub(a.lo_, b.hi_, p, MPFR_RNDD), Real::sub(a.hi_, b.lo_, p, MPFR_RNDU)};
  }
  static Ival neg(const Ival& a) { return {-a.hi_, -a.lo_}; }
  static Ival mul(const Ival& a, const Ival& b, mpfr_prec_t p) {
    const Real* as[2] = {&a.lo_, &a.hi_};
    const Real* bs[2] = {&b.lo_, &b.hi_};
    Real lo, hi;
    bool first = true;
    for (auto* x : as)
      for (auto* y : bs) {
        Real d = Real::mul(*x, *y, p, MPFR_RNDD);
        Real u = Real::mul(*x, *y, p, MPFR_RNDU);
        if (first || d < lo) lo = d;
        if (first || u > hi) hi = u;
        first = false;
      }
    return {lo, hi};
  }
  // Requires 0 outside b.
  static Ival div(const Ival& a, const Ival& b, mpfr_prec_t p) {
    const Real* as[2] = {&a.lo_, &a.hi_};
    const Real* bs[2] = {&b.lo_, &b.hi_};
    Real lo, hi;
    bool first = true;
    for (auto* x : as)
      for (auto* y : bs) {
        Real d = Real::div(*x, *y, p, MPFR_RNDD);
        Real u = Real::div(*x, *y, p, MPFR_RNDU);
        if (first || d < lo) lo = d;
        if (first || u > hi) hi = u;
        first = false;
      }
    return {lo, hi};
  }
  static Ival mul_rat(const Ival& a, const Rat& q, mpfr_prec_t p) {
    if (q >= 0)
      return {Real::mul_rat(a.lo_, q, p, MPFR_RNDD), Real::mul_rat(a.hi_, q, p, MPFR_RNDU)};
    return {Real::mul_rat(a.hi_, q, p, MPFR_RNDD), Real::mul_rat(a.lo_, q, p, MPFR_RNDU)};
  }
  static Ival add_rat(const Ival& a, const Rat& q, mpfr_prec_t p) {
    return {Real::add_rat(a.lo_, q, p, MPFR_RNDD), Real::add_rat(a.hi_, q, p, MPFR_RNDU)};
  }
  // Requires a.lo >= 0.
  static Ival sqrt(const Ival& a, mpfr_prec_t p) {
    return {Real::sqrt(a.lo_, p, MPFR_RNDD), Real::sqrt(a.hi_, p, MPFR_RNDU)};
  }
  static Ival sqrt_long(long long d, mpfr_prec_t p) {
    Real lo(p), hi(p);
    mpfr_sqrt_ui(lo.raw(), static_cast<unsigned long>(d), MPFR_RNDD);
    mpfr_sqrt_ui(hi.raw(), static_cast<unsigned long>(d), MPFR_RNDU);
    return {lo, hi};
  }
  // Requires a.lo > 0.
  static Ival log(const Ival& a, mpfr_prec_t p) {
    return {Real::log(a.lo_, p, MPFR_RNDD), Real::log(a.hi_, p, MPFR_RNDU)};
  }
  static Ival exp(const Ival& a, mpfr_prec_t p) {
    return {Real::exp(a.lo_, p, MPFR_RNDD), Real::exp(a.hi_, p, MPFR_RNDU)};
  }
  Ival abs() const {
    if (lo_.sign() >= 0) return *this;
    if (hi_.sign() <= 0) return neg(*this);
    Real z(lo_.prec());
    Real m = Real::neg(lo_, lo_.prec(), MPFR_RNDU);
    return {z, m > hi_ ? m : hi_};
  }
  // x^e for exact rational e, via exp(e*log x); requires lo > 0.
  static Ival pow_rat(const Ival& a, const Rat& e, mpfr_prec_t p) {
    return exp(mul_rat(log(a, p), e, p), p);
  }

  bool contains_zero() const { return lo_.sign() <= 0 && hi_.sign() >= 0; }
  Real width(mpfr_prec_t p) const { return Real::sub(hi_, lo_, p, MPFR_RNDU); }
  Real mid() const { return Real::mul(lo_ + hi_, Real(0.5, 32), prec(), MPFR_RNDN); }

  friend Ordering compare_strict(const Ival& a, const Ival& b) {
    if (a.hi_ < b.lo_) return Ordering::LT;
    if (a.lo_ > b.hi_) return Ordering::GT;
    return Ordering::UNDECIDED;
  }

 private:
  Real lo_, hi_;
};

// Escalation ladder shared by every adaptive comparison: evaluate both sides
// at doubling precision until the order is strict or the cap is reached.
inline Ordering compare_adaptive(const std::function<Ival(mpfr_prec_t)>& fa,
                                 const std::function<Ival(mpfr_prec_t)>& fb,
                                 mpfr_prec_t start = kDefaultPrec,
                                 mpfr_prec_t cap = kPrecCap) {
  for (mpfr_prec_t p = start;; p *= 2) {
    if (p > cap) p = cap;
    Ordering o = compare_strict(fa(p), fb(p));
    if (o != Ordering::UNDECIDED || p == cap) return o;
  }
}

}  // namespace spikecount
