// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdio>  // before mpfr.h so formatted output is declared

#include <mpfr.h>

#include <algorithm>
#include <string>
#include <utility>

#include "spikecount/rat.hpp"

namespace spikecount {

inline constexpr mpfr_prec_t kMinPrec = 64;
inline constexpr mpfr_prec_t kDefaultPrec = 128;
inline constexpr mpfr_prec_t kPrecCap = 2048;

// Arbitrary-precision floating value.  Every value carries its own precision;
// binary operators round to the max of the operand precisions (ties to even).
// Directed-rounding primitives are exposed for the interval layer.
class Real {
 public:
  Real() { mpfr_init2(v_, kDefaultPrec); mpfr_set_zero(v_, 1); }
  explicit Real(mpfr_prec_t prec) { mpfr_init2(v_, clamp(prec)); mpfr_set_zero(v_, 1); }
  Real(double x, mpfr_prec_t prec = kDefaultPrec) {
    mpfr_init2(v_, clamp(prec));
    mpfr_set_d(v_, x, MPFR_RNDN);
  }
  Real(const Real& o) {
    mpfr_init2(v_, mpfr_get_prec(o.v_));
    mpfr_set(v_, o.v_, MPFR_RNDN);
  }
  Real(Real&& o) noexcept {
    mpfr_init2(v_, kMinPrec);
    mpfr_swap(v_, o.v_);
  }
  Real& operator=(const Real& o) {
    if (this != &o) {
      mpfr_set_prec(v_, mpfr_get_prec(o.v_));
      mpfr_set(v_, o.v_, MPFR_RNDN);
    }
    return *this;
  }
  Real& operator=(Real&& o) noexcept {
    mpfr_swap(v_, o.v_);
    return *this;
  }
  ~Real() { mpfr_clear(v_); }

  static Real from_rat(const Rat& r, mpfr_prec_t prec = kDefaultPrec,
                       mpfr_rnd_t rnd = MPFR_RNDN) {
    Real x(prec);
    mpfr_set_q(x.v_, r.backend().data(), rnd);
    return x;
  }
  static Real from_int(const Int& n, mpfr_prec_t prec = kDefaultPrec,
                       mpfr_rnd_t rnd = MPFR_RNDN) {
    Real x(prec);
    mpfr_set_z(x.v_, n.backend().data(), rnd);
    return x;
  }
  static Real from_long(long n, mpfr_prec_t prec = kDefaultPrec) {
    Real x(prec);
    mpfr_set_si(x.v_, n, MPFR_RNDN);
    return x;
  }
  static Real pos_inf(mpfr_prec_t prec = kDefaultPrec) {
    Real x(prec);
    mpfr_set_inf(x.v_, +1);
    return x;
  }

  mpfr_prec_t prec() const { return mpfr_get_prec(v_); }
  mpfr_ptr raw() { return v_; }
  mpfr_srcptr raw() const { return v_; }

  double to_double() const { return mpfr_get_d(v_, MPFR_RNDN); }
  bool is_inf() const { return mpfr_inf_p(v_) != 0; }
  bool is_nan() const { return mpfr_nan_p(v_) != 0; }
  bool is_zero() const { return mpfr_zero_p(v_) != 0; }
  int sign() const { return mpfr_sgn(v_); }

  // Decimal rendering with a fixed significant-digit count, used verbatim in
  // CSV cells; deterministic for a given value.
  std::string str(int sig_digits = 17) const {
    char buf[128];
    mpfr_snprintf(buf, sizeof buf, "%.*Rg", sig_digits, v_);
    return buf;
  }

  friend bool operator<(const Real& a, const Real& b) { return mpfr_cmp(a.v_, b.v_) < 0; }
  friend bool operator>(const Real& a, const Real& b) { return mpfr_cmp(a.v_, b.v_) > 0; }
  friend bool operator<=(const Real& a, const Real& b) { return mpfr_cmp(a.v_, b.v_) <= 0; }
  friend bool operator>=(const Real& a, const Real& b) { return mpfr_cmp(a.v_, b.v_) >= 0; }
  friend bool operator==(const Real& a, const Real& b) { return mpfr_cmp(a.v_, b.v_) == 0; }

  // Directed-rounding kernels.  Result precision is explicit.
  using Binary = int (*)(mpfr_ptr, mpfr_srcptr, mpfr_srcptr, mpfr_rnd_t);
  using Unary = int (*)(mpfr_ptr, mpfr_srcptr, mpfr_rnd_t);
  static Real bin(Binary f, const Real& a, const Real& b, mpfr_prec_t prec, mpfr_rnd_t rnd) {
    Real r(prec);
    f(r.v_, a.v_, b.v_, rnd);
    return r;
  }
  static Real un(Unary f, const Real& a, mpfr_prec_t prec, mpfr_rnd_t rnd) {
    Real r(prec);
    f(r.v_, a.v_, rnd);
    return r;
  }
  static Real add(const Real& a, const Real& b, mpfr_prec_t p, mpfr_rnd_t r = MPFR_RNDN) { return bin(mpfr_add, a, b, p, r); }
  static Real sub(const Real& a, const Real& b, mpfr_prec_t p, mpfr_rnd_t r = MPFR_RNDN) { return bin(mpfr_sub, a, b, p, r); }
  static Real mul(const Real& a, const Real& b, mpfr_prec_t p, mpfr_rnd_t r = MPFR_RNDN) { return bin(mpfr_mul, a, b, p, r); }
  static Real div(const Real& a, const Real& b, mpfr_prec_t p, mpfr_rnd_t r = MPFR_RNDN) { return bin(mpfr_div, a, b, p, r); }
  static Real pow(const Real& a, const Real& b, mpfr_prec_t p, mpfr_rnd_t r = MPFR_RNDN) { return bin(mpfr_pow, a, b, p, r); }
  static Real sqrt(const Real& a, mpfr_prec_t p, mpfr_rnd_t r = MPFR_RNDN) { return un(mpfr_sqrt, a, p, r); }
  static Real log(const Real& a, mpfr_prec_t p, mpfr_rnd_t r = MPFR_RNDN) { return un(mpfr_log, a, p, r); }
  static Real exp(const Real& a, mpfr_prec_t p, mpfr_rnd_t r = MPFR_RNDN) { return un(mpfr_exp, a, p, r); }
  static Real abs(const Real& a, mpfr_prec_t p, mpfr_rnd_t r = MPFR_RNDN) { return un(mpfr_abs, a, p, r); }
  static Real neg(const Real& a, mpfr_prec_t p, mpfr_rnd_t r = MPFR_RNDN) { return un(mpfr_neg, a, p, r); }
  static Real mul_rat(const Real& a, const Rat& q, mpfr_prec_t p, mpfr_rnd_t r = MPFR_RNDN) {
    Real x(p);
    mpfr_mul_q(x.v_, a.v_, q.backend().data(), r);
    return x;
  }
  static Real add_rat(const Real& a, const Rat& q, mpfr_prec_t p, mpfr_rnd_t r = MPFR_RNDN) {
    Real x(p);
    mpfr_add_q(x.v_, a.v_, q.backend().data(), r);
    return x;
  }

  // Nearest integer, ties to even.
  Int round_to_int() const {
    Int n;
    Real t(prec());
    mpfr_rint(t.v_, v_, MPFR_RNDN);
    mpfr_get_z(n.backend().data(), t.v_, MPFR_RNDN);
    return n;
  }
  Int floor_to_int() const {
    Int n;
    Real t(prec());
    mpfr_floor(t.v_, v_);
    mpfr_get_z(n.backend().data(), t.v_, MPFR_RNDN);
    return n;
  }

  friend Real operator+(const Real& a, const Real& b) { return add(a, b, std::max(a.prec(), b.prec())); }
  friend Real operator-(const Real& a, const Real& b) { return sub(a, b, std::max(a.prec(), b.prec())); }
  friend Real operator*(const Real& a, const Real& b) { return mul(a, b, std::max(a.prec(), b.prec())); }
  friend Real operator/(const Real& a, const Real& b) { return div(a, b, std::max(a.prec(), b.prec())); }
  friend Real operator-(const Real& a) { return neg(a, a.prec()); }

 private:
  // working precision floor: 64 bits
  static mpfr_prec_t clamp(mpfr_prec_t p) { return p < kMinPrec ? kMinPrec : p; }
  mpfr_t v_;
};

}  // namespace spikecount
