// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cctype>
#include <string>
#include <string_view>

#include "spikecount/quadlin.hpp"

namespace spikecount {

// One matrix entry.  Accepted forms, no embedded whitespace:
//   integer or rational     12  -3/4
//   quadratic surd          (1+1*sqrt(5))/2   (0-2*sqrt(12))/3   sqrt part
//                           normalized so the radicand is squarefree
//   decimal literal         0.125  -3.5e-2   (exact power-of-ten rational)
struct EntryExpr {
  QuadLin value;
  std::string src;
};

namespace detail {

// strip leading zeros so the mpz string constructor cannot read octal
inline std::string decimal_digits(std::string_view s) {
  size_t z = 0;
  while (z + 1 < s.size() && s[z] == '0') ++z;
  return std::string(s.substr(z));
}

inline Int parse_int_tok(std::string_view s, std::string_view whole) {
  if (s.empty()) throw ParseError("bad integer in entry '" + std::string(whole) + "'");
  size_t i = (s[0] == '+' || s[0] == '-') ? 1 : 0;
  if (i == s.size()) throw ParseError("bad integer in entry '" + std::string(whole) + "'");
  for (size_t k = i; k < s.size(); ++k)
    if (!std::isdigit(static_cast<unsigned char>(s[k])))
      throw ParseError("bad integer in entry '" + std::string(whole) + "'");
  Int v(decimal_digits(s.substr(i)));
  return s[0] == '-' ? Int(-v) : v;
}

inline Rat parse_decimal(std::string_view s, std::string_view whole) {
  size_t i = 0;
  bool neg = false;
  if (i < s.size() && (s[i] == '+' || s[i] == '-')) neg = s[i++] == '-';
  std::string digits;
  long frac_len = 0, exp10 = 0;
  bool any = false;
  while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) {
    digits += s[i++];
    any = true;
  }
  if (i < s.size() && s[i] == '.') {
    ++i;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) {
      digits += s[i++];
      ++frac_len;
      any = true;
    }
  }
  if (!any) throw ParseError("bad decimal in entry '" + std::string(whole) + "'");
  if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
    exp10 = static_cast<long>(parse_int_tok(s.substr(i + 1), whole).convert_to<long long>());
    i = s.size();
  }
  if (i != s.size()) throw ParseError("trailing characters in entry '" + std::string(whole) + "'");
  Int mant(digits.empty() ? std::string("0") : decimal_digits(digits));
  long e = exp10 - frac_len;
  Rat v(mant);
  Int ten(10);
  if (e > 0)
    v *= Rat(boost::multiprecision::pow(ten, static_cast<unsigned>(e)));
  else if (e < 0)
    v /= Rat(boost::multiprecision::pow(ten, static_cast<unsigned>(-e)));
  return neg ? Rat(-v) : v;
}

}  // namespace detail

inline EntryExpr parse_entry(std::string_view s) {
  using detail::parse_int_tok;
  std::string whole(s);
  if (s.empty()) throw ParseError("empty entry");

  if (s[0] == '(') {
    // (a+b*sqrt(d))/c or (a-b*sqrt(d))/c, /c optional
    size_t close = s.find(')');
    size_t sq = s.find("sqrt(");
    if (sq == std::string_view::npos) throw ParseError("expected sqrt() in entry '" + whole + "'");
    size_t dclose = s.find(')', sq);
    if (dclose == std::string_view::npos) throw ParseError("unbalanced sqrt in entry '" + whole + "'");
    close = s.find(')', dclose + 1);
    if (close == std::string_view::npos) throw ParseError("unbalanced '(' in entry '" + whole + "'");
    std::string_view inner = s.substr(1, close - 1);
    // split at the +/- sign preceding the b*sqrt term (skip a leading sign)
    size_t split = std::string_view::npos;
    for (size_t k = 1; k < inner.size(); ++k) {
      if (inner[k] == '+' || inner[k] == '-') {
        split = k;
        break;
      }
    }
    if (split == std::string_view::npos)
      throw ParseError("expected a+b*sqrt(d) in entry '" + whole + "'");
    Int a = parse_int_tok(inner.substr(0, split), whole);
    std::string_view rest = inner.substr(split);  // starts with +/-
    size_t star = rest.find("*sqrt(");
    if (star == std::string_view::npos)
      throw ParseError("expected b*sqrt(d) in entry '" + whole + "'");
    Int b = parse_int_tok(rest.substr(0, star), whole);
    std::string_view dstr = rest.substr(star + 6);
    if (dstr.empty() || dstr.back() != ')')
      throw ParseError("expected sqrt(d) in entry '" + whole + "'");
    Int d = parse_int_tok(dstr.substr(0, dstr.size() - 1), whole);
    if (d <= 0) throw ParseError("radicand must be positive in entry '" + whole + "'");
    Int c(1);
    std::string_view tail = s.substr(close + 1);
    if (!tail.empty()) {
      if (tail[0] != '/') throw ParseError("trailing characters in entry '" + whole + "'");
      c = parse_int_tok(tail.substr(1), whole);
      if (c == 0) throw ParseError("zero denominator in entry '" + whole + "'");
    }
    Rat cr(c);
    QuadLin v = QuadLin(Rat(a) / cr) + QuadLin::surd(Rat(b) / cr, d.convert_to<long long>());
    return {v, whole};
  }

  if (s.find('.') != std::string_view::npos || s.find('e') != std::string_view::npos ||
      s.find('E') != std::string_view::npos) {
    return {QuadLin(detail::parse_decimal(s, whole)), whole};
  }

  size_t slash = s.find('/');
  if (slash == std::string_view::npos) return {QuadLin(Rat(parse_int_tok(s, whole))), whole};
  Int p = parse_int_tok(s.substr(0, slash), whole);
  Int q = parse_int_tok(s.substr(slash + 1), whole);
  if (q == 0) throw ParseError("zero denominator in entry '" + whole + "'");
  return {QuadLin(Rat(p) / Rat(q)), whole};
}

}  // namespace spikecount
