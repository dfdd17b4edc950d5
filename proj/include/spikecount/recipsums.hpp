// SPDX-License-Identifier: Apache-2.0
//
// Sums of reciprocal distances to the nearest integer,
//   S(Q) = sum over 0 < |q|_inf <= Q of prod_i ||L_i(q)||^{-1},
// the dyadic bracket that sandwiches them between weighted spike counts,
// and heuristic estimators for the multiplicative approximation exponents.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "spikecount/counting.hpp"
#include "spikecount/errors.hpp"
#include "spikecount/lattice.hpp"
#include "spikecount/linear_form.hpp"
#include "spikecount/parallel.hpp"
#include "spikecount/real.hpp"

namespace spikecount {

struct SumOptions {
  int threads = 1;
  mpfr_prec_t prec = kDefaultPrec;
  std::size_t node_budget = kDefaultNodeBudget;
};

namespace detail {

inline std::string q_string(const std::vector<long long>& q) {
  std::string s = "(";
  for (std::size_t j = 0; j < q.size(); ++j) {
    if (j) s += ",";
    s += std::to_string(q[j]);
  }
  return s + ")";
}

// Walk q over [-Q,Q]^N with fixed first coordinate, skipping the origin.
template <class Fn>
inline void walk_q_tail(int N, long long Q, std::vector<long long>& q, int j, Fn&& fn) {
  if (j == N) {
    if (std::any_of(q.begin(), q.end(), [](long long v) { return v != 0; })) fn(q);
    return;
  }
  for (long long v = -Q; v <= Q; ++v) {
    q[j] = v;
    walk_q_tail(N, Q, q, j + 1, fn);
  }
}

}  // namespace detail

// Exact-term summation at working precision.  Deterministic: terms are
// grouped by the first y-coordinate and partial sums merged in a fixed
// order, so the result is independent of the thread count.
inline Real sum_reciprocals(const LinearFormSystem& sys, long long Q, const SumOptions& opts = {}) {
  if (Q < 1) throw DomainError("Q must be at least 1");
  struct Chunk {
    Real partial;
    std::optional<std::vector<long long>> singular;
  };
  const std::size_t chunks = static_cast<std::size_t>(2 * Q + 1);
  std::vector<Chunk> parts(chunks);
  parallel_for_chunks(chunks, opts.threads, [&](std::size_t c) {
    Chunk& out = parts[c];
    out.partial = Real::from_long(0, opts.prec);
    std::vector<long long> q(sys.N, 0);
    q[0] = static_cast<long long>(c) - Q;
    detail::walk_q_tail(sys.N, Q, q, 1, [&](const std::vector<long long>& qq) {
      if (out.singular) return;
      Real term = Real::from_long(1, opts.prec);
      for (int i = 0; i < sys.M; ++i) {
        QuadLin d = dist_to_nearest_int(row_value_exact(sys, i, qq));
        if (d.is_zero()) {
          out.singular = qq;
          return;
        }
        term = Real::div(term, d.eval(opts.prec).lo(), opts.prec);
      }
      out.partial = Real::add(out.partial, term, opts.prec);
    });
  });
  Real total = Real::from_long(0, opts.prec);
  for (const Chunk& c : parts) {
    if (c.singular)
      throw SingularTerm("||L_i(q)|| vanishes at q = " + detail::q_string(*c.singular));
    total = Real::add(total, c.partial, opts.prec);
  }
  return total;
}

// Integer sandwich from the dyadic shells prod ||L_i(q)|| in [2^-k-1, 2^-k):
//   lower = sum 2^k (c_k - c_{k+1}),  upper = sum 2^{k+1} c_k,
// with c_k = count_M_set(L, 2^-k, 1/2, Q) and truncation index
// K = floor(log2(Q^N / worst_badapp(L, Q))), beyond which counts vanish.
struct DyadicBounds {
  long long lower = 0, upper = 0;
  int K = 0;
};

inline DyadicBounds dyadic_bounds(const LinearFormSystem& sys, long long Q,
                                  const SumOptions& opts = {}) {
  if (Q < 2) throw DomainError("Q must be at least 2");
  WorstBadapp wb = worst_badapp(sys, Q);
  if (wb.zero)
    throw SingularTerm("worst_badapp vanishes at q = " + detail::q_string(wb.argmin) +
                       "; the dyadic truncation is undefined");
  double phi = wb.value.to_double();
  DyadicBounds out;
  out.K = static_cast<int>(std::floor(sys.N * std::log2(static_cast<double>(Q)) - std::log2(phi)));
  if (out.K < 0) out.K = 0;
  if (out.K > 60) throw DomainError("dyadic truncation index too large for exact weights");

  CountOptions copts;
  copts.node_budget = opts.node_budget;
  copts.threads = opts.threads;
  std::vector<long long> c(out.K + 2, 0);
  for (int k = 0; k <= out.K; ++k)
    c[k] = count_M_set(sys, pow_rat(Rat(1, 2), k), Rat(1, 2), Q, copts);
  for (int k = 0; k <= out.K; ++k) {
    out.upper += (2LL << k) * c[k];             // 2^{k+1} c_k
    out.lower += (1LL << k) * (c[k] - c[k + 1]);  // 2^k on the bracket count
  }
  return out;
}

struct SumReport {
  long long Q = 0;
  double S = 0;
  long long dyadic_lower = 0, dyadic_upper = 0;
  int K_max = 0;
  double normalized = 0;  // S / (Q^N (log Q)^M)
};

inline std::vector<SumReport> growth_table(const LinearFormSystem& sys,
                                           const std::vector<long long>& Q_list,
                                           const SumOptions& opts = {}) {
  if (Q_list.empty()) throw ValidationError("Q list must be nonempty");
  for (std::size_t i = 0; i < Q_list.size(); ++i) {
    if (Q_list[i] < 2) throw ValidationError("every Q must be at least 2");
    if (i > 0 && Q_list[i] <= Q_list[i - 1]) throw ValidationError("Q list must be ascending");
  }
  std::vector<SumReport> out;
  out.reserve(Q_list.size());
  for (long long Q : Q_list) {
    SumReport r;
    r.Q = Q;
    r.S = sum_reciprocals(sys, Q, opts).to_double();
    DyadicBounds d = dyadic_bounds(sys, Q, opts);
    r.dyadic_lower = d.lower;
    r.dyadic_upper = d.upper;
    r.K_max = d.K;
    double qd = static_cast<double>(Q);
    r.normalized = r.S / (std::pow(qd, sys.N) * std::pow(std::log(qd), sys.M));
    out.push_back(r);
  }
  return out;
}

namespace detail {

struct ApproxRecord {
  long long s = 0;        // sup norm of q
  double log_product = 0; // log prod ||L_i(q)||
  bool zero = false;      // an exact zero distance was hit
};

// Running strict minima of prod ||L_i(q)|| over sup-norm shells, one fold of
// the q <-> -q symmetry (lex-positive representatives).  The scan stops at
// the first exact zero, which dominates every later record.
inline std::vector<ApproxRecord> record_stream(const LinearFormSystem& sys, long long Q_max,
                                               mpfr_prec_t prec = kDefaultPrec) {
  std::vector<ApproxRecord> records;
  double best = std::numeric_limits<double>::infinity();
  std::vector<long long> q(sys.N, 0);
  for (long long s = 1; s <= Q_max; ++s) {
    bool hit_zero = false;
    std::function<void(int, bool)> walk = [&](int j, bool on_shell) {
      if (hit_zero) return;
      if (j == sys.N) {
        if (!on_shell) return;
        // lex-positive fold
        for (long long v : q) {
          if (v > 0) break;
          if (v < 0) return;
        }
        double logp = 0;
        for (int i = 0; i < sys.M; ++i) {
          QuadLin d = dist_to_nearest_int(row_value_exact(sys, i, q));
          if (d.is_zero()) {
            records.push_back({s, -std::numeric_limits<double>::infinity(), true});
            hit_zero = true;
            return;
          }
          logp += Real::log(d.eval(prec).lo(), prec).to_double();
        }
        if (logp < best - 1e-12) {
          best = logp;
          records.push_back({s, logp, false});
        }
        return;
      }
      if (!on_shell && j == sys.N - 1) {
        // the point must touch the shell somewhere: force the last coordinate
        for (long long v : {-s, s}) {
          q[j] = v;
          walk(j + 1, true);
          if (hit_zero) return;
        }
        return;
      }
      for (long long v = -s; v <= s; ++v) {
        q[j] = v;
        walk(j + 1, on_shell || v == s || v == -s);
        if (hit_zero) return;
      }
    };
    walk(0, false);
    if (hit_zero) break;
  }
  return records;
}

}  // namespace detail

struct OmegaEstimate {
  double value = std::numeric_limits<double>::quiet_NaN();
  double residual = 0;
  int records = 0;
};

// Least-squares slope of -log prod ||L_i(q)|| against log |q|_inf over the
// record stream.  A heuristic probe of the multiplicative exponent; an exact
// zero (rational dependence) reports +infinity.
inline OmegaEstimate estimate_omega_m(const LinearFormSystem& sys, long long Q_max) {
  if (Q_max < 16) throw DomainError("Q_max must be at least 16");
  auto records = detail::record_stream(sys, Q_max);
  OmegaEstimate est;
  est.records = static_cast<int>(records.size());
  if (!records.empty() && records.back().zero) {
    est.value = std::numeric_limits<double>::infinity();
    return est;
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& r : records) {
    double x = std::log(static_cast<double>(r.s)), y = -r.log_product;
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  double n = static_cast<double>(records.size());
  double var = sxx - sx * sx / n;
  if (records.size() < 2 || var <= 0) return est;  // NaN: slope undefined
  est.value = (sxy - sx * sy / n) / var;
  double intercept = (sy - est.value * sx) / n;
  double rss = 0;
  for (const auto& r : records) {
    double x = std::log(static_cast<double>(r.s));
    double e = -r.log_product - (est.value * x + intercept);
    rss += e * e;
  }
  est.residual = std::sqrt(rss / n);
  return est;
}

// Lim-sup proxy for the logarithmic refinement at exponent omega0: over
// records with |q|_inf >= 16 that satisfy the power bound
// prod ||L_i(q)|| <= |q|_inf^{-omega0}, the largest
//   gamma(q) = -(log prod ||L_i(q)|| + omega0 log |q|_inf) / log log |q|_inf.
// Returns -infinity when no record qualifies (no near-solutions at omega0)
// and +infinity on an exact zero.
inline double estimate_omega_m_log(const LinearFormSystem& sys, double omega0, long long Q_max) {
  if (Q_max < 16) throw DomainError("Q_max must be at least 16");
  auto records = detail::record_stream(sys, Q_max);
  if (!records.empty() && records.back().zero)
    return std::numeric_limits<double>::infinity();
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& r : records) {
    if (r.s < 16) continue;
    double logs = std::log(static_cast<double>(r.s));
    if (r.log_product > -omega0 * logs) continue;  // not a near-solution
    best = std::max(best, -(r.log_product + omega0 * logs) / std::log(logs));
  }
  return best;
}

}  // namespace spikecount
