// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <random>

#include "spikecount/blocks.hpp"
#include "spikecount/norms.hpp"
#include "spikecount/parallel.hpp"
#include "spikecount/quadlin.hpp"

namespace spikecount {

// Which norm a block contributes: the Euclidean ball product, or the
// max-norm box product used for the integer-point experiments.  They agree
// on one-dimensional blocks.
enum class RegionFlavor { supnorm, euclidean };

// The region is a product: x-blocks confined to |x_i| <= T with the
// multiplicative constraint prod |x_i|^{beta_i} < eps^B, times y-blocks
// confined to |y_j| <= Q_j.
struct SpikeParams {
  BlockStructure bs;
  Weights w;
  Rat eps, T;
  std::vector<Rat> Qs;  // one radius per y-block
  RegionFlavor flavor = RegionFlavor::supnorm;

  void validate() const {
    bs.validate();
    if (static_cast<int>(w.beta.size()) != bs.M() || static_cast<int>(w.gamma.size()) != bs.N())
      throw ValidationError("weight lengths must match block counts");
    for (const Rat& b : w.beta)
      if (b <= 0) throw ValidationError("beta weights must be positive");
    for (const Rat& g : w.gamma)
      if (g <= 0) throw ValidationError("gamma weights must be positive");
    if (eps <= 0 || T <= 0) throw ValidationError("eps and T must be positive");
    if (static_cast<int>(Qs.size()) != bs.N())
      throw ValidationError("one Q per y-block required");
    for (const Rat& q : Qs)
      if (q <= 0) throw ValidationError("Q radii must be positive");
  }

  static SpikeParams scalar(int M, int N, const Rat& eps, const Rat& T, const Rat& Q,
                            RegionFlavor flavor = RegionFlavor::supnorm) {
    SpikeParams p;
    p.bs = BlockStructure::scalar_rows(M, N);
    p.w = Weights::canonical(M, N);
    p.eps = eps;
    p.T = T;
    p.Qs = {Q};
    p.flavor = flavor;
    return p;
  }
};

namespace detail {

// Squared flavor norm of one block, exact.
inline QuadLin block_norm_sq(const std::vector<QuadLin>& v, int off, int len, RegionFlavor flavor) {
  if (flavor == RegionFlavor::euclidean) {
    QuadLin s;
    for (int t = 0; t < len; ++t) s += v[off + t] * v[off + t];
    return s;
  }
  QuadLin best = v[off] * v[off];
  for (int t = 1; t < len; ++t) {
    QuadLin c = v[off + t] * v[off + t];
    if (compare_exact(c, best) > 0) best = c;
  }
  return best;
}

}  // namespace detail

// Exact membership; the only undecidable case is a non-integer-weight
// product sitting exactly on the eps boundary, which surfaces as
// UndecidableComparison from the escalation ladder.
inline bool contains(const SpikeParams& p, const std::vector<QuadLin>& point) {
  p.validate();
  if (static_cast<int>(point.size()) != p.bs.dim())
    throw ValidationError("point dimension mismatch");
  Rat T2 = p.T * p.T;
  std::vector<QuadLin> s2(p.bs.M());
  for (int i = 0; i < p.bs.M(); ++i) {
    // box condition per coordinate when sup norm, per block when Euclidean
    if (p.flavor == RegionFlavor::supnorm) {
      for (int t = 0; t < p.bs.m[i]; ++t) {
        const QuadLin& c = point[p.bs.x_off(i) + t];
        if (compare_exact(c * c, QuadLin(T2)) > 0) return false;
      }
    }
    s2[i] = detail::block_norm_sq(point, p.bs.x_off(i), p.bs.m[i], p.flavor);
    if (p.flavor == RegionFlavor::euclidean && compare_exact(s2[i], QuadLin(T2)) > 0) return false;
  }
  for (int j = 0; j < p.bs.N(); ++j) {
    Rat Q2 = p.Qs[j] * p.Qs[j];
    if (p.flavor == RegionFlavor::supnorm) {
      for (int t = 0; t < p.bs.n[j]; ++t) {
        const QuadLin& c = point[p.bs.y_off(j) + t];
        if (compare_exact(c * c, QuadLin(Q2)) > 0) return false;
      }
    } else {
      QuadLin s = detail::block_norm_sq(point, p.bs.y_off(j), p.bs.n[j], RegionFlavor::euclidean);
      if (compare_exact(s, QuadLin(Q2)) > 0) return false;
    }
  }
  // product condition: prod |x_i|^{beta_i} < eps^B, strict
  for (const QuadLin& s : s2)
    if (s.is_zero()) return true;  // zero product beats any positive eps
  if (p.w.all_integer()) {
    QuadLin prod(Rat(1));
    for (int i = 0; i < p.bs.M(); ++i)
      prod *= s2[i].pow_ui(static_cast<unsigned>(rat_num(p.w.beta[i]).convert_to<long>()));
    Rat bound = pow_rat(p.eps, 2 * rat_num(p.w.B()).convert_to<long>());
    return compare_exact(prod, QuadLin(bound)) < 0;
  }
  // interval ladder on logs: sum beta_i log s2_i  vs  2 B log eps
  auto lhs = [&](mpfr_prec_t prec) {
    Ival acc = Ival::of_long(0, prec);
    for (int i = 0; i < p.bs.M(); ++i)
      acc = Ival::add(acc, Ival::mul_rat(Ival::log(s2[i].eval(prec), prec), p.w.beta[i], prec), prec);
    return acc;
  };
  auto rhs = [&](mpfr_prec_t prec) {
    return Ival::mul_rat(Ival::log(Ival::of_rat(p.eps, prec), prec), 2 * p.w.B(), prec);
  };
  return compare_adaptive(lhs, rhs) == Ordering::LT;
}

// Volume of the scalar-block max-norm region {prod |x_i| < eps, |x_i| <= T}
// x [-Q,Q]^N: 2^{M+N} Q^N eps sum_{j<M} log(T^M/eps)^j / j!  (the
// box-truncated hyperbola volume).  Note the convention shift: eps here
// bounds the plain product, while SpikeParams.eps bounds the normalized
// norm Nm^{1/B}; for scalar unit-weight blocks they relate by eps = e^M.
inline Real volume_closed_form(int M, int N, const Rat& eps, const Rat& T, const Rat& Q,
                               mpfr_prec_t prec = kDefaultPrec) {
  if (M < 1 || N < 1) throw DomainError("M and N must be positive");
  if (eps <= 0 || T <= 0 || Q <= 0) throw DomainError("parameters must be positive");
  if (eps > pow_rat(T, M)) throw DomainError("eps must not exceed T^M");
  Rat ratio = pow_rat(T, M) / eps;
  Real s = Real::log(Real::from_rat(ratio, prec), prec);
  Real term = Real::from_long(1, prec);
  Real acc = term;
  for (int j = 1; j < M; ++j) {
    term = Real::mul(term, s, prec);
    term = Real::mul_rat(term, Rat(1, j), prec);
    acc = Real::add(acc, term, prec);
  }
  Rat factor = pow_rat(Rat(2), M + N) * pow_rat(Q, N) * eps;
  return Real::mul_rat(acc, factor, prec);
}

struct MonteCarloVolume {
  double estimate = 0;
  double stderror = 0;
};

// Hit-ratio estimate over the bounding box; byte-identical for a given
// (params, samples, seed) regardless of worker count, because sampling is
// chunked with per-chunk derived seeds.
inline MonteCarloVolume volume_monte_carlo(const SpikeParams& p, long long samples,
                                           std::uint64_t seed, int threads = 1) {
  p.validate();
  if (samples < 1) throw DomainError("need at least one sample");
  int M = p.bs.M(), N = p.bs.N();
  double T = static_cast<double>(p.T);
  double eps = static_cast<double>(p.eps);
  std::vector<double> Q(N);
  for (int j = 0; j < N; ++j) Q[j] = static_cast<double>(p.Qs[j]);
  std::vector<double> beta(M), gamma(N);
  for (int i = 0; i < M; ++i) beta[i] = static_cast<double>(p.w.beta[i]);
  for (int j = 0; j < N; ++j) gamma[j] = static_cast<double>(p.w.gamma[j]);

  double box_vol = 1;
  for (int i = 0; i < M; ++i) box_vol *= std::pow(2 * T, p.bs.m[i]);
  for (int j = 0; j < N; ++j) box_vol *= std::pow(2 * Q[j], p.bs.n[j]);

  const int kChunks = 256;
  std::vector<long long> hits(kChunks, 0);
  auto run_chunk = [&](int c) {
    long long base = samples / kChunks;
    long long n = base + (c < samples % kChunks ? 1 : 0);
    std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(c)));
    auto unit = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
    std::vector<double> x(p.bs.dim());
    long long h = 0;
    for (long long it = 0; it < n; ++it) {
      for (int i = 0; i < M; ++i)
        for (int t = 0; t < p.bs.m[i]; ++t) x[p.bs.x_off(i) + t] = (2 * unit() - 1) * T;
      for (int j = 0; j < N; ++j)
        for (int t = 0; t < p.bs.n[j]; ++t) x[p.bs.y_off(j) + t] = (2 * unit() - 1) * Q[j];
      bool ok = true;
      double log_nm = 0;
      for (int i = 0; i < M && ok; ++i) {
        double nrm = 0;
        if (p.flavor == RegionFlavor::euclidean) {
          for (int t = 0; t < p.bs.m[i]; ++t) nrm += x[p.bs.x_off(i) + t] * x[p.bs.x_off(i) + t];
          nrm = std::sqrt(nrm);
        } else {
          for (int t = 0; t < p.bs.m[i]; ++t) nrm = std::max(nrm, std::fabs(x[p.bs.x_off(i) + t]));
        }
        if (nrm > T) ok = false;
        log_nm += beta[i] * std::log(nrm);  // -inf on a zero block is fine
      }
      for (int j = 0; j < N && ok; ++j) {
        double nrm = 0;
        if (p.flavor == RegionFlavor::euclidean) {
          for (int t = 0; t < p.bs.n[j]; ++t) nrm += x[p.bs.y_off(j) + t] * x[p.bs.y_off(j) + t];
          nrm = std::sqrt(nrm);
        } else {
          for (int t = 0; t < p.bs.n[j]; ++t) nrm = std::max(nrm, std::fabs(x[p.bs.y_off(j) + t]));
        }
        if (nrm > Q[j]) ok = false;
      }
      double Bsum = 0;
      for (int i = 0; i < M; ++i) Bsum += beta[i];
      if (ok && log_nm < Bsum * std::log(eps)) ++h;
    }
    hits[c] = h;
  };
  parallel_for_chunks(kChunks, threads, run_chunk);
  long long total = 0;
  for (long long h : hits) total += h;
  double ph = static_cast<double>(total) / static_cast<double>(samples);
  MonteCarloVolume r;
  r.estimate = ph * box_vol;
  r.stderror = box_vol * std::sqrt(ph * (1 - ph) / static_cast<double>(samples));
  return r;
}

// Diameter of the enclosing product of balls: 2 sqrt(sum_i T^2 + sum_j Q_j^2).
// An upper bound for the region itself, attained coordinate-wise.
inline Real diameter(const SpikeParams& p, mpfr_prec_t prec = kDefaultPrec) {
  p.validate();
  Rat r2 = Rat(p.bs.M()) * p.T * p.T;
  for (const Rat& q : p.Qs) r2 += q * q;
  return Real::mul_rat(Real::sqrt(Real::from_rat(r2, prec), prec), Rat(2), prec);
}

// Same, with the blocks pinned by C dropped (they contribute no extent).
inline Real diameter_cap_C(const SpikeParams& p, const SubspaceC& c,
                           mpfr_prec_t prec = kDefaultPrec) {
  p.validate();
  std::vector<char> px(p.bs.M(), 0), py(p.bs.N(), 0);
  for (int i : c.zero_x) px.at(i) = 1;
  for (int j : c.zero_y) py.at(j) = 1;
  Rat r2(0);
  for (int i = 0; i < p.bs.M(); ++i)
    if (!px[i]) r2 += p.T * p.T;
  for (int j = 0; j < p.bs.N(); ++j)
    if (!py[j]) r2 += p.Qs[j] * p.Qs[j];
  return Real::mul_rat(Real::sqrt(Real::from_rat(r2, prec), prec), Rat(2), prec);
}

}  // namespace spikecount
