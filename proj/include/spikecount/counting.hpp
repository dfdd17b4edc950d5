// SPDX-License-Identifier: Apache-2.0
//
// Exact cardinality of the spike point set
//   { (p, q) in Z^M x Z^N, q != 0 :
//       prod_i |L_i(q) + p_i| < eps,  |L_i(q) + p_i| <= T,  |q_j| <= Q }
// together with the same count routed tile-by-tile through the cone
// partition, and evaluators for the two theoretical error bounds.
//
// Throughout this header eps bounds the PLAIN coordinate product, matching
// volume_closed_form; SpikeParams built here carry that same raw value (see
// CountReport).  The normalized per-block convention (Nm^(1/B) < eps) only
// enters when a partition plan is derived, via eps_norm = eps^(1/M).
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "spikecount/errors.hpp"
#include "spikecount/interval.hpp"
#include "spikecount/lattice.hpp"
#include "spikecount/linear_form.hpp"
#include "spikecount/parallel.hpp"
#include "spikecount/partition.hpp"
#include "spikecount/region.hpp"

namespace spikecount {

struct CountOptions {
  std::size_t node_budget = kDefaultNodeBudget;
  int threads = 1;
};

namespace detail {

// One admissible value of a single x-coordinate for a fixed q.
struct CoordChoice {
  long long p = 0;  // integer shift; x = L_i(q) + p
  DItv ax;          // enclosure of |x|
};

// Exact row values L_i(q) for the current q, materialized only when an
// interval comparison fails to decide.
struct RowExactCtx {
  const LinearFormSystem* sys = nullptr;
  const std::vector<long long>* q = nullptr;
  std::vector<QuadLin> base;
  std::vector<char> built;

  void bind(const LinearFormSystem& s, const std::vector<long long>& qq) {
    sys = &s;
    q = &qq;
    base.assign(static_cast<std::size_t>(s.M), QuadLin());
    built.assign(static_cast<std::size_t>(s.M), 0);
  }
  void reset() { std::fill(built.begin(), built.end(), 0); }
  const QuadLin& row(int i) {
    if (!built[static_cast<std::size_t>(i)]) {
      base[static_cast<std::size_t>(i)] = row_value_exact(*sys, i, *q);
      built[static_cast<std::size_t>(i)] = 1;
    }
    return base[static_cast<std::size_t>(i)];
  }
};

// Sink protocol: bulk(n) tallies n certified members at once (only called
// when wants_points is false); point(xs) receives one member's exact
// x-coordinates.
template <class Sink>
struct ScanState {
  const LinearFormSystem& sys;
  Rat eps, T;
  long long Q = 1;
  DItv eps_d, T_d;
  Sink* sink = nullptr;
  std::size_t nodes = 0;
  std::size_t budget = kDefaultNodeBudget;
  bool overflow = false;
};

template <class Sink>
inline void scan_tuples(ScanState<Sink>& st, const std::vector<std::vector<CoordChoice>>& lists,
                        RowExactCtx& ctx, std::vector<const CoordChoice*>& chosen, int depth,
                        DItv prod) {
  const int M = st.sys.M;
  if (depth == M) {
    ++st.nodes;
    bool member;
    if (prod.hi < st.eps_d.lo) {
      member = true;
    } else if (prod.lo >= st.eps_d.hi) {
      member = false;
    } else {
      QuadLin exact(Rat(1));
      for (int i = 0; i < M; ++i) {
        QuadLin x = ctx.row(i) + QuadLin(Rat(chosen[static_cast<std::size_t>(i)]->p));
        exact = exact * (x.sign() < 0 ? QuadLin(Rat(0)) - x : x);
      }
      member = compare_exact(exact, QuadLin(st.eps)) < 0;
    }
    if (member) {
      if (st.sink->wants_points) {
        std::vector<QuadLin> xs(static_cast<std::size_t>(M));
        for (int i = 0; i < M; ++i)
          xs[static_cast<std::size_t>(i)] =
              ctx.row(i) + QuadLin(Rat(chosen[static_cast<std::size_t>(i)]->p));
        st.sink->point(xs);
      } else {
        st.sink->bulk(1);
      }
    }
    return;
  }
  for (const CoordChoice& c : lists[depth]) {
    chosen[static_cast<std::size_t>(depth)] = &c;
    scan_tuples(st, lists, ctx, chosen, depth + 1, prod * c.ax);
    if (st.nodes > st.budget) {
      st.overflow = true;
      return;
    }
  }
}

// Visit every member tuple whose y-part has first coordinate q1.
template <class Sink>
inline void scan_first_coordinate(ScanState<Sink>& st, long long q1) {
  const int M = st.sys.M, N = st.sys.N;
  std::vector<long long> q(N, 0);
  q[0] = q1;
  std::vector<std::vector<CoordChoice>> lists(M);
  std::vector<const CoordChoice*> chosen(M, nullptr);
  RowExactCtx ctx;
  ctx.bind(st.sys, q);

  std::function<void(int)> walk = [&](int j) {
    if (st.overflow) return;
    if (j == N) {
      if (std::all_of(q.begin(), q.end(), [](long long v) { return v == 0; })) return;
      ++st.nodes;
      ctx.reset();
      // admissible values of each x-coordinate
      long long combos = 1;
      for (int i = 0; i < M; ++i) {
        lists[i].clear();
        DItv bd = row_value_d(st.sys, i, q);
        long long p_lo = static_cast<long long>(std::floor(-st.T_d.hi - bd.hi)) - 1;
        long long p_hi = static_cast<long long>(std::ceil(st.T_d.hi - bd.lo)) + 1;
        for (long long p = p_lo; p <= p_hi; ++p) {
          ++st.nodes;
          DItv axd = (bd + DItv::of_long(p)).abs();
          if (axd.lo > st.T_d.hi) continue;  // certainly outside the box
          if (!(axd.hi < st.T_d.lo)) {
            // borderline against T: settle exactly
            QuadLin x = ctx.row(i) + QuadLin(Rat(p));
            int sg = x.sign();
            QuadLin ax = sg < 0 ? QuadLin(Rat(0)) - x : x;
            if (compare_exact(ax, QuadLin(st.T)) > 0) continue;
            axd = ax.eval_d();
          }
          lists[i].push_back({p, axd});
        }
        combos *= static_cast<long long>(lists[i].size());
        if (combos == 0) break;
      }
      if (combos == 0) return;
      if (st.nodes > st.budget) {
        st.overflow = true;
        return;
      }
      if (!st.sink->wants_points) {
        // coordinatewise upper bound certifies the whole block at once
        DItv prod_max{1.0, 1.0};
        for (int i = 0; i < M; ++i) {
          const CoordChoice* top = &lists[i][0];
          for (const CoordChoice& c : lists[i])
            if (c.ax.hi > top->ax.hi) top = &c;
          prod_max = prod_max * top->ax;
        }
        if (prod_max.hi < st.eps_d.lo) {
          st.sink->bulk(combos);
          return;
        }
      }
      scan_tuples(st, lists, ctx, chosen, 0, DItv{1.0, 1.0});
      return;
    }
    for (long long v = -st.Q; v <= st.Q; ++v) {
      q[j] = v;
      walk(j + 1);
      if (st.overflow) return;
    }
  };
  walk(1);
}

template <class Sink>
inline void scan_all(const LinearFormSystem& sys, const Rat& eps, const Rat& T, long long Q,
                     const CountOptions& opts, std::vector<Sink>& chunk_sinks) {
  if (eps <= 0 || T <= 0) throw DomainError("eps and T must be positive");
  if (Q < 1) throw DomainError("Q must be at least 1");
  double est_q = std::pow(2.0 * static_cast<double>(Q) + 1.0, sys.N);
  if (est_q > 8.0 * static_cast<double>(opts.node_budget))
    throw EnumerationBudgetExceeded("y-box holds ~" + std::to_string(est_q) +
                                    " points, over budget " + std::to_string(opts.node_budget));

  const std::size_t chunks = static_cast<std::size_t>(2 * Q + 1);
  chunk_sinks.resize(chunks);
  std::vector<std::size_t> chunk_nodes(chunks, 0);
  std::vector<char> chunk_over(chunks, 0);
  parallel_for_chunks(chunks, opts.threads, [&](std::size_t c) {
    ScanState<Sink> st{sys,
                       eps,
                       T,
                       Q,
                       DItv::exact(static_cast<double>(eps)).widened(),
                       DItv::exact(static_cast<double>(T)).widened(),
                       &chunk_sinks[c],
                       0,
                       opts.node_budget,
                       false};
    scan_first_coordinate(st, static_cast<long long>(c) - Q);
    chunk_nodes[c] = st.nodes;
    chunk_over[c] = st.overflow ? 1 : 0;
  });
  std::size_t total_nodes = 0;
  bool over = false;
  for (std::size_t c = 0; c < chunks; ++c) {
    total_nodes += chunk_nodes[c];
    over = over || chunk_over[c] != 0;
  }
  if (over || total_nodes > opts.node_budget)
    throw EnumerationBudgetExceeded("enumeration visited " + std::to_string(total_nodes) +
                                    " nodes, budget " + std::to_string(opts.node_budget));
}

struct CountingSink {
  bool wants_points = false;
  long long members = 0;
  void bulk(long long n) { members += n; }
  void point(const std::vector<QuadLin>&) {}
};

}  // namespace detail

// Exact number of points of the spike set; both (p,q) and (-p,-q) count.
inline long long count_M_set(const LinearFormSystem& sys, const Rat& eps, const Rat& T,
                             long long Q, const CountOptions& opts = {}) {
  std::vector<detail::CountingSink> sinks;
  detail::scan_all(sys, eps, T, Q, opts, sinks);
  long long total = 0;
  for (const auto& s : sinks) total += s.members;
  return total;
}

// Tile-by-tile census of the same point set.  Points with a vanishing
// x-coordinate sit on the coordinate hyperplanes outside every cone and are
// tallied separately; all others are classified by the plan derived from
// the normalized bound eps^(1/M).
struct PartitionCensus {
  long long total = 0;
  long long axis_points = 0;
  std::map<std::vector<long long>, long long> per_tile;
  PartitionPlan plan;
};

inline PartitionCensus partition_census(const LinearFormSystem& sys, const Rat& eps, const Rat& T,
                                        long long Q, const CountOptions& opts = {}) {
  PartitionCensus out;
  double eps_norm = std::pow(static_cast<double>(eps), 1.0 / sys.M);
  out.plan = build_partition(sys.M, std::vector<Rat>(sys.M, Rat(1)), eps_norm,
                             static_cast<double>(T));

  struct Sink {
    bool wants_points = true;
    const PartitionPlan* plan = nullptr;
    long long axis = 0;
    std::map<std::vector<long long>, long long> tiles;
    void bulk(long long) {}
    void point(const std::vector<QuadLin>& xs) {
      std::vector<double> absx(xs.size());
      for (std::size_t i = 0; i < xs.size(); ++i) {
        if (xs[i].is_zero()) {
          ++axis;
          return;
        }
        DItv a = xs[i].eval_d().abs();
        double mid = 0.5 * (a.lo + a.hi);
        absx[i] = mid > 0 ? mid : a.hi;
      }
      ++tiles[classify_point(*plan, absx)];
    }
  };
  std::vector<Sink> sinks;
  {
    // seed every chunk with the plan pointer before scanning
    std::vector<Sink> prototype(static_cast<std::size_t>(2 * Q + 1));
    for (auto& s : prototype) s.plan = &out.plan;
    sinks = std::move(prototype);
    detail::scan_all(sys, eps, T, Q, opts, sinks);
  }
  for (const auto& s : sinks) {
    out.axis_points += s.axis;
    for (const auto& [k, n] : s.tiles) out.per_tile[k] += n;
  }
  out.total = out.axis_points;
  for (const auto& [k, n] : out.per_tile) out.total += n;
  return out;
}

inline long long count_via_partition(const LinearFormSystem& sys, const Rat& eps, const Rat& T,
                                     long long Q, const CountOptions& opts = {}) {
  return partition_census(sys, eps, T, Q, opts).total;
}

// Explicit error bound for the scalar-block max-norm region:
//   (1+T)^(M+N-1) * log(T^M/eps)^(M-1) * (eps Q^N / phiQ)^((M+N-1)/(M+N))
// with implied constant one.  Requires T^M/eps >= e^M and phiQ > 0.
inline double theoretical_bound_cor1(int M, int N, double eps, double T, double Q, double phiQ) {
  if (M < 1 || N < 1) throw DomainError("M and N must be positive");
  if (!(eps > 0) || !(T > 0) || !(Q > 0)) throw DomainError("parameters must be positive");
  if (!(phiQ > 0)) throw DomainError("phiQ must be positive");
  double s = M * std::log(T) - std::log(eps);  // log(T^M/eps)
  if (!(s >= M)) throw DomainError("requires T^M/eps >= e^M");
  double dim = M + N;
  return std::pow(1.0 + T, dim - 1) * std::pow(s, M - 1) *
         std::pow(eps * std::pow(Q, N) / phiQ, (dim - 1) / dim);
}

// Lattice measurements feeding the general bound.
struct LatticeDiagnostics {
  std::function<double(double)> nu;  // r -> nu(Lambda, r); +inf when the ball is empty
  double diam_Z = 0;
  double diam_Z_cap_C = 0;  // ignored when C_trivial
  double lambda1_C = std::numeric_limits<double>::infinity();
  bool C_trivial = true;
};

// General bound: inf over r in (0, diam Z] of
//   log(T/eps)^(M-1) * (core/nu(r) + diam Z / r + diam(Z cap C)/lambda1(C))^(M+N-1)
// with core = (eps^B Q^C)^(1/(B+C)); the subspace term is dropped when the
// lattice meets C only at the origin.  eps is the normalized bound here.
inline double theoretical_bound_main(const SpikeParams& p, const LatticeDiagnostics& d,
                                     int r_points = 64) {
  p.validate();
  if (!d.nu) throw ValidationError("nu callback required");
  double log_ratio = std::log(static_cast<double>(p.T / p.eps));
  if (!(log_ratio > 1)) throw DomainError("requires T/eps > e");
  if (!d.C_trivial && !(d.lambda1_C > 0))
    throw DomainError("lambda1 of the subspace lattice must be positive");
  if (!(d.diam_Z > 0)) throw DomainError("diam Z must be positive");

  const int M = p.bs.M(), N = p.bs.N();
  double b = static_cast<double>(p.w.B()), c = static_cast<double>(p.w.C());
  double log_core = b * std::log(static_cast<double>(p.eps));
  for (int j = 0; j < N; ++j)
    log_core += static_cast<double>(p.w.gamma[j]) * std::log(static_cast<double>(p.Qs[j]));
  double core = std::exp(log_core / (b + c));
  double sub_term = d.C_trivial ? 0.0 : d.diam_Z_cap_C / d.lambda1_C;

  double best = std::numeric_limits<double>::infinity();
  for (int k = 0; k < r_points; ++k) {
    double r = k == r_points - 1
                   ? d.diam_Z
                   : d.diam_Z * std::pow(1e-6, 1.0 - static_cast<double>(k) / (r_points - 1));
    double nu_r = d.nu(r);
    double t1;
    if (std::isinf(nu_r))
      t1 = 0.0;
    else if (nu_r > 0)
      t1 = core / nu_r;
    else
      continue;  // vanishing nu: this radius contributes +inf
    double val = std::pow(log_ratio, M - 1) *
                 std::pow(t1 + d.diam_Z / r + sub_term, M + N - 1);
    best = std::min(best, val);
  }
  return best;
}

enum class RowStatus { ok, precondition, singular, undecidable, budget };

inline const char* to_string(RowStatus s) {
  switch (s) {
    case RowStatus::ok: return "ok";
    case RowStatus::precondition: return "precondition";
    case RowStatus::singular: return "singular";
    case RowStatus::undecidable: return "undecidable";
    case RowStatus::budget: return "budget";
  }
  return "unknown";
}

// One grid row of the count-versus-volume experiment.  params echoes the
// raw configuration: params.eps is the PLAIN product bound of this header,
// not the normalized SpikeParams convention.
struct CountReport {
  SpikeParams params;
  long long Q = 1;
  long long count = 0;
  double volume = 0;
  double bound = std::numeric_limits<double>::quiet_NaN();
  long long excluded_C_points = 0;
  RowStatus status = RowStatus::ok;

  double abs_error() const { return std::fabs(static_cast<double>(count) - volume); }
  double ratio() const { return abs_error() / bound; }
};

struct GridPoint {
  Rat eps, T;
  long long Q = 1;
};

// Number of q = 0 lattice points inside the region: integer vectors p with
// |p_i| <= T and prod |p_i| < eps.
inline long long count_region_points_on_C(int M, const Rat& eps, const Rat& T) {
  long long t_floor = static_cast<long long>(std::floor(static_cast<double>(T)));
  while (Rat(t_floor + 1) <= T) ++t_floor;  // guard against double rounding
  while (Rat(t_floor) > T) --t_floor;
  long long total = 0;
  std::vector<long long> p(M, -t_floor);
  std::function<void(int, Rat)> walk = [&](int i, Rat prod) {
    if (i == M) {
      if (prod < eps) ++total;
      return;
    }
    for (long long v = -t_floor; v <= t_floor; ++v)
      walk(i + 1, prod * Rat(std::llabs(v)));
  };
  walk(0, Rat(1));
  return total;
}

inline std::vector<CountReport> error_report(const LinearFormSystem& sys,
                                             const std::vector<GridPoint>& grid,
                                             const CountOptions& opts = {}) {
  if (grid.empty()) throw ValidationError("grid must be nonempty");
  std::map<long long, WorstBadapp> badapp_cache;
  std::vector<CountReport> out;
  out.reserve(grid.size());
  for (const GridPoint& g : grid) {
    CountReport r;
    r.params = SpikeParams::scalar(sys.M, sys.N, g.eps, g.T, Rat(g.Q));
    r.Q = g.Q;
    r.excluded_C_points = count_region_points_on_C(sys.M, g.eps, g.T);

    Rat tm = pow_rat(g.T, sys.M);
    if (g.eps >= tm) {
      r.volume = static_cast<double>(pow_rat(2 * g.T, sys.M) * pow_rat(Rat(2 * g.Q), sys.N));
    } else {
      r.volume = volume_closed_form(sys.M, sys.N, g.eps, g.T, Rat(g.Q)).to_double();
    }

    try {
      r.count = count_M_set(sys, g.eps, g.T, g.Q, opts);
    } catch (const UndecidableComparison&) {
      r.count = -1;
      r.status = RowStatus::undecidable;
    } catch (const EnumerationBudgetExceeded&) {
      r.count = -1;
      r.status = RowStatus::budget;
    }

    if (r.status == RowStatus::ok) {
      auto it = badapp_cache.find(g.Q);
      if (it == badapp_cache.end()) it = badapp_cache.emplace(g.Q, worst_badapp(sys, g.Q)).first;
      const WorstBadapp& wb = it->second;
      if (wb.zero) {
        r.status = RowStatus::singular;
      } else {
        try {
          r.bound = theoretical_bound_cor1(sys.M, sys.N, static_cast<double>(g.eps),
                                           static_cast<double>(g.T),
                                           static_cast<double>(g.Q), wb.value.to_double());
        } catch (const DomainError&) {
          r.status = RowStatus::precondition;
        }
      }
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace spikecount
