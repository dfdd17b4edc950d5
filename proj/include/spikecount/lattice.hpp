// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>

#include "spikecount/blocks.hpp"
#include "spikecount/hnf.hpp"
#include "spikecount/linear_form.hpp"

namespace spikecount {

// Integer coordinate vector w.r.t. a basis.
struct LatticePoint {
  std::vector<long long> u;
  friend bool operator==(const LatticePoint& a, const LatticePoint& b) = default;
  friend bool operator<(const LatticePoint& a, const LatticePoint& b) { return a.u < b.u; }
};

// dim x rank column matrix with exact entries.  Every construction path here
// produces exact columns, which is what keeps boundary decisions decidable.
struct LatticeBasis {
  int dim = 0, rank = 0;
  std::vector<std::vector<QuadLin>> col;  // col[j] has dim coordinates

  std::vector<std::vector<QuadLin>> gram() const {
    std::vector<std::vector<QuadLin>> g(rank, std::vector<QuadLin>(rank));
    for (int i = 0; i < rank; ++i)
      for (int j = i; j < rank; ++j) {
        QuadLin s;
        for (int c = 0; c < dim; ++c) s += col[i][c] * col[j][c];
        g[i][j] = s;
        if (i != j) g[j][i] = s;
      }
    return g;
  }
};

inline LatticeBasis integer_lattice(int n) {
  LatticeBasis b;
  b.dim = b.rank = n;
  b.col.assign(n, std::vector<QuadLin>(n, QuadLin(0)));
  for (int i = 0; i < n; ++i) b.col[i][i] = QuadLin(1);
  return b;
}

// Columns (e_i, 0) for the first M coordinates and (L_{.,j}, e_j) for the
// rest; unimodular (unit determinant), so counts compare to plain volume.
inline LatticeBasis build_lattice(const LinearFormSystem& sys) {
  int d = sys.M + sys.N;
  LatticeBasis b;
  b.dim = b.rank = d;
  b.col.assign(d, std::vector<QuadLin>(d, QuadLin(0)));
  for (int i = 0; i < sys.M; ++i) b.col[i][i] = QuadLin(1);
  for (int j = 0; j < sys.N; ++j) {
    for (int i = 0; i < sys.M; ++i) b.col[sys.M + j][i] = sys.entry(i, j);
    b.col[sys.M + j][sys.M + j] = QuadLin(1);
  }
  return b;
}

inline std::vector<QuadLin> embed_exact(const LatticeBasis& b, const LatticePoint& p) {
  std::vector<QuadLin> v(b.dim);
  for (int j = 0; j < b.rank; ++j) {
    if (p.u[j] == 0) continue;
    for (int c = 0; c < b.dim; ++c) v[c] += b.col[j][c].scaled(Rat(p.u[j]));
  }
  return v;
}

// Cofactor determinant; exact, for the small dimensions used here.
inline QuadLin det_exact(const std::vector<std::vector<QuadLin>>& a) {
  size_t n = a.size();
  if (n == 1) return a[0][0];
  QuadLin acc;
  std::vector<std::vector<QuadLin>> minor(n - 1, std::vector<QuadLin>(n - 1));
  for (size_t p = 0; p < n; ++p) {
    for (size_t r = 1; r < n; ++r) {
      size_t cc = 0;
      for (size_t c = 0; c < n; ++c) {
        if (c == p) continue;
        minor[r - 1][cc++] = a[r][c];
      }
    }
    QuadLin term = a[0][p] * det_exact(minor);
    acc = (p % 2 == 0) ? acc + term : acc - term;
  }
  return acc;
}

namespace detail {

// LLL-reduced view: R = B * U with U unimodular; exact reduced Gram plus
// double/interval shadows for pruning.
struct ReducedBasis {
  const LatticeBasis* base = nullptr;
  std::vector<std::vector<Int>> U;            // rank x rank, column-major: R_j = B * U[.][j]
  std::vector<std::vector<QuadLin>> gram;     // exact reduced Gram
  std::vector<std::vector<DItv>> gram_d;      // double enclosure of the same
};

inline ReducedBasis lll_reduce(const LatticeBasis& b) {
  int k = b.rank;
  ReducedBasis rb;
  rb.base = &b;
  rb.U.assign(k, std::vector<Int>(k, Int(0)));
  for (int i = 0; i < k; ++i) rb.U[i][i] = 1;
  if (k > 0) {
    // double working copy of the columns
    std::vector<std::vector<double>> v(k, std::vector<double>(b.dim));
    for (int j = 0; j < k; ++j)
      for (int c = 0; c < b.dim; ++c) v[j][c] = b.col[j][c].eval_d().mid();

    auto dot = [&](int i, int j) {
      double s = 0;
      for (int c = 0; c < b.dim; ++c) s += v[i][c] * v[j][c];
      return s;
    };
    std::vector<std::vector<double>> mu(k, std::vector<double>(k, 0.0));
    std::vector<double> bs(k, 0.0);
    auto gso = [&] {
      for (int i = 0; i < k; ++i) {
        bs[i] = dot(i, i);
        for (int j = 0; j < i; ++j) {
          double m = dot(i, j);
          for (int t = 0; t < j; ++t) m -= mu[i][t] * mu[j][t] * bs[t];
          mu[i][j] = bs[j] > 0 ? m / bs[j] : 0.0;
          bs[i] -= mu[i][j] * mu[i][j] * bs[j];
        }
      }
    };
    auto addmul = [&](int dst, int src, long long r) {  // v_dst -= r*v_src
      for (int c = 0; c < b.dim; ++c) v[dst][c] -= static_cast<double>(r) * v[src][c];
      for (int t = 0; t < k; ++t) rb.U[t][dst] -= Int(r) * rb.U[t][src];
    };
    gso();
    const double delta = 0.99;
    int i = 1;
    int guard = 0;
    while (i < k && guard++ < 10000) {
      for (int j = i - 1; j >= 0; --j) {
        double m = mu[i][j];
        if (std::fabs(m) > 0.5) {
          addmul(i, j, std::llround(m));
          gso();
        }
      }
      if (i >= 1 && bs[i] < (delta - mu[i][i - 1] * mu[i][i - 1]) * bs[i - 1]) {
        std::swap(v[i], v[i - 1]);
        for (int t = 0; t < k; ++t) std::swap(rb.U[t][i], rb.U[t][i - 1]);
        gso();
        i = std::max(1, i - 1);
      } else {
        ++i;
      }
    }
  }
  // exact reduced columns and Gram
  std::vector<std::vector<QuadLin>> rc(k, std::vector<QuadLin>(b.dim));
  for (int j = 0; j < k; ++j)
    for (int t = 0; t < k; ++t) {
      if (rb.U[t][j] == 0) continue;
      Rat f{rb.U[t][j]};
      for (int c = 0; c < b.dim; ++c) rc[j][c] += b.col[t][c].scaled(f);
    }
  rb.gram.assign(k, std::vector<QuadLin>(k));
  rb.gram_d.assign(k, std::vector<DItv>(k));
  for (int a2 = 0; a2 < k; ++a2)
    for (int b2 = a2; b2 < k; ++b2) {
      QuadLin s;
      for (int c = 0; c < b.dim; ++c) s += rc[a2][c] * rc[b2][c];
      rb.gram[a2][b2] = rb.gram[b2][a2] = s;
      rb.gram_d[a2][b2] = rb.gram_d[b2][a2] = s.eval_d();
    }
  return rb;
}

inline LatticePoint to_original_coords(const ReducedBasis& rb, const std::vector<long long>& u) {
  int k = static_cast<int>(rb.U.size());
  LatticePoint p;
  p.u.resize(k);
  for (int t = 0; t < k; ++t) {
    Int s(0);
    for (int j = 0; j < k; ++j)
      if (u[j] != 0) s += rb.U[t][j] * Int(u[j]);
    if (s > Int(1) << 62 || s < -(Int(1) << 62)) throw Error("coordinate overflow");
    p.u[t] = s.convert_to<long long>();
  }
  return p;
}

}  // namespace detail

inline constexpr size_t kDefaultNodeBudget = 100'000'000;

// All points of the lattice with |v|_2^2 <(=) rho_sq.  Closed mode keeps the
// boundary; the boundary decision itself is exact.  Deterministic order
// (lexicographic in basis coordinates).
inline std::vector<LatticePoint> enumerate_in_ball(const LatticeBasis& b, const QuadLin& rho_sq,
                                                   bool open_ball,
                                                   size_t node_budget = kDefaultNodeBudget) {
  if (rho_sq.sign() <= 0) throw DomainError("radius must be positive");
  std::vector<LatticePoint> out;
  if (b.rank == 0) {
    out.push_back(LatticePoint{});
    return out;
  }
  detail::ReducedBasis rb = detail::lll_reduce(b);
  int k = b.rank;

  // GSO data from the double Gram for pruning
  std::vector<std::vector<double>> mu(k, std::vector<double>(k, 0.0));
  std::vector<double> q(k, 0.0);
  for (int i = 0; i < k; ++i) {
    q[i] = rb.gram_d[i][i].mid();
    for (int j = 0; j < i; ++j) {
      double m = rb.gram_d[i][j].mid();
      for (int t = 0; t < j; ++t) m -= mu[i][t] * mu[j][t] * q[t];
      mu[i][j] = q[j] != 0 ? m / q[j] : 0.0;
      q[i] -= mu[i][j] * mu[i][j] * q[j];
    }
    if (!(q[i] > 0)) throw Error("degenerate basis in enumeration");
  }
  DItv rho_d = rho_sq.eval_d();
  double R2 = rho_d.hi * (1.0 + 1e-9) + 1e-300;

  // predicted count: vol of the k-ball over the fundamental volume
  {
    double logdet = 0;
    for (int i = 0; i < k; ++i) logdet += 0.5 * std::log(q[i]);
    double logball = 0.5 * k * std::log(M_PI * R2) - std::lgamma(0.5 * k + 1.0);
    double est = std::exp(std::min(700.0, logball - logdet));
    if (est > 8.0 * static_cast<double>(node_budget))
      throw EnumerationBudgetExceeded("predicted point count exceeds enumeration budget");
  }

  std::vector<long long> u(k, 0);
  std::vector<double> part(k + 1, 0.0);  // part[i] = sum_{l>i-1...} contributions above level i
  size_t nodes = 0;

  // exact membership for a candidate already inside the inflated double bound
  auto accept = [&](const std::vector<long long>& uu) {
    DItv s{0.0, 0.0};
    for (int i = 0; i < k; ++i) {
      if (uu[i] == 0) continue;
      s = s + rb.gram_d[i][i].scale_long(uu[i] * uu[i]);
      for (int j = 0; j < i; ++j) {
        if (uu[j] == 0) continue;
        s = s + rb.gram_d[i][j].scale_long(2 * uu[i] * uu[j]);
      }
    }
    if (s.hi < rho_d.lo) return true;
    if (s.lo > rho_d.hi) return false;
    QuadLin v2;
    for (int i = 0; i < k; ++i) {
      if (uu[i] == 0) continue;
      v2 += rb.gram[i][i].scaled(Rat(uu[i]) * Rat(uu[i]));
      for (int j = 0; j < i; ++j) {
        if (uu[j] == 0) continue;
        v2 += rb.gram[i][j].scaled(Rat(2) * Rat(uu[i]) * Rat(uu[j]));
      }
    }
    int c = compare_exact(v2, rho_sq);
    return open_ball ? c < 0 : c <= 0;
  };

  // depth-first over levels k-1 .. 0; standard center/offset walk
  std::vector<double> center(k, 0.0);
  std::function<void(int)> walk = [&](int level) {
    if (level < 0) {
      if (accept(u)) out.push_back(detail::to_original_coords(rb, u));
      return;
    }
    double c = 0;
    for (int j = level + 1; j < k; ++j) c += mu[j][level] * static_cast<double>(u[j]);
    double budget = R2 - part[level + 1];
    if (budget < 0) return;
    double halfw = std::sqrt(budget / q[level]) + 1e-9;
    long long lo = static_cast<long long>(std::ceil(-c - halfw));
    long long hi = static_cast<long long>(std::floor(-c + halfw));
    for (long long t = lo; t <= hi; ++t) {
      if (++nodes > node_budget) throw EnumerationBudgetExceeded("enumeration node budget exhausted");
      u[level] = t;
      double off = static_cast<double>(t) + c;
      part[level] = part[level + 1] + q[level] * off * off;
      // small slack so exact boundary points are not pruned by roundoff
      if (part[level] <= R2 * (1.0 + 1e-9) + 1e-9) walk(level - 1);
    }
    u[level] = 0;
  };
  walk(k - 1);
  std::sort(out.begin(), out.end());
  return out;
}

struct FirstMinimum {
  QuadLin lambda1_sq;
  Real lambda1;
  LatticePoint witness;
};

// lambda_1: length of a shortest nonzero vector, exact squared length.
inline FirstMinimum first_minimum(const LatticeBasis& b, size_t node_budget = kDefaultNodeBudget,
                                  mpfr_prec_t prec = kDefaultPrec) {
  if (b.rank == 0) throw DomainError("first minimum of the trivial lattice");
  detail::ReducedBasis rb = detail::lll_reduce(b);
  QuadLin r2 = rb.gram[0][0];
  for (int i = 1; i < b.rank; ++i)
    if (compare_exact(rb.gram[i][i], r2) < 0) r2 = rb.gram[i][i];
  std::vector<LatticePoint> pts = enumerate_in_ball(b, r2, false, node_budget);
  std::optional<QuadLin> best;
  LatticePoint wit;
  for (const auto& p : pts) {
    bool zero = std::all_of(p.u.begin(), p.u.end(), [](long long x) { return x == 0; });
    if (zero) continue;
    QuadLin v2;
    std::vector<QuadLin> emb = embed_exact(b, p);
    for (const QuadLin& c : emb) v2 += c * c;
    if (!best || compare_exact(v2, *best) < 0) {
      best = v2;
      wit = p;
    }
  }
  if (!best) throw Error("first_minimum: reduced ball lost its own generator");
  FirstMinimum fm{*best, Real(prec), wit};
  Real v2r = best->eval(prec).mid();
  fm.lambda1 = Real::sqrt(v2r, prec);
  return fm;
}

// Sub-lattice pinned to C: solve the homogeneous system over the exact
// entries, split per surd so the equations become rational, take the integer
// kernel.
inline LatticeBasis restrict_to_C(const LatticeBasis& b, const BlockStructure& bs,
                                  const SubspaceC& c) {
  if (bs.dim() != b.dim) throw ValidationError("block structure does not match lattice dimension");
  std::vector<int> coords = zeroed_coords(bs, c);
  // gather surd keys per equation row, then emit one rational equation per key
  std::vector<std::vector<Rat>> eqs;
  for (int r : coords) {
    std::vector<long long> keys;
    for (int j = 0; j < b.rank; ++j)
      for (const auto& [d, cc] : b.col[j][r].terms())
        if (std::find(keys.begin(), keys.end(), d) == keys.end()) keys.push_back(d);
    std::sort(keys.begin(), keys.end());
    for (long long d : keys) {
      std::vector<Rat> eq(b.rank, Rat(0));
      for (int j = 0; j < b.rank; ++j) {
        auto it = b.col[j][r].terms().find(d);
        if (it != b.col[j][r].terms().end()) eq[j] = it->second;
      }
      eqs.push_back(std::move(eq));
    }
  }
  // clear denominators row-wise
  std::vector<std::vector<Int>> A;
  for (const auto& eq : eqs) {
    Int lcm(1);
    for (const Rat& x : eq) {
      Int d = rat_den(x);
      lcm = lcm / boost::multiprecision::gcd(lcm, d) * d;
    }
    std::vector<Int> row(b.rank);
    for (int j = 0; j < b.rank; ++j) row[j] = rat_num(eq[j]) * (lcm / rat_den(eq[j]));
    A.push_back(std::move(row));
  }
  std::vector<std::vector<Int>> ker =
      A.empty() ? std::vector<std::vector<Int>>{} : integer_kernel(A);
  if (A.empty()) {  // no equations means C pins nothing inside this span
    for (int j = 0; j < b.rank; ++j) {
      std::vector<Int> e(b.rank, Int(0));
      e[j] = 1;
      ker.push_back(std::move(e));
    }
  }
  LatticeBasis sub;
  sub.dim = b.dim;
  sub.rank = static_cast<int>(ker.size());
  sub.col.assign(sub.rank, std::vector<QuadLin>(b.dim));
  for (int j = 0; j < sub.rank; ++j)
    for (int t = 0; t < b.rank; ++t) {
      if (ker[j][t] == 0) continue;
      Rat f{ker[j][t]};
      for (int cd = 0; cd < b.dim; ++cd) sub.col[j][cd] += b.col[t][cd].scaled(f);
    }
  return sub;
}

struct NuResult {
  bool empty = false;           // no points outside C in the open ball
  bool vanishes = false;        // a point outside C has a zero block
  Real value;                   // nu itself; +inf when empty, 0 when vanishes
  std::optional<QuadLin> nm_min;  // exact min of Nm when all blocks are 1-dim
                                  // and the weights are integers
  LatticePoint witness;
};

// nu(Lambda, rho) = inf of Nm^(1/A) over lattice points outside C in the
// open rho-ball; inf of the empty set is +inf.
inline NuResult nu(const LatticeBasis& b, const BlockStructure& bs, const Weights& w,
                   const SubspaceC& c, const Rat& rho, mpfr_prec_t prec = kDefaultPrec,
                   size_t node_budget = kDefaultNodeBudget) {
  if (bs.dim() != b.dim) throw ValidationError("block structure does not match lattice dimension");
  if (rho <= 0) throw DomainError("rho must be positive");
  std::vector<int> pinned = zeroed_coords(bs, c);
  std::vector<char> is_pinned(b.dim, 0);
  for (int t : pinned) is_pinned[t] = 1;

  std::vector<LatticePoint> pts = enumerate_in_ball(b, QuadLin(rho * rho), true, node_budget);
  bool exact_mode = w.all_integer();
  for (int d : bs.m) exact_mode = exact_mode && d == 1;
  for (int d : bs.n) exact_mode = exact_mode && d == 1;

  NuResult res;
  std::optional<QuadLin> best_nm;          // exact path
  std::optional<Ival> best_log;            // interval path (log Nm at prec)
  for (const auto& p : pts) {
    std::vector<QuadLin> v = embed_exact(b, p);
    bool in_c = true;
    for (int t = 0; t < b.dim && in_c; ++t)
      if (is_pinned[t] && !v[t].is_zero()) in_c = false;
    if (in_c) continue;

    // per-block squared norms, exact
    int nblocks = bs.M() + bs.N();
    std::vector<QuadLin> s2(nblocks);
    for (int i = 0; i < bs.M(); ++i)
      for (int t = 0; t < bs.m[i]; ++t) {
        const QuadLin& crd = v[bs.x_off(i) + t];
        s2[i] += crd * crd;
      }
    for (int j = 0; j < bs.N(); ++j)
      for (int t = 0; t < bs.n[j]; ++t) {
        const QuadLin& crd = v[bs.y_off(j) + t];
        s2[bs.M() + j] += crd * crd;
      }
    bool zero_block = false;
    for (const QuadLin& s : s2) zero_block = zero_block || s.is_zero();
    if (zero_block) {
      res.vanishes = true;
      res.value = Real(prec);  // zero
      res.nm_min = QuadLin(0);
      res.witness = p;
      return res;
    }
    if (exact_mode) {
      // Nm = prod |coord_b|^{w_b} directly
      QuadLin nm(Rat(1));
      for (int i = 0; i < bs.M(); ++i)
        nm *= v[bs.x_off(i)].abs().pow_ui(static_cast<unsigned>(rat_num(w.beta[i]).convert_to<long>()));
      for (int j = 0; j < bs.N(); ++j)
        nm *= v[bs.y_off(j)].abs().pow_ui(static_cast<unsigned>(rat_num(w.gamma[j]).convert_to<long>()));
      if (!best_nm || compare_exact(nm, *best_nm) < 0) {
        best_nm = nm;
        res.witness = p;
      }
    } else {
      // log Nm = sum (w_b/2) log s2_b
      Ival acc = Ival::of_long(0, prec);
      for (int i = 0; i < bs.M(); ++i)
        acc = Ival::add(acc, Ival::mul_rat(Ival::log(s2[i].eval(prec), prec), w.beta[i] / 2, prec), prec);
      for (int j = 0; j < bs.N(); ++j)
        acc = Ival::add(acc, Ival::mul_rat(Ival::log(s2[bs.M() + j].eval(prec), prec), w.gamma[j] / 2, prec),
                        prec);
      if (!best_log || acc.mid() < best_log->mid()) {
        best_log = acc;
        res.witness = p;
      }
    }
  }
  if (!best_nm && !best_log) {
    res.empty = true;
    res.value = Real::pos_inf(prec);
    return res;
  }
  Rat invA = Rat(1) / w.A();
  if (best_nm) {
    res.nm_min = *best_nm;
    res.value = Ival::pow_rat(best_nm->eval(prec), invA, prec).mid();
  } else {
    res.value = Ival::exp(Ival::mul_rat(*best_log, invA, prec), prec).mid();
  }
  return res;
}

struct WorstBadapp {
  bool zero = false;  // some ||L_i(q)|| vanished: rational dependence
  QuadLin exact;      // min over 0 < |q|_inf <= Q of |q|_inf^N prod ||L_i(q)||
  Real value;
  std::vector<long long> argmin;
};

// Scans sup-norm shells; q and -q give the same value, so only
// lexicographically positive representatives are visited.  A double-interval
// product screens each point; the exact ladder runs only when the screen
// cannot rule out a new minimum or a vanishing distance.
inline WorstBadapp worst_badapp(const LinearFormSystem& sys, long long Q,
                                mpfr_prec_t prec = kDefaultPrec) {
  if (Q < 1) throw DomainError("Q must be >= 1");
  WorstBadapp res;
  std::optional<QuadLin> best;
  DItv best_d{0, 0};
  std::vector<long long> q(sys.N, 0);
  for (long long s = 1; s <= Q && !res.zero; ++s) {
    auto leaf = [&]() {
      // lex-positive: first nonzero coordinate > 0
      for (long long x : q) {
        if (x > 0) break;
        if (x < 0) return;
      }
      DItv val_d = DItv::of_long(1);
      for (int j = 0; j < sys.N; ++j) val_d = val_d * DItv::of_long(s);
      bool maybe_zero = false;
      for (int i = 0; i < sys.M && !maybe_zero; ++i) {
        DItv dist = dist_to_nearest_itv(row_value_d(sys, i, q));
        maybe_zero = !(dist.lo > 0.0);
        val_d = val_d * dist;
      }
      if (!maybe_zero && best && val_d.lo > best_d.hi) return;  // screened out
      QuadLin val(pow_rat(Rat(s), sys.N));
      for (int i = 0; i < sys.M; ++i) {
        QuadLin d = dist_to_nearest_int(row_value_exact(sys, i, q));
        if (d.is_zero()) {
          res.zero = true;
          res.exact = QuadLin(0);
          res.value = Real(prec);
          res.argmin.assign(q.begin(), q.end());
          return;
        }
        val *= d;
      }
      DItv vd = val.eval_d();
      if (best && vd.lo > best_d.hi) return;
      if (!best || compare_exact(val, *best) < 0) {
        best = val;
        best_d = vd;
        res.argmin.assign(q.begin(), q.end());
      }
    };
    // odometer restricted to the shell |q|_inf = s: once no earlier
    // coordinate sits on the shell, the last one is forced to +-s
    std::function<void(int, bool)> rec = [&](int j, bool on_shell) {
      if (res.zero) return;
      if (j == sys.N) {
        leaf();
        return;
      }
      if (j == sys.N - 1 && !on_shell) {
        for (long long t : {-s, s}) {
          q[j] = t;
          leaf();
          if (res.zero) return;
        }
        q[j] = 0;
        return;
      }
      for (long long t = -s; t <= s; ++t) {
        q[j] = t;
        rec(j + 1, on_shell || t == s || t == -s);
        if (res.zero) return;
      }
      q[j] = 0;
    };
    rec(0, false);
  }
  if (res.zero) return res;
  res.exact = *best;
  res.value = best->eval(prec).mid();
  return res;
}

}  // namespace spikecount
