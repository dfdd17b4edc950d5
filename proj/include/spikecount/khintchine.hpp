// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstddef>
#include <exception>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "spikecount/lattice.hpp"
#include "spikecount/parallel.hpp"

namespace spikecount {

// ---------------------------------------------------------------------------
// Affine-slice data.  The slice x = offset + a * slope of the (Ncal-d)-torus
// is parameterised by integer vectors a; a "hit" at modulus q is a vector
// a in (0,q]^d whose image (q, a) * stacked lands within delta of the integer
// grid in every coordinate.  Three orientations of the same entries are kept:
//   slope    d x (Ncal-d)        rows multiply a              (probe matrix)
//   stacked  (d+1) x (Ncal-d)    row 0 = offset, rows 1..d = slope rows
//   map      (Ncal-d) x (d+1)    transposed stacked; row v evaluated at
//                                (q, a) is image coordinate v, exactly.
// ---------------------------------------------------------------------------
struct SubspaceData {
  int d = 0;     // free integer coordinates
  int Ncal = 0;  // ambient dimension, Ncal = d + image coordinates
  LinearFormSystem slope;
  LinearFormSystem stacked;
  LinearFormSystem map;

  int image_dim() const { return Ncal - d; }
};

inline SubspaceData make_subspace(std::vector<std::vector<EntryExpr>> slope_rows,
                                  std::vector<EntryExpr> offset) {
  if (slope_rows.empty() || slope_rows[0].empty())
    throw ValidationError("slope matrix must be nonempty");
  SubspaceData data;
  data.d = static_cast<int>(slope_rows.size());
  const int cols = static_cast<int>(slope_rows[0].size());
  data.Ncal = data.d + cols;
  if (static_cast<int>(offset.size()) != cols)
    throw ValidationError("offset length must match the slope column count");

  std::vector<std::vector<EntryExpr>> stacked_rows;
  stacked_rows.reserve(static_cast<std::size_t>(data.d) + 1);
  stacked_rows.push_back(offset);
  for (const auto& r : slope_rows) stacked_rows.push_back(r);

  std::vector<std::vector<EntryExpr>> map_rows(static_cast<std::size_t>(cols));
  for (int v = 0; v < cols; ++v) {
    map_rows[v].reserve(static_cast<std::size_t>(data.d) + 1);
    for (const auto& row : stacked_rows) {
      if (static_cast<int>(row.size()) != cols)
        throw ValidationError("slope rows must have equal length");
      map_rows[v].push_back(row[v]);
    }
  }

  data.slope = make_system(std::move(slope_rows));
  data.stacked = make_system(std::move(stacked_rows));
  data.map = make_system(std::move(map_rows));
  return data;
}

inline SubspaceData subspace_from_strings(const std::vector<std::vector<std::string>>& slope_rows,
                                          const std::vector<std::string>& offset) {
  std::vector<std::vector<EntryExpr>> rows;
  rows.reserve(slope_rows.size());
  for (const auto& r : slope_rows) {
    std::vector<EntryExpr> row;
    row.reserve(r.size());
    for (const auto& c : r) row.push_back(parse_entry(c));
    rows.push_back(std::move(row));
  }
  std::vector<EntryExpr> off;
  off.reserve(offset.size());
  for (const auto& c : offset) off.push_back(parse_entry(c));
  return make_subspace(std::move(rows), std::move(off));
}

struct SubspaceOptions {
  // Default convention: max over image coordinates of the distance to the
  // nearest integer.  product_norm switches to the product of those
  // distances, for sensitivity runs; both comparisons against delta are
  // strict and decided exactly.
  bool product_norm = false;
  int threads = 1;  // used by count_N; chunk totals merge in q order
  std::size_t node_budget = kDefaultNodeBudget;
};

namespace detail {

inline DItv grid_dist_itv(const DItv& x) { return dist_to_nearest_itv(x); }

inline bool subspace_hit(const SubspaceData& data, std::span<const long long> atil,
                         const Rat& delta, const DItv& delta_d, bool product_norm) {
  const int K = data.image_dim();
  if (!product_norm) {
    for (int v = 0; v < K; ++v) {
      const DItv fast = grid_dist_itv(row_value_d(data.map, v, atil));
      if (fast.hi < delta_d.lo) continue;        // certainly within delta
      if (fast.lo >= delta_d.hi) return false;   // certainly not
      const QuadLin dist = dist_to_nearest_int(row_value_exact(data.map, v, atil));
      if (compare_exact(dist, QuadLin(delta)) >= 0) return false;
    }
    return true;
  }
  DItv prod_d = DItv::exact(1.0);
  for (int v = 0; v < K; ++v) prod_d = prod_d * grid_dist_itv(row_value_d(data.map, v, atil));
  if (prod_d.hi < delta_d.lo) return true;
  if (prod_d.lo >= delta_d.hi) return false;
  QuadLin prod(Rat(1));
  for (int v = 0; v < K; ++v) {
    const QuadLin dist = dist_to_nearest_int(row_value_exact(data.map, v, atil));
    if (dist.is_zero()) return true;  // product vanishes, below any positive delta
    prod *= dist;
  }
  return compare_exact(prod, QuadLin(delta)) < 0;
}

inline void check_delta(const Rat& delta) {
  if (!(delta > 0) || !(delta < Rat(1, 2)))
    throw DomainError("delta must lie strictly between 0 and 1/2");
}

inline DItv delta_enclosure(const Rat& delta) {
  return DItv::exact(static_cast<double>(delta)).widened();
}

}  // namespace detail

// Hits at a single modulus: a in (0,q]^d with image within delta of the
// integer grid.  Exact; visits q^d candidate vectors.
inline long long count_A(long long q, const Rat& delta, const SubspaceData& data,
                         const SubspaceOptions& opts = {}) {
  detail::check_delta(delta);
  if (q < 1) throw DomainError("q must be >= 1");
  double work = 1.0;
  for (int u = 0; u < data.d; ++u) work *= static_cast<double>(q);
  if (work > static_cast<double>(opts.node_budget))
    throw EnumerationBudgetExceeded("modulus box holds ~" + std::to_string(work) +
                                    " points, over budget " + std::to_string(opts.node_budget));

  const DItv delta_d = detail::delta_enclosure(delta);
  std::vector<long long> atil(static_cast<std::size_t>(data.d) + 1, 1);
  atil[0] = q;
  long long hits = 0;
  for (;;) {
    if (detail::subspace_hit(data, atil, delta, delta_d, opts.product_norm)) ++hits;
    int u = 1;
    while (u <= data.d && atil[u] == q) atil[u++] = 1;
    if (u > data.d) break;
    ++atil[u];
  }
  return hits;
}

// Partial sum over moduli 1..Q.  Parallel over q; per-chunk results and
// errors are merged in q order, so totals and the surfaced error are
// independent of the worker count.
inline long long count_N(long long Q, const Rat& delta, const SubspaceData& data,
                         const SubspaceOptions& opts = {}) {
  detail::check_delta(delta);
  if (Q < 1) throw DomainError("Q must be >= 1");
  double work = 0.0;
  for (long long q = 1; q <= Q; ++q) {
    double term = 1.0;
    for (int u = 0; u < data.d; ++u) term *= static_cast<double>(q);
    work += term;
    if (work > static_cast<double>(opts.node_budget))
      throw EnumerationBudgetExceeded("modulus boxes hold ~" + std::to_string(work) +
                                      " points, over budget " + std::to_string(opts.node_budget));
  }

  SubspaceOptions serial = opts;
  serial.threads = 1;
  std::vector<long long> per_q(static_cast<std::size_t>(Q), 0);
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(Q));
  parallel_for_chunks(static_cast<int>(Q), opts.threads, [&](int c) {
    try {
      per_q[static_cast<std::size_t>(c)] = count_A(c + 1, delta, data, serial);
    } catch (...) {
      errors[static_cast<std::size_t>(c)] = std::current_exception();
    }
  });
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  long long total = 0;
  for (long long c : per_q) total += c;
  return total;
}

// ---------------------------------------------------------------------------
// Error-expression reports.  The displayed inequality for a single modulus is
//   |A(q,delta) - 2^K delta^K q^d|
//     <= eps' delta^K q^d + log(x)^d + (1/phi) log(x)^{d-1},
// and for the partial sum
//   |N(Q,delta) - 2^K delta^K sum q^d|
//     <= eps' delta^K Q^{d+1} + log(x)^{d+1} + (1/phi) log(x)^d,
// where K = Ncal - d, x = delta^{-K} / phi, and phi is the worst-case
// badly-approximable probe of the relevant matrix (slope for the single-
// modulus form, stacked for the summed form) at radius ceil(1/delta).  Both
// probe-driven terms carry implied constant 1; fitted_constant = lhs /
// remainder is the constant the data actually requires.  A vanishing probe
// (rational dependence in some matrix row) is outside the hypotheses: the
// report still carries count, main term, and lhs, with remainder = +inf,
// fitted_constant = 0, and hypothesis_ok = false.
// ---------------------------------------------------------------------------
struct CheckReport {
  long long count = 0;
  double main_term = 0.0;
  double lhs = 0.0;  // |count - main_term|
  double remainder = 0.0;
  double fitted_constant = 0.0;
  double phi_probe = 0.0;
  bool hypothesis_ok = false;
};

inline long long probe_radius(const Rat& delta) {
  detail::check_delta(delta);
  return ceil_rat(Rat(1) / delta).convert_to<long long>();
}

// Single-modulus report; probe from the slope matrix.  phi_probe overrides
// the internally computed probe when supplied (it must be the slope-matrix
// probe at radius ceil(1/delta) for the report to keep its meaning; the
// override exists so grid drivers can reuse one probe across many rows).
inline CheckReport lemma7_check(long long q, const Rat& delta, const SubspaceData& data,
                                double eps_prime, std::optional<double> phi_probe = std::nullopt,
                                const SubspaceOptions& opts = {}) {
  detail::check_delta(delta);
  if (q < 1) throw DomainError("q must be >= 1");
  const int K = data.image_dim();
  double phi = 0.0;
  if (phi_probe) {
    phi = *phi_probe;
  } else {
    const WorstBadapp wb = worst_badapp(data.slope, probe_radius(delta));
    phi = wb.zero ? 0.0 : wb.value.to_double();
  }
  const long long count = count_A(q, delta, data, opts);
  const double dpow = std::pow(static_cast<double>(delta), K);
  const double qd = std::pow(static_cast<double>(q), data.d);
  CheckReport rep;
  rep.count = count;
  rep.main_term = std::ldexp(1.0, K) * dpow * qd;
  rep.lhs = std::fabs(static_cast<double>(count) - rep.main_term);
  rep.phi_probe = phi;
  rep.hypothesis_ok = phi > 0.0;
  if (!rep.hypothesis_ok) {
    rep.remainder = std::numeric_limits<double>::infinity();
    rep.fitted_constant = 0.0;
    return rep;
  }
  const double logx = std::log(1.0 / (dpow * phi));
  rep.remainder = eps_prime * dpow * qd + std::pow(logx, data.d) +
                  std::pow(logx, data.d - 1) / phi;
  rep.fitted_constant = rep.lhs / rep.remainder;
  return rep;
}

// Summed report over moduli 1..Q; probe from the stacked matrix.
inline CheckReport lemma8_check(long long Q, const Rat& delta, const SubspaceData& data,
                                double eps_prime, std::optional<double> phi_probe = std::nullopt,
                                const SubspaceOptions& opts = {}) {
  detail::check_delta(delta);
  if (Q < 1) throw DomainError("Q must be >= 1");
  const int K = data.image_dim();
  double phi = 0.0;
  if (phi_probe) {
    phi = *phi_probe;
  } else {
    const WorstBadapp wb = worst_badapp(data.stacked, probe_radius(delta));
    phi = wb.zero ? 0.0 : wb.value.to_double();
  }
  const long long count = count_N(Q, delta, data, opts);
  Int moment = 0;
  for (long long q = 1; q <= Q; ++q) {
    Int term = 1;
    for (int u = 0; u < data.d; ++u) term *= q;
    moment += term;
  }
  const double dpow = std::pow(static_cast<double>(delta), K);
  CheckReport rep;
  rep.count = count;
  rep.main_term = std::ldexp(1.0, K) * dpow * moment.convert_to<double>();
  rep.lhs = std::fabs(static_cast<double>(count) - rep.main_term);
  rep.phi_probe = phi;
  rep.hypothesis_ok = phi > 0.0;
  if (!rep.hypothesis_ok) {
    rep.remainder = std::numeric_limits<double>::infinity();
    rep.fitted_constant = 0.0;
    return rep;
  }
  const double logx = std::log(1.0 / (dpow * phi));
  rep.remainder = eps_prime * dpow * std::pow(static_cast<double>(Q), data.d + 1) +
                  std::pow(logx, data.d + 1) + std::pow(logx, data.d) / phi;
  rep.fitted_constant = rep.lhs / rep.remainder;
  return rep;
}

// ---------------------------------------------------------------------------
// Hypothesis scanners.  Finite-table numeric predicates for the side
// conditions the refined convergence statements place on the probe function
// phi and the cutoff function psi-hat.  They certify the inequality over the
// supplied samples only; no claim beyond the table is made.
// ---------------------------------------------------------------------------

struct SeriesTailCheck {
  double total = 0.0;          // sum of psi(q)^{Ncal-d+s} q^{d-s} over the table
  double tail_fraction = 0.0;  // share contributed by the second half of the table
  bool converged = false;      // tail_fraction <= tol
};

// psi[i] = psi(i+1).  A convergent series has vanishing tail shares; the
// predicate asks the second half of the table to contribute at most tol.
inline SeriesTailCheck check_series_tail(std::span<const double> psi, int Ncal, int d, double s,
                                         double tol = 0.5) {
  if (psi.size() < 4) throw ValidationError("series table needs at least 4 samples");
  if (Ncal <= d || d < 1) throw ValidationError("need Ncal > d >= 1");
  SeriesTailCheck out;
  double tail = 0.0;
  const std::size_t half = psi.size() / 2;
  for (std::size_t i = 0; i < psi.size(); ++i) {
    const double q = static_cast<double>(i + 1);
    const double term = std::pow(psi[i], Ncal - d + s) * std::pow(q, d - s);
    out.total += term;
    if (i >= half) tail += term;
  }
  out.tail_fraction = out.total > 0.0 ? tail / out.total : 0.0;
  out.converged = out.tail_fraction <= tol;
  return out;
}

struct RatioCheck {
  double min_ratio = std::numeric_limits<double>::infinity();
  std::size_t argmin = 0;
  bool ok = false;
};

// phi(lambda x) >= c * phi(x) over the table: for each x_i the first sample
// at or beyond lambda * x_i is compared (conservative for non-increasing
// phi).  Rows with no such sample are skipped.
inline RatioCheck check_probe_doubling(std::span<const double> x, std::span<const double> phi,
                                       double lambda, double c) {
  if (x.size() != phi.size() || x.size() < 2) throw ValidationError("table shape mismatch");
  if (!(lambda > 1.0)) throw ValidationError("lambda must exceed 1");
  RatioCheck out;
  std::size_t j = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (j < i + 1) j = i + 1;
    while (j < x.size() && x[j] < lambda * x[i]) ++j;
    if (j == x.size()) break;
    const double ratio = phi[j] / phi[i];
    if (ratio < out.min_ratio) {
      out.min_ratio = ratio;
      out.argmin = i;
    }
  }
  out.ok = out.min_ratio >= c;
  return out;
}

struct DecayCheck {
  double min_poly = std::numeric_limits<double>::infinity();  // min phi(x) x^gamma
  double max_log = 0.0;                                       // max phi(x) log(x)
  bool ok = false;
};

// x^{-gamma} <= phi(x) / c_lo and phi(x) <= c_hi / log(x) over the table;
// samples need x > 1 so the log side is meaningful.
inline DecayCheck check_probe_decay(std::span<const double> x, std::span<const double> phi,
                                    double gamma, double c_lo, double c_hi) {
  if (x.size() != phi.size() || x.empty()) throw ValidationError("table shape mismatch");
  if (!(gamma > 0.0)) throw ValidationError("gamma must be positive");
  DecayCheck out;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 1.0)) throw ValidationError("decay table needs x > 1");
    out.min_poly = std::min(out.min_poly, phi[i] * std::pow(x[i], gamma));
    out.max_log = std::max(out.max_log, phi[i] * std::log(x[i]));
  }
  out.ok = out.min_poly >= c_lo && out.max_log <= c_hi;
  return out;
}

// phi(1/psi_hat(x)) * psi_hat(x)^{Ncal-d} >= kappa * log(x)^{log_pow} / x^{x_pow}.
// The caller supplies phi already evaluated at 1/psi_hat(x).  The standard
// exponent pairs are (d-1, d) for the single-modulus form and (d, d+1) for
// the summed form.
inline RatioCheck check_probe_lower_bound(std::span<const double> x,
                                          std::span<const double> psi_hat,
                                          std::span<const double> phi_at_inv, int Ncal, int d,
                                          int log_pow, int x_pow, double kappa) {
  if (x.size() != psi_hat.size() || x.size() != phi_at_inv.size() || x.empty())
    throw ValidationError("table shape mismatch");
  if (Ncal <= d || d < 1) throw ValidationError("need Ncal > d >= 1");
  RatioCheck out;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 1.0)) throw ValidationError("lower-bound table needs x > 1");
    const double lhs = phi_at_inv[i] * std::pow(psi_hat[i], Ncal - d);
    const double rhs = std::pow(std::log(x[i]), log_pow) / std::pow(x[i], x_pow);
    const double ratio = lhs / rhs;
    if (ratio < out.min_ratio) {
      out.min_ratio = ratio;
      out.argmin = i;
    }
  }
  out.ok = out.min_ratio >= kappa;
  return out;
}

}  // namespace spikecount
