// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <vector>

#include "spikecount/blocks.hpp"

namespace spikecount {

// One half-open unit cell [k, k+1) of the hyperplane tiling, in the
// orthonormal lambda coordinates of the plan.
struct Tile {
  std::vector<long long> index;  // length M-1
  std::vector<double> a_vec;     // length M, translation to the corner point
  std::vector<double> center;    // length M, cell center on the hyperplane
};

// Log-space decomposition of the spike set.  The hyperplane pi is
// {sum beta_i z_i = B log eps}, the box S is {z_i <= log T}; pi cap S is a
// simplex, tiled by unit cells in an orthonormal basis of lin(pi).
struct PartitionPlan {
  int M = 0;
  std::vector<Rat> beta;
  double eps = 0, T = 0;
  double log_eps = 0, log_T = 0, B = 0;
  std::vector<std::vector<double>> basis;  // M-1 orthonormal vectors in lin(pi)
  std::vector<double> anchor;              // a point of pi; lambda origin
  double c_const = 0;                      // sqrt(M-1), cell diameter bound
  std::map<std::vector<long long>, Tile> tiles;

  size_t tile_count() const { return tiles.size(); }

  std::vector<double> lambda_of(const std::vector<double>& z) const {
    std::vector<double> l(M - 1, 0.0);
    for (int b = 0; b < M - 1; ++b)
      for (int i = 0; i < M; ++i) l[b] += (z[i] - anchor[i]) * basis[b][i];
    return l;
  }

  std::vector<long long> index_of_lambda(const std::vector<double>& l) const {
    std::vector<long long> k(M - 1);
    for (int b = 0; b < M - 1; ++b) k[b] = static_cast<long long>(std::floor(l[b]));
    return k;
  }

  // Translation vector for an arbitrary cell index; identical to the stored
  // tile's a_vec for enumerated cells.  Classification near the simplex
  // boundary may produce a neighbor of an enumerated cell, so this stays
  // index-driven rather than lookup-driven.
  std::vector<double> a_for_index(const std::vector<long long>& k) const {
    std::vector<double> a(M, 0.0);
    for (int b = 0; b < M - 1; ++b)
      for (int i = 0; i < M; ++i)
        a[i] -= (static_cast<double>(k[b]) + 0.5) * basis[b][i];
    return a;
  }

  std::vector<double> center_for_index(const std::vector<long long>& k) const {
    std::vector<double> c = anchor;
    for (int b = 0; b < M - 1; ++b)
      for (int i = 0; i < M; ++i)
        c[i] += (static_cast<double>(k[b]) + 0.5) * basis[b][i];
    return c;
  }
};

namespace detail {

// Clip a convex polygon against the half-plane n.x <= c.
inline std::vector<std::array<double, 2>> clip_halfplane(
    const std::vector<std::array<double, 2>>& poly, double nx, double ny, double c) {
  std::vector<std::array<double, 2>> out;
  size_t n = poly.size();
  for (size_t i = 0; i < n; ++i) {
    const auto& a = poly[i];
    const auto& b = poly[(i + 1) % n];
    double da = nx * a[0] + ny * a[1] - c;
    double db = nx * b[0] + ny * b[1] - c;
    if (da <= 0) out.push_back(a);
    if ((da < 0 && db > 0) || (da > 0 && db < 0)) {
      double t = da / (da - db);
      out.push_back({a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])});
    }
  }
  return out;
}

}  // namespace detail

// Builds the tiling.  anchor_shift moves the lambda origin along the
// hyperplane by sum shift_b v_b (default zero keeps the corner point
// (log eps,...,log eps) as the origin).
inline PartitionPlan build_partition(int M, const std::vector<Rat>& beta, double eps, double T,
                                     const std::vector<double>& anchor_shift = {}) {
  if (M < 1) throw DomainError("M must be positive");
  if (M > 3) throw DomainError("tile enumeration implemented for M <= 3");
  if (static_cast<int>(beta.size()) != M) throw ValidationError("beta length mismatch");
  if (!(eps > 0) || !(T > 0)) throw DomainError("eps and T must be positive");
  if (!(std::log(T) - std::log(eps) > 1.0)) throw DomainError("need T/eps > e");
  if (!anchor_shift.empty() && static_cast<int>(anchor_shift.size()) != M - 1)
    throw ValidationError("anchor shift length mismatch");

  PartitionPlan plan;
  plan.M = M;
  plan.beta = beta;
  plan.eps = eps;
  plan.T = T;
  plan.log_eps = std::log(eps);
  plan.log_T = std::log(T);
  std::vector<double> bd(M);
  for (int i = 0; i < M; ++i) {
    if (beta[i] <= 0) throw ValidationError("beta weights must be positive");
    bd[i] = static_cast<double>(beta[i]);
    plan.B += bd[i];
  }
  plan.c_const = M > 1 ? std::sqrt(static_cast<double>(M - 1)) : 0.0;

  // orthonormal basis of lin(pi) = beta-orthogonal complement, from projected
  // standard basis vectors in index order
  double bnorm = 0;
  for (int i = 0; i < M; ++i) bnorm += bd[i] * bd[i];
  bnorm = std::sqrt(bnorm);
  for (int j = 0; j < M && static_cast<int>(plan.basis.size()) < M - 1; ++j) {
    std::vector<double> v(M, 0.0);
    v[j] = 1.0;
    double d = bd[j] / bnorm;
    for (int i = 0; i < M; ++i) v[i] -= d * bd[i] / bnorm;
    for (const auto& u : plan.basis) {
      double dot = 0;
      for (int i = 0; i < M; ++i) dot += v[i] * u[i];
      for (int i = 0; i < M; ++i) v[i] -= dot * u[i];
    }
    double nrm = 0;
    for (int i = 0; i < M; ++i) nrm += v[i] * v[i];
    nrm = std::sqrt(nrm);
    if (nrm < 1e-9) continue;
    for (int i = 0; i < M; ++i) v[i] /= nrm;
    plan.basis.push_back(std::move(v));
  }
  if (static_cast<int>(plan.basis.size()) != M - 1)
    throw Error("failed to build hyperplane basis");

  plan.anchor.assign(M, plan.log_eps);
  for (int b = 0; b < M - 1 && !anchor_shift.empty(); ++b)
    for (int i = 0; i < M; ++i) plan.anchor[i] += anchor_shift[b] * plan.basis[b][i];

  auto emit = [&plan](std::vector<long long> k) {
    Tile t;
    t.index = k;
    t.a_vec = plan.a_for_index(k);
    t.center = plan.center_for_index(k);
    plan.tiles.emplace(std::move(k), std::move(t));
  };

  if (M == 1) {
    emit({});
    return plan;
  }

  // simplex vertices: V^i has log T everywhere except (1/beta_i) log(eps^B / T^(B-beta_i))
  std::vector<std::vector<double>> lam;  // vertex lambda coordinates
  for (int i = 0; i < M; ++i) {
    std::vector<double> v(M, plan.log_T);
    v[i] = (plan.B * plan.log_eps - (plan.B - bd[i]) * plan.log_T) / bd[i];
    lam.push_back(plan.lambda_of(v));
  }

  if (M == 2) {
    double lo = std::min(lam[0][0], lam[1][0]);
    double hi = std::max(lam[0][0], lam[1][0]);
    for (long long k = static_cast<long long>(std::floor(lo));
         k <= static_cast<long long>(std::floor(hi)); ++k)
      emit({k});
    return plan;
  }

  // M == 3: clip the vertex triangle against each candidate unit square
  std::vector<std::array<double, 2>> tri = {{lam[0][0], lam[0][1]},
                                            {lam[1][0], lam[1][1]},
                                            {lam[2][0], lam[2][1]}};
  double lo0 = tri[0][0], hi0 = tri[0][0], lo1 = tri[0][1], hi1 = tri[0][1];
  for (const auto& p : tri) {
    lo0 = std::min(lo0, p[0]);
    hi0 = std::max(hi0, p[0]);
    lo1 = std::min(lo1, p[1]);
    hi1 = std::max(hi1, p[1]);
  }
  const double tol = 1e-12;
  for (long long k0 = static_cast<long long>(std::floor(lo0));
       k0 <= static_cast<long long>(std::floor(hi0)); ++k0)
    for (long long k1 = static_cast<long long>(std::floor(lo1));
         k1 <= static_cast<long long>(std::floor(hi1)); ++k1) {
      auto poly = tri;
      poly = detail::clip_halfplane(poly, -1, 0, -static_cast<double>(k0));
      poly = detail::clip_halfplane(poly, 1, 0, static_cast<double>(k0) + 1);
      poly = detail::clip_halfplane(poly, 0, -1, -static_cast<double>(k1));
      poly = detail::clip_halfplane(poly, 0, 1, static_cast<double>(k1) + 1);
      if (poly.empty()) continue;
      // the cell is half-open: a remnant pressed entirely against an upper
      // face belongs to the neighbor
      bool all_top0 = true, all_top1 = true;
      for (const auto& p : poly) {
        all_top0 = all_top0 && p[0] >= static_cast<double>(k0) + 1 - tol;
        all_top1 = all_top1 && p[1] >= static_cast<double>(k1) + 1 - tol;
      }
      if (all_top0 || all_top1) continue;
      emit({k0, k1});
    }
  return plan;
}

// The coordinate-raising map onto the hyperplane: raise z_1, then z_2, ...
// capping each at log T, until the weighted sum reaches B log eps.
inline std::vector<double> z_star(std::vector<double> z, const std::vector<Rat>& beta, double eps,
                                  double T) {
  int M = static_cast<int>(z.size());
  if (static_cast<int>(beta.size()) != M) throw ValidationError("beta length mismatch");
  double log_T = std::log(T);
  double target = 0;
  std::vector<double> bd(M);
  for (int i = 0; i < M; ++i) {
    bd[i] = static_cast<double>(beta[i]);
    target += bd[i];
  }
  target *= std::log(eps);
  double sum = 0;
  for (int i = 0; i < M; ++i) sum += bd[i] * z[i];
  for (int i = 0; i < M && sum < target; ++i) {
    double raise = std::min((target - sum) / bd[i], log_T - z[i]);
    if (raise <= 0) continue;
    z[i] += raise;
    sum += bd[i] * raise;
  }
  return z;
}

// Cell index of the unique boundary point of the ray through x.  The exit
// factor is closed-form because both constraints scale linearly along the
// ray; ties between the two constraint types count as hyperbolic.
inline std::vector<long long> classify_point(const PartitionPlan& plan,
                                             const std::vector<double>& absx) {
  if (static_cast<int>(absx.size()) != plan.M) throw ValidationError("point dimension mismatch");
  std::vector<double> bd(plan.M);
  for (int i = 0; i < plan.M; ++i) bd[i] = static_cast<double>(plan.beta[i]);
  double log_nm = 0, max_log = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < plan.M; ++i) {
    if (!(absx[i] > 0)) throw DomainError("classification needs nonzero blocks");
    double l = std::log(absx[i]);
    log_nm += bd[i] * l;
    max_log = std::max(max_log, l);
  }
  // log of the two ray-exit factors
  double nm_part = log_nm / plan.B - plan.log_eps;
  double box_part = max_log - plan.log_T;
  double g = std::max(nm_part, box_part);
  std::vector<double> z(plan.M);
  for (int i = 0; i < plan.M; ++i) z[i] = std::log(absx[i]) - g;
  if (nm_part < box_part) z = z_star(std::move(z), plan.beta, plan.eps, plan.T);
  if (plan.M == 1) return {};
  return plan.index_of_lambda(plan.lambda_of(z));
}

// Diagonal scaling x_i -> exp(a_i^k - c) x_i; squashes the cell's cone into
// a ball of radius eps around the origin.
inline std::vector<double> apply_phi(const PartitionPlan& plan, const std::vector<long long>& k,
                                     const std::vector<double>& x) {
  if (static_cast<int>(k.size()) != plan.M - 1) throw ValidationError("index length mismatch");
  if (static_cast<int>(x.size()) != plan.M) throw ValidationError("point dimension mismatch");
  std::vector<double> a = plan.a_for_index(k);
  std::vector<double> out(plan.M);
  for (int i = 0; i < plan.M; ++i) out[i] = std::exp(a[i] - plan.c_const) * x[i];
  return out;
}

}  // namespace spikecount
