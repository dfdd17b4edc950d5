// Acceptance gate: ten independent checks of the toolkit, one PASS/FAIL line
// each.  Exits nonzero when any check fails.  Runtime budgets are asserted
// where a check carries one.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "oracles.hpp"
#include "spikecount/counting.hpp"
#include "spikecount/khintchine.hpp"
#include "spikecount/lattice.hpp"
#include "spikecount/recipsums.hpp"

using namespace spikecount;
using Clock = std::chrono::steady_clock;

namespace {

struct Fixtures {
  LinearFormSystem golden = make_system({{parse_entry("(1+1*sqrt(5))/2")}});
  LinearFormSystem s23 = make_system(
      {{parse_entry("(0+1*sqrt(2))/1"), parse_entry("(0+1*sqrt(3))/1")}});
  LinearFormSystem s235 = make_system({{parse_entry("(0+1*sqrt(2))/1")},
                                       {parse_entry("(0+1*sqrt(3))/1")},
                                       {parse_entry("(0+1*sqrt(5))/1")}});
  LinearFormSystem dec22 = make_system(
      {{parse_entry("0.31830988618"), parse_entry("0.57721566490")},
       {parse_entry("0.26424111765"), parse_entry("0.69314718056")}});
};

std::string fmt(double v) {
  std::ostringstream ss;
  ss.precision(4);
  ss << v;
  return ss.str();
}

// ---- 1: closed-form volume vs quadrature (M=2) and Monte-Carlo (M=3) ------
bool check_volume(std::string& detail) {
  const auto start = Clock::now();
  double worst_rel = 0;
  for (const Rat& eps : {Rat(1, 20), Rat(1, 10), Rat(1, 2)})
    for (const Rat& T : {Rat(1, 2), Rat(1), Rat(2)}) {
      if (eps > T * T) continue;
      const double closed = volume_closed_form(2, 1, eps, T, Rat(1)).to_double();
      const double oracle = oracles::quadrature_volume_m2(
          static_cast<double>(eps), static_cast<double>(T), 1, 1.0, 4'000'000);
      worst_rel = std::max(worst_rel, std::fabs(closed - oracle) / oracle);
    }
  if (!(worst_rel <= 1e-6)) {
    detail = "quadrature relative error " + fmt(worst_rel);
    return false;
  }

  double worst_sigmas = 0;
  const struct {
    Rat eps_plain, eps_norm, T;
  } mc_points[] = {{Rat(1, 125), Rat(1, 5), Rat(1)},
                   {Rat(27, 1000), Rat(3, 10), Rat(1)},
                   {Rat(1, 8), Rat(1, 2), Rat(2)}};
  for (const auto& pt : mc_points) {
    const SpikeParams params = SpikeParams::scalar(3, 1, pt.eps_norm, pt.T, Rat(1));
    const MonteCarloVolume mc = volume_monte_carlo(params, 1'000'000, 20260822ULL);
    const double closed = volume_closed_form(3, 1, pt.eps_plain, pt.T, Rat(1)).to_double();
    worst_sigmas = std::max(worst_sigmas, std::fabs(closed - mc.estimate) / mc.stderror);
  }
  const double secs = std::chrono::duration<double>(Clock::now() - start).count();
  detail = "quad rel " + fmt(worst_rel) + ", MC " + fmt(worst_sigmas) + " sigma, " +
           fmt(secs) + "s";
  return worst_sigmas <= 4.0 && secs < 60.0;
}

// ---- 2: tile-decomposed count equals the direct count, exactly ------------
bool check_count_equivalence(std::string& detail) {
  const auto start = Clock::now();
  const Fixtures fx;
  CountOptions opts;
  opts.node_budget = 1'000'000'000;

  struct Job {
    const LinearFormSystem* sys;
    int k;
    long long Q;
  };
  std::vector<Job> jobs;
  for (int k = 2; k <= 12; ++k)
    for (long long Q : {10LL, 100LL, 200LL}) jobs.push_back({&fx.golden, k, Q});
  for (int k = 2; k <= 12; k += 2)
    for (long long Q : {10LL, 50LL}) jobs.push_back({&fx.s23, k, Q});
  for (int k = 5; k <= 11; k += 2)
    for (long long Q : {100LL, 200LL}) jobs.push_back({&fx.s235, k, Q});
  for (int k = 3; k <= 12; k += 3)
    for (long long Q : {10LL, 30LL}) jobs.push_back({&fx.dec22, k, Q});

  int checked = 0;
  for (const Job& j : jobs) {
    const Rat eps = pow_rat(Rat(1, 2), j.k);
    const long long direct = count_M_set(*j.sys, eps, Rat(1), j.Q, opts);
    const long long tiled = count_via_partition(*j.sys, eps, Rat(1), j.Q, opts);
    if (direct != tiled) {
      detail = "mismatch at M=" + std::to_string(j.sys->M) + " N=" +
               std::to_string(j.sys->N) + " k=" + std::to_string(j.k) + " Q=" +
               std::to_string(j.Q) + ": " + std::to_string(direct) + " vs " +
               std::to_string(tiled);
      return false;
    }
    ++checked;
  }
  const double secs = std::chrono::duration<double>(Clock::now() - start).count();
  detail = std::to_string(checked) + " configurations, " + fmt(secs) + "s";
  return checked >= 50 && secs < 600.0;
}

// ---- 3: below the admissibility threshold the count is exactly zero -------
bool check_empty_regime(std::string& detail) {
  const Fixtures fx;
  const struct {
    const LinearFormSystem* sys;
    long long Q;
  } probes[] = {{&fx.golden, 10},  {&fx.golden, 100}, {&fx.s23, 5},
                {&fx.s23, 20},     {&fx.s235, 50}};
  int checked = 0;
  for (const auto& pr : probes) {
    const WorstBadapp wb = worst_badapp(*pr.sys, pr.Q);
    if (wb.zero) {
      detail = "probe vanished unexpectedly at Q=" + std::to_string(pr.Q);
      return false;
    }
    // largest eps = 2^-k with eps Q^N strictly below the probe value
    Rat qn(1);
    for (int j = 0; j < pr.sys->N; ++j) qn *= Rat(pr.Q);
    Rat eps;
    bool found = false;
    for (int k = 1; k <= 60; ++k) {
      eps = pow_rat(Rat(1, 2), k);
      if (compare_exact(QuadLin(eps * qn), wb.exact) < 0) {
        found = true;
        break;
      }
    }
    if (!found) {
      detail = "no dyadic eps below the threshold at Q=" + std::to_string(pr.Q);
      return false;
    }
    for (const Rat& T : {Rat(1, 2), Rat(2), Rat(10)}) {
      const long long count = count_M_set(*pr.sys, eps, T, pr.Q);
      if (count != 0) {
        detail = "nonzero count " + std::to_string(count) + " at Q=" +
                 std::to_string(pr.Q) + " T=" + fmt(static_cast<double>(T));
        return false;
      }
      ++checked;
    }
  }
  detail = std::to_string(checked) + " empty configurations confirmed";
  return true;
}

// ---- 4: |count - volume| / bound stays finite and decade-stable -----------
bool check_bound_stability(std::string& detail) {
  const Fixtures fx;
  CountOptions opts;
  opts.node_budget = 20'000'000'000ULL;
  const std::vector<long long> decades = {100, 1000, 10000};

  std::map<long long, double> decade_max;
  auto feed = [&](const LinearFormSystem& sys, const std::vector<GridPoint>& grid) {
    for (const CountReport& r : error_report(sys, grid, opts)) {
      if (r.status != RowStatus::ok) {
        detail = std::string("row status ") + to_string(r.status) + " at Q=" + std::to_string(r.Q);
        return false;
      }
      const double ratio = r.ratio();
      if (!std::isfinite(ratio) || !(ratio >= 0)) {
        detail = "non-finite ratio at Q=" + std::to_string(r.Q);
        return false;
      }
      double& slot = decade_max[r.Q];
      slot = std::max(slot, ratio);
    }
    return true;
  };

  std::vector<GridPoint> golden_grid, s23_grid;
  for (const Rat& eps : {Rat(1, 32), Rat(1, 128)})
    for (const Rat& T : {Rat(1, 2), Rat(1)})
      for (long long Q : decades) golden_grid.push_back({eps, T, Q});
  for (long long Q : decades) s23_grid.push_back({Rat(1, 32), Rat(1), Q});

  if (!feed(fx.golden, golden_grid)) return false;
  if (!feed(fx.s23, s23_grid)) return false;

  double lo = 1e300, hi = 0;
  for (long long Q : decades) {
    lo = std::min(lo, decade_max[Q]);
    hi = std::max(hi, decade_max[Q]);
  }
  detail = "decade maxima " + fmt(decade_max[100]) + " / " + fmt(decade_max[1000]) +
           " / " + fmt(decade_max[10000]) + ", spread x" + fmt(hi / lo);
  return lo > 0 && hi / lo < 10.0;
}

// ---- 5: tile translations, containment under the diagonal map, tile count -
bool check_partition_invariants(std::string& detail) {
  const auto start = Clock::now();
  const std::vector<Rat> ones2(2, Rat(1)), ones3(3, Rat(1));

  // (a) the translation vector of every tile balances to zero
  double worst_moment = 0;
  for (int M : {2, 3})
    for (int s = 2; s <= 12; s += 2) {
      const PartitionPlan plan =
          build_partition(M, M == 2 ? ones2 : ones3, std::exp(-s), 1.0);
      for (const auto& [index, tile] : plan.tiles) {
        double dot = 0;
        for (int i = 0; i < M; ++i) dot += tile.a_vec[static_cast<std::size_t>(i)];
        worst_moment = std::max(worst_moment, std::fabs(dot));
      }
    }
  if (!(worst_moment <= 1e-12)) {
    detail = "translation moment " + fmt(worst_moment);
    return false;
  }

  // (b) 10^3 sampled points per tile keep containment under the tile's map
  std::mt19937_64 rng(97);
  std::uniform_real_distribution<double> unit(-0.5, 0.5);
  std::uniform_real_distribution<double> ray(0.05, 2.0);
  long long contained = 0;
  for (int M : {2, 3}) {
    const double eps = std::exp(M == 2 ? -6.0 : -5.0);
    const PartitionPlan plan = build_partition(M, M == 2 ? ones2 : ones3, eps, 1.0);
    for (const auto& [index, tile] : plan.tiles) {
      for (int it = 0; it < 1000; ++it) {
        std::vector<double> z = tile.center;
        for (int b = 0; b < M - 1; ++b) {
          const double u = unit(rng);
          for (int i = 0; i < M; ++i)
            z[static_cast<std::size_t>(i)] +=
                u * plan.basis[static_cast<std::size_t>(b)][static_cast<std::size_t>(i)];
        }
        double g = 0;
        for (double c : z) g = std::max(g, c - plan.log_T);
        g += ray(rng);
        std::vector<double> x(static_cast<std::size_t>(M));
        for (int i = 0; i < M; ++i)
          x[static_cast<std::size_t>(i)] = std::exp(z[static_cast<std::size_t>(i)] - g);
        const std::vector<long long> k = classify_point(plan, x);
        if (plan.tiles.count(k) != 1) {
          detail = "classified into an unenumerated cell";
          return false;
        }
        const std::vector<double> y = apply_phi(plan, k, x);
        for (double c : y)
          if (!(std::fabs(c) <= eps)) {
            detail = "containment broken: |y| = " + fmt(std::fabs(c)) + " vs eps " +
                     fmt(eps);
            return false;
          }
        ++contained;
      }
    }
  }

  // (c) tile count tracks log(T/eps)^(M-1) within a factor-4 band
  std::string bands;
  for (int M : {2, 3}) {
    double lo = 1e300, hi = 0;
    for (int s = 2; s <= 12; ++s) {
      const PartitionPlan plan =
          build_partition(M, M == 2 ? ones2 : ones3, std::exp(-s), 1.0);
      const double ratio = static_cast<double>(plan.tile_count()) /
                           std::pow(static_cast<double>(s), M - 1);
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
    }
    bands += (M == 2 ? "M2 x" : ", M3 x") + fmt(hi / lo);
    if (!(hi / lo <= 4.0)) {
      detail = "tile-count band " + bands;
      return false;
    }
  }
  const double secs = std::chrono::duration<double>(Clock::now() - start).count();
  detail = std::to_string(contained) + " contained points, bands " + bands + ", " +
           fmt(secs) + "s";
  return secs < 300.0;
}

// ---- 6: dyadic bracket encloses the sum; the tail beyond K is empty -------
bool check_dyadic_sandwich(std::string& detail) {
  const Fixtures fx;
  SumOptions opts;
  opts.prec = 192;
  const struct {
    const LinearFormSystem* sys;
    long long Q;
  } runs[] = {{&fx.golden, 10},  {&fx.golden, 100}, {&fx.golden, 1000},
              {&fx.s23, 10},     {&fx.s23, 100}};
  for (const auto& run : runs) {
    const DyadicBounds db = dyadic_bounds(*run.sys, run.Q, opts);
    const Real S = sum_reciprocals(*run.sys, run.Q, opts);
    if (!(Real::from_long(db.lower) <= S && S <= Real::from_long(db.upper))) {
      detail = "bracket broken at Q=" + std::to_string(run.Q);
      return false;
    }
    const long long tail =
        count_M_set(*run.sys, pow_rat(Rat(1, 2), db.K + 1), Rat(1, 2), run.Q);
    if (tail != 0) {
      detail = "tail count " + std::to_string(tail) + " beyond K=" + std::to_string(db.K);
      return false;
    }
  }
  detail = "5 bracketed runs, tails empty";
  return true;
}

// ---- 7: golden-form sum growth sits in a narrow band; fitted floor > 0 ----
bool check_growth_probes(std::string& detail) {
  const Fixtures fx;
  SumOptions opts;
  opts.prec = 192;
  const std::vector<SumReport> rows = growth_table(fx.golden, {100, 1000, 10000}, opts);
  double lo = 1e300, hi = 0;
  for (const SumReport& r : rows) {
    lo = std::min(lo, r.normalized);
    hi = std::max(hi, r.normalized);
  }
  const double kappa0 = lo;
  detail = "S/(Q log Q) in [" + fmt(lo) + ", " + fmt(hi) + "], band x" + fmt(hi / lo) +
           ", kappa0 " + fmt(kappa0);
  return kappa0 > 0 && hi / lo < 3.0;
}

// ---- 8: squared lattice gap dominates the probe, exactly ------------------
bool check_weak_admissibility(std::string& detail) {
  const Fixtures fx;
  const LatticeBasis basis = build_lattice(fx.golden);
  const BlockStructure bs = BlockStructure::scalar_rows(1, 1);
  const Weights w = Weights::canonical(1, 1);
  const long A = (w.B() + w.C()).convert_to<long>();
  int held = 0;
  for (long long rho = 2; rho <= 256; rho *= 2) {
    const WorstBadapp wb = worst_badapp(fx.golden, rho);
    if (wb.zero) {
      detail = "probe vanished at rho=" + std::to_string(rho);
      return false;
    }
    const NuResult r = nu(basis, bs, w, SubspaceC::y_zero(bs), Rat(rho));
    if (r.empty) {
      ++held;  // infimum over an empty set: +infinity dominates
      continue;
    }
    if (r.vanishes || !r.nm_min) {
      detail = "no exact minimum at rho=" + std::to_string(rho);
      return false;
    }
    QuadLin lhs = *r.nm_min * *r.nm_min;  // nu^2 = Nm^(2/A) vs probe, cross-powered
    QuadLin rhs(Rat(1));
    for (long i = 0; i < A; ++i) rhs *= wb.exact;
    if (compare_exact(lhs, rhs) < 0) {
      detail = "inequality broken at rho=" + std::to_string(rho);
      return false;
    }
    ++held;
  }
  detail = std::to_string(held) + "/8 radii held exactly";
  return held == 8;
}

// ---- 9: slice counters equal the brute double loop; main term calibrated --
bool check_slice_counters(std::string& detail) {
  const SubspaceData line = subspace_from_strings({{"(1+1*sqrt(5))/2"}}, {"0"});
  const long double phi = (1.0L + sqrtl(5.0L)) / 2.0L;
  for (const Rat& delta : {Rat(1, 20), Rat(1, 10), Rat(1, 5)}) {
    const long double d = static_cast<long double>(static_cast<double>(delta));
    long long brute_total = 0;
    for (long long q = 1; q <= 500; ++q) {
      long long brute_q = 0;
      for (long long a = 1; a <= q; ++a) {
        const long double v = fmodl(static_cast<long double>(a) * phi, 1.0L);
        const long double dist = std::min(v, 1.0L - v);
        if (fabsl(dist - d) < 1e-9L) {
          detail = "oracle margin too small at a=" + std::to_string(a);
          return false;
        }
        if (dist < d) ++brute_q;
      }
      brute_total += brute_q;
      if (count_A(q, delta, line) != brute_q) {
        detail = "A(q) mismatch at q=" + std::to_string(q) + " delta=" +
                 fmt(static_cast<double>(delta));
        return false;
      }
    }
    if (count_N(500, delta, line) != brute_total) {
      detail = "N(Q) mismatch at delta=" + fmt(static_cast<double>(delta));
      return false;
    }
  }
  const double lhs = static_cast<double>(count_N(500, Rat(1, 10), line));
  const double main_term = 2.0 * 0.1 * (500.0 * 501.0 / 2.0);
  const double ratio = lhs / main_term;
  detail = "double loop matched for Q<=500; main-term ratio " + fmt(ratio);
  return ratio >= 0.8 && ratio <= 1.2;
}

// ---- 10: the verify subcommand is byte-deterministic ----------------------
bool check_determinism(std::string& detail) {
  const std::string bin = SPIKECOUNT_BIN;
  const std::string cfg = std::string(SPIKECOUNT_CONFIGS) + "/verify_golden.cfg";
  auto run = [&](const std::string& threads, const std::string& out) {
    const std::string cmd =
        bin + " verify --config " + cfg + " --threads " + threads + " --out " + out;
    const int raw = std::system(cmd.c_str());
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  };
  auto slurp = [](const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  const std::string a = "/tmp/spikecount_acc_a.csv", b = "/tmp/spikecount_acc_b.csv",
                    c = "/tmp/spikecount_acc_c.csv";
  if (run("1", a) != 0 || run("1", b) != 0 || run("8", c) != 0) {
    detail = "verify run exited nonzero";
    return false;
  }
  const std::string ta = slurp(a), tb = slurp(b), tc = slurp(c);
  std::remove(a.c_str());
  std::remove(b.c_str());
  std::remove(c.c_str());
  if (ta.empty() || ta != tb || ta != tc) {
    detail = "CSV bytes differ across runs or worker counts";
    return false;
  }
  detail = "3 runs byte-identical (" + std::to_string(ta.size()) + " bytes)";
  return true;
}

}  // namespace

int main() {
  const struct {
    const char* name;
    bool (*fn)(std::string&);
  } checks[] = {
      {"volume-formula", check_volume},
      {"count-equivalence", check_count_equivalence},
      {"empty-regime", check_empty_regime},
      {"bound-stability", check_bound_stability},
      {"partition-invariants", check_partition_invariants},
      {"dyadic-sandwich", check_dyadic_sandwich},
      {"sum-growth-probes", check_growth_probes},
      {"weak-admissibility", check_weak_admissibility},
      {"slice-counters", check_slice_counters},
      {"determinism", check_determinism},
  };
  int failures = 0;
  int idx = 0;
  for (const auto& c : checks) {
    ++idx;
    std::string detail;
    bool ok = false;
    try {
      ok = c.fn(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    if (!ok) ++failures;
    std::printf("%s %2d %-22s %s\n", ok ? "PASS" : "FAIL", idx, c.name, detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
