// SPDX-License-Identifier: Apache-2.0
//
// Batch experiment runner: every library module behind one binary with
// reproducible config-driven CSV output.
//
// Exit codes: 0 success; 1 I/O or validation failure; 2 an undecidable
// comparison or singular term surfaced; 3 a verification check failed.

#include <CLI11.hpp>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "spikecount/config.hpp"
#include "spikecount/counting.hpp"
#include "spikecount/csv.hpp"
#include "spikecount/khintchine.hpp"
#include "spikecount/lattice.hpp"
#include "spikecount/recipsums.hpp"

using namespace spikecount;

namespace {

struct CliOptions {
  std::string config_path;
  std::string out_path;
  int threads = 1;
  long precision = 0;  // 0 keeps the config value
};

ExperimentConfig load_with_overrides(const CliOptions& cli) {
  ExperimentConfig cfg = load_config(cli.config_path);
  if (!cli.out_path.empty()) cfg.output_path = cli.out_path;
  if (cli.precision > 0) cfg.precision_bits = cli.precision;
  return cfg;
}

void write_output(const ExperimentConfig& cfg, const std::string& text) {
  if (cfg.output_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(cfg.output_path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot open output file: " + cfg.output_path);
  out << text;
  if (!out) throw ValidationError("write failed: " + cfg.output_path);
}

void require_supnorm(const ExperimentConfig& cfg) {
  if (cfg.flavor != RegionFlavor::supnorm)
    throw ValidationError("this subcommand counts the sup-norm box region; set flavor = supnorm");
}

std::vector<GridPoint> config_grid(const ExperimentConfig& cfg) {
  if (cfg.eps_grid.empty() || cfg.T_grid.empty() || cfg.Q_list.empty())
    throw ValidationError("need eps, T, and Q in the config");
  std::vector<GridPoint> grid;
  for (const Rat& eps : cfg.eps_grid)
    for (const Rat& T : cfg.T_grid)
      for (long long Q : cfg.Q_list) grid.push_back({eps, T, Q});
  return grid;
}

// ---------------------------------------------------------------- count ----
int cmd_count(const CliOptions& cli) {
  const ExperimentConfig cfg = load_with_overrides(cli);
  require_supnorm(cfg);
  const LinearFormSystem sys = load_matrix(cfg);
  const std::vector<GridPoint> grid = config_grid(cfg);

  CountOptions opts;
  opts.threads = cli.threads;
  opts.node_budget = cfg.enumeration_budget;
  const std::vector<CountReport> rows = error_report(sys, grid, opts);

  std::ostringstream csv;
  write_csv_preamble(csv, cfg.config_hash);
  csv << "eps,T,Q,count,volume,abs_error,bound,ratio,excluded_C,status\n";
  bool undecidable = false;
  for (const CountReport& r : rows) {
    if (r.status == RowStatus::undecidable) undecidable = true;
    const bool counted = r.count >= 0;
    csv << fmt_sig(static_cast<double>(r.params.eps)) << ','
        << fmt_sig(static_cast<double>(r.params.T)) << ',' << r.Q << ',' << r.count << ','
        << fmt_sig(r.volume) << ','
        << (counted ? fmt_sig(r.abs_error()) : std::string("nan")) << ','
        << fmt_sig(r.bound) << ','
        << (counted && std::isfinite(r.bound) && r.bound > 0 ? fmt_sig(r.ratio())
                                                             : std::string("nan"))
        << ',' << r.excluded_C_points << ',' << to_string(r.status) << '\n';
  }
  write_output(cfg, csv.str());
  return undecidable ? 2 : 0;
}

// ------------------------------------------------------------ partition ----
int cmd_partition(const CliOptions& cli) {
  const ExperimentConfig cfg = load_with_overrides(cli);
  if (cfg.eps_grid.empty() || cfg.T_grid.empty())
    throw ValidationError("need eps and T in the config");
  int M = cfg.M;
  if (M == 0 && !cfg.matrix_path.empty()) M = load_matrix(cfg).M;
  if (M == 0) throw ValidationError("need M (or a matrix) in the config");
  std::vector<Rat> beta = cfg.beta;
  if (beta.empty()) beta.assign(static_cast<std::size_t>(M), Rat(1));

  std::ostringstream csv;
  write_csv_preamble(csv, cfg.config_hash);
  csv << "eps,T,tiles,tile,k,a,c\n";
  for (const Rat& eps : cfg.eps_grid)
    for (const Rat& T : cfg.T_grid) {
      const PartitionPlan plan =
          build_partition(M, beta, static_cast<double>(eps), static_cast<double>(T));
      long long id = 0;
      for (const auto& [index, tile] : plan.tiles) {
        csv << fmt_sig(static_cast<double>(eps)) << ',' << fmt_sig(static_cast<double>(T))
            << ',' << plan.tile_count() << ',' << id++ << ',';
        for (std::size_t i = 0; i < index.size(); ++i) csv << (i ? ";" : "") << index[i];
        csv << ',';
        for (std::size_t i = 0; i < tile.a_vec.size(); ++i)
          csv << (i ? ";" : "") << fmt_sig(tile.a_vec[i]);
        csv << ',' << fmt_sig(plan.c_const) << '\n';
      }
    }
  write_output(cfg, csv.str());
  return 0;
}

// ----------------------------------------------------------------- sums ----
int cmd_sums(const CliOptions& cli) {
  const ExperimentConfig cfg = load_with_overrides(cli);
  require_supnorm(cfg);
  const LinearFormSystem sys = load_matrix(cfg);
  if (cfg.Q_list.empty()) throw ValidationError("need Q in the config");

  SumOptions opts;
  opts.threads = cli.threads;
  opts.prec = static_cast<mpfr_prec_t>(cfg.precision_bits);
  opts.node_budget = cfg.enumeration_budget;
  const std::vector<SumReport> rows = growth_table(sys, cfg.Q_list, opts);

  std::ostringstream csv;
  write_csv_preamble(csv, cfg.config_hash);
  csv << "Q,S,dyadic_lower,dyadic_upper,K,normalized\n";
  for (const SumReport& r : rows)
    csv << r.Q << ',' << fmt_sig(r.S) << ',' << r.dyadic_lower << ',' << r.dyadic_upper << ','
        << r.K_max << ',' << fmt_sig(r.normalized) << '\n';
  write_output(cfg, csv.str());
  return 0;
}

// ----------------------------------------------------------- khintchine ----
int cmd_khintchine(const CliOptions& cli) {
  const ExperimentConfig cfg = load_with_overrides(cli);
  const LinearFormSystem slope = load_matrix(cfg);
  if (cfg.delta_list.empty()) throw ValidationError("need delta in the config");
  for (const Rat& d : cfg.delta_list)
    if (!(d > 0) || !(d < Rat(1, 2)))
      throw ValidationError("every delta must lie strictly between 0 and 1/2");
  if (cfg.Q_list.empty()) throw ValidationError("need Q in the config");
  const bool summed = cfg.check_mode == "lemma8";

  std::vector<std::string> offset = cfg.offset_entries;
  if (offset.empty()) offset.assign(static_cast<std::size_t>(slope.N), "0");
  std::vector<EntryExpr> offset_entries;
  offset_entries.reserve(offset.size());
  for (const auto& tok : offset) offset_entries.push_back(parse_entry(tok));
  const SubspaceData data = make_subspace(slope.rows, std::move(offset_entries));

  SubspaceOptions opts;
  opts.threads = cli.threads;
  opts.node_budget = cfg.enumeration_budget;

  std::ostringstream csv;
  write_csv_preamble(csv, cfg.config_hash);
  csv << "Q_or_q,delta,lhs,main_term,remainder,fitted_constant,status\n";
  for (const Rat& delta : cfg.delta_list) {
    const WorstBadapp wb = worst_badapp(summed ? data.stacked : data.slope, probe_radius(delta),
                                        static_cast<mpfr_prec_t>(cfg.precision_bits));
    const double phi = wb.zero ? 0.0 : wb.value.to_double();
    for (long long Q : cfg.Q_list) {
      const CheckReport rep = summed ? lemma8_check(Q, delta, data, cfg.eps_prime, phi, opts)
                                     : lemma7_check(Q, delta, data, cfg.eps_prime, phi, opts);
      csv << Q << ',' << fmt_sig(static_cast<double>(delta)) << ',' << fmt_sig(rep.lhs) << ','
          << fmt_sig(rep.main_term) << ',' << fmt_sig(rep.remainder) << ','
          << fmt_sig(rep.fitted_constant) << ',' << (rep.hypothesis_ok ? "ok" : "hypothesis")
          << '\n';
    }
  }
  write_output(cfg, csv.str());
  return 0;
}

// --------------------------------------------------------------- verify ----
struct CheckRow {
  std::string name;
  std::string status;  // pass / fail / skip / undecidable
  std::string detail;
};

class VerifyTable {
 public:
  void run(const std::string& name, const std::function<std::pair<bool, std::string>()>& body) {
    CheckRow row;
    row.name = name;
    try {
      const auto [ok, detail] = body();
      row.status = ok ? "pass" : "fail";
      row.detail = detail;
    } catch (const SingularTerm& e) {
      row.status = "skip";
      row.detail = std::string("singular: ") + e.what();
    } catch (const UndecidableComparison& e) {
      row.status = "undecidable";
      row.detail = e.what();
    } catch (const DomainError& e) {
      row.status = "skip";
      row.detail = std::string("outside domain: ") + e.what();
    }
    for (char& c : row.detail)
      if (c == ',' || c == '\n') c = ';';
    rows.push_back(std::move(row));
  }

  std::vector<CheckRow> rows;
};

int cmd_verify(const CliOptions& cli) {
  const ExperimentConfig cfg = load_with_overrides(cli);
  require_supnorm(cfg);
  const LinearFormSystem sys = load_matrix(cfg);
  const std::vector<GridPoint> grid = config_grid(cfg);

  CountOptions copts;
  copts.threads = cli.threads;
  copts.node_budget = cfg.enumeration_budget;

  VerifyTable table;

  // exact agreement of the direct scan and the tile-decomposed count
  table.run("count-vs-partition", [&]() -> std::pair<bool, std::string> {
    int checked = 0, matched = 0;
    long long max_count = 0;
    for (const GridPoint& g : grid) {
      if (checked >= 12) break;
      if (sys.M > 3) break;
      const double s = sys.M * std::log(static_cast<double>(g.T)) -
                       std::log(static_cast<double>(g.eps));
      if (!(s > sys.M)) continue;
      const long long direct = count_M_set(sys, g.eps, g.T, g.Q, copts);
      const long long tiled = count_via_partition(sys, g.eps, g.T, g.Q, copts);
      ++checked;
      if (direct == tiled) ++matched;
      max_count = std::max(max_count, direct);
    }
    if (checked == 0) return {true, "skip: no grid point satisfies the plan precondition"};
    return {matched == checked, "matched " + std::to_string(matched) + "/" +
                                    std::to_string(checked) +
                                    " max_count=" + std::to_string(max_count)};
  });

  // census bookkeeping: tile totals plus axis hits give the full count
  table.run("census-totals", [&]() -> std::pair<bool, std::string> {
    for (const GridPoint& g : grid) {
      if (sys.M > 3) break;
      const double s = sys.M * std::log(static_cast<double>(g.T)) -
                       std::log(static_cast<double>(g.eps));
      if (!(s > sys.M)) continue;
      const PartitionCensus census = partition_census(sys, g.eps, g.T, g.Q, copts);
      long long tile_sum = 0;
      for (const auto& [k, c] : census.per_tile) tile_sum += c;
      const bool ok = tile_sum + census.axis_points == census.total &&
                      census.total == count_M_set(sys, g.eps, g.T, g.Q, copts);
      return {ok, "total=" + std::to_string(census.total) +
                      " tiles=" + std::to_string(census.per_tile.size()) +
                      " axis=" + std::to_string(census.axis_points)};
    }
    return {true, "skip: no applicable grid point"};
  });

  // per-tile translation vectors balance to zero against the exponents
  table.run("tile-moment-zero", [&]() -> std::pair<bool, std::string> {
    for (const GridPoint& g : grid) {
      if (sys.M > 3) break;
      const double s = sys.M * std::log(static_cast<double>(g.T)) -
                       std::log(static_cast<double>(g.eps));
      if (!(s > sys.M)) continue;
      const PartitionCensus census = partition_census(sys, g.eps, g.T, g.Q, copts);
      double worst = 0.0;
      for (const auto& [k, tile] : census.plan.tiles) {
        double dot = 0.0;
        for (int i = 0; i < census.plan.M; ++i)
          dot += static_cast<double>(census.plan.beta[static_cast<std::size_t>(i)]) *
                 tile.a_vec[static_cast<std::size_t>(i)];
        worst = std::max(worst, std::fabs(dot));
      }
      return {worst <= 1e-12, "tiles=" + std::to_string(census.plan.tile_count()) +
                                  " max_moment=" + fmt_sig(worst)};
    }
    return {true, "skip: no applicable grid point"};
  });

  // below the admissibility threshold the region holds no countable point
  table.run("empty-regime", [&]() -> std::pair<bool, std::string> {
    std::map<long long, WorstBadapp> cache;
    int checked = 0, zero = 0;
    for (const GridPoint& g : grid) {
      if (checked >= 8) break;
      auto it = cache.find(g.Q);
      if (it == cache.end())
        it = cache.emplace(g.Q, worst_badapp(sys, g.Q,
                                             static_cast<mpfr_prec_t>(cfg.precision_bits)))
                 .first;
      if (it->second.zero) continue;
      Rat lhs = g.eps;
      for (int j = 0; j < sys.N; ++j) lhs *= Rat(g.Q);
      if (compare_exact(QuadLin(lhs), it->second.exact) >= 0) continue;
      ++checked;
      if (count_M_set(sys, g.eps, g.T, g.Q, copts) == 0) ++zero;
    }
    if (checked == 0) return {true, "skip: no grid point below the threshold"};
    return {zero == checked, "empty " + std::to_string(zero) + "/" + std::to_string(checked)};
  });

  // dyadic bracket encloses the reciprocal sum; the truncation tail is empty
  table.run("dyadic-sandwich", [&]() -> std::pair<bool, std::string> {
    SumOptions sopts;
    sopts.threads = cli.threads;
    sopts.prec = static_cast<mpfr_prec_t>(cfg.precision_bits);
    sopts.node_budget = cfg.enumeration_budget;
    int checked = 0;
    bool ok = true;
    std::string detail;
    for (long long Q : cfg.Q_list) {
      if (Q < 2 || checked >= 2) continue;
      const DyadicBounds db = dyadic_bounds(sys, Q, sopts);
      const Real S = sum_reciprocals(sys, Q, sopts);
      const bool row_ok =
          Real::from_long(db.lower) <= S && S <= Real::from_long(db.upper) &&
          count_M_set(sys, pow_rat(Rat(1, 2), db.K + 1), Rat(1, 2), Q, copts) == 0;
      ok = ok && row_ok;
      ++checked;
      if (!detail.empty()) detail += "; ";
      detail += "Q=" + std::to_string(Q) + " [" + std::to_string(db.lower) + " <= " +
                fmt_sig(S.to_double()) + " <= " + std::to_string(db.upper) + "]";
    }
    if (checked == 0) return {true, "skip: all Q below 2"};
    return {ok, detail};
  });

  // affine-slice partial sums decompose over the modulus
  table.run("slice-count-additivity", [&]() -> std::pair<bool, std::string> {
    const SubspaceData line = subspace_from_strings({{"(1+1*sqrt(5))/2"}}, {"0"});
    long long direct = 0;
    for (long long q = 1; q <= 40; ++q) direct += count_A(q, Rat(1, 10), line);
    const long long total = count_N(40, Rat(1, 10), line);
    return {direct == total,
            "sum=" + std::to_string(direct) + " total=" + std::to_string(total)};
  });

  // normalized lattice gap squared dominates the badly-approximable probe
  table.run("admissibility-probe", [&]() -> std::pair<bool, std::string> {
    const LatticeBasis basis = build_lattice(sys);
    const BlockStructure bs = BlockStructure::scalar_rows(sys.M, sys.N);
    const Weights w = Weights::canonical(sys.M, sys.N);
    int checked = 0, held = 0;
    for (long long rho : {2LL, 4LL, 8LL}) {
      const WorstBadapp wb =
          worst_badapp(sys, rho, static_cast<mpfr_prec_t>(cfg.precision_bits));
      if (wb.zero) continue;
      const NuResult r = nu(basis, bs, w, SubspaceC::y_zero(bs), Rat(rho),
                            static_cast<mpfr_prec_t>(cfg.precision_bits),
                            cfg.enumeration_budget);
      if (r.empty) {  // no point outside C: the infimum is +infinity
        ++checked;
        ++held;
        continue;
      }
      if (r.vanishes || !r.nm_min) continue;
      // nu^2 >= probe  <=>  Nm^2 >= probe^{B+C}, compared exactly
      QuadLin lhs = *r.nm_min * *r.nm_min;
      QuadLin rhs(Rat(1));
      const long A = (w.B() + w.C()).convert_to<long>();
      for (long i = 0; i < A; ++i) rhs *= wb.exact;
      ++checked;
      if (compare_exact(lhs, rhs) >= 0) ++held;
    }
    if (checked == 0) return {true, "skip: probe vanished at every radius"};
    return {held == checked, "held " + std::to_string(held) + "/" + std::to_string(checked)};
  });

  // worker count must never move any reported number
  table.run("thread-independence", [&]() -> std::pair<bool, std::string> {
    CountOptions one = copts, eight = copts;
    one.threads = 1;
    eight.threads = 8;
    const GridPoint g = grid.front();
    const bool counts_equal =
        count_M_set(sys, g.eps, g.T, g.Q, one) == count_M_set(sys, g.eps, g.T, g.Q, eight);
    SumOptions s1, s8;
    s1.prec = s8.prec = static_cast<mpfr_prec_t>(cfg.precision_bits);
    s1.node_budget = s8.node_budget = cfg.enumeration_budget;
    s1.threads = 1;
    s8.threads = 8;
    long long Qs = 0;
    for (long long Q : cfg.Q_list)
      if (Q >= 2) Qs = std::max(Qs, std::min(Q, 60LL));
    bool sums_equal = true;
    if (Qs >= 2)
      sums_equal = sum_reciprocals(sys, Qs, s1).to_double() ==
                   sum_reciprocals(sys, Qs, s8).to_double();
    return {counts_equal && sums_equal, counts_equal && sums_equal ? "identical" : "diverged"};
  });

  std::ostringstream csv;
  write_csv_preamble(csv, cfg.config_hash);
  csv << "check,status,detail\n";
  bool any_fail = false, any_undecidable = false;
  for (const CheckRow& row : table.rows) {
    any_fail = any_fail || row.status == "fail";
    any_undecidable = any_undecidable || row.status == "undecidable";
    csv << row.name << ',' << row.status << ',' << row.detail << '\n';
  }
  write_output(cfg, csv.str());
  if (any_fail) return 3;
  if (any_undecidable) return 2;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"geometry-of-numbers experiment runner"};
  app.require_subcommand(1);
  CliOptions cli;

  int (*handlers[])(const CliOptions&) = {cmd_count, cmd_partition, cmd_sums, cmd_khintchine,
                                          cmd_verify};
  const char* names[] = {"count", "partition", "sums", "khintchine", "verify"};
  const char* descs[] = {
      "count region points over an eps/T/Q grid and compare against volume and bound",
      "dump the log-space tile decomposition for an eps/T grid",
      "reciprocal-distance sums with dyadic bracketing over a Q list",
      "affine-slice counting checks over a delta/Q grid",
      "run the cross-module invariant battery and write a pass/fail table"};
  int selected = -1;
  for (int i = 0; i < 5; ++i) {
    CLI::App* sub = app.add_subcommand(names[i], descs[i]);
    sub->add_option("--config", cli.config_path, "experiment config file")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--out", cli.out_path, "output CSV path (overrides the config)");
    sub->add_option("--threads", cli.threads, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--precision", cli.precision, "working precision in bits")
        ->check(CLI::PositiveNumber);
    sub->callback([&selected, i] { selected = i; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);  // prints usage; 0 means --help/--version
    return code == 0 ? 0 : 1;
  }

  try {
    return handlers[selected](cli);
  } catch (const UndecidableComparison& e) {
    std::cerr << "undecidable: " << e.what() << "\n";
    return 2;
  } catch (const SingularTerm& e) {
    std::cerr << "singular: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
