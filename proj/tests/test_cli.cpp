// End-to-end tests for the spikecount binary: exit codes, CSV shape, and
// byte-level determinism across repeat runs and worker counts.

#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>
#include <vector>

namespace {

const std::string kBin = SPIKECOUNT_BIN;
const std::string kConfigs = SPIKECOUNT_CONFIGS;

struct RunResult {
  int exit_code = -1;
  std::string out;
};

std::string temp_path(const std::string& tag) {
  return "/tmp/spikecount_test_" + std::to_string(::getpid()) + "_" + tag;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunResult run(const std::string& args, const std::string& tag) {
  const std::string out_file = temp_path(tag + ".stdout");
  const std::string cmd = kBin + " " + args + " > " + out_file + " 2> " + out_file + ".err";
  const int raw = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  r.out = slurp(out_file);
  std::remove((out_file + ".err").c_str());
  std::remove(out_file.c_str());
  return r;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

bool is_hex16(const std::string& s) {
  if (s.size() != 16) return false;
  for (char c : s)
    if (!std::isxdigit(static_cast<unsigned char>(c))) return false;
  return true;
}

void check_preamble(const std::string& first_line) {
  const std::string prefix = "# spikecount v";
  REQUIRE(first_line.rfind(prefix, 0) == 0);
  const auto pos = first_line.find("config-hash=");
  REQUIRE(pos != std::string::npos);
  REQUIRE(is_hex16(first_line.substr(pos + 12)));
}

}  // namespace

TEST_CASE("count: CSV shape and exit 0") {
  const RunResult r = run("count --config " + kConfigs + "/count_golden.cfg", "count");
  REQUIRE(r.exit_code == 0);
  const auto lines = lines_of(r.out);
  REQUIRE(lines.size() == 2 + 3 * 2 * 2);  // preamble + header + eps*T*Q rows
  check_preamble(lines[0]);
  CHECK(lines[1] == "eps,T,Q,count,volume,abs_error,bound,ratio,excluded_C,status");
  for (std::size_t i = 2; i < lines.size(); ++i) {
    CAPTURE(lines[i]);
    CHECK(std::count(lines[i].begin(), lines[i].end(), ',') == 9);
    CHECK(lines[i].substr(lines[i].rfind(',') + 1) == "ok");
  }
}

TEST_CASE("count: repeat runs and worker counts are byte-identical") {
  const std::string cfg = kConfigs + "/count_sqrt23.cfg";
  const RunResult a = run("count --config " + cfg + " --threads 1", "det_a");
  const RunResult b = run("count --config " + cfg + " --threads 1", "det_b");
  const RunResult c = run("count --config " + cfg + " --threads 8", "det_c");
  REQUIRE(a.exit_code == 0);
  REQUIRE(a.out == b.out);
  REQUIRE(a.out == c.out);
  REQUIRE(lines_of(a.out).size() > 2);
}

TEST_CASE("count: --out writes the CSV to a file and keeps stdout quiet") {
  const std::string out_file = temp_path("outflag.csv");
  const RunResult r =
      run("count --config " + kConfigs + "/count_golden.cfg --out " + out_file, "outflag");
  REQUIRE(r.exit_code == 0);
  CHECK(r.out.empty());
  const std::string written = slurp(out_file);
  check_preamble(lines_of(written).at(0));
  std::remove(out_file.c_str());
}

TEST_CASE("partition: tile dump has the documented columns") {
  const RunResult r = run("partition --config " + kConfigs + "/partition_demo.cfg", "part");
  REQUIRE(r.exit_code == 0);
  const auto lines = lines_of(r.out);
  check_preamble(lines.at(0));
  REQUIRE(lines.at(1) == "eps,T,tiles,tile,k,a,c");
  REQUIRE(lines.size() > 4);
}

TEST_CASE("sums: growth table on the golden form") {
  const RunResult r = run("sums --config " + kConfigs + "/sums_golden.cfg", "sums");
  REQUIRE(r.exit_code == 0);
  const auto lines = lines_of(r.out);
  check_preamble(lines.at(0));
  REQUIRE(lines.at(1) == "Q,S,dyadic_lower,dyadic_upper,K,normalized");
  REQUIRE(lines.size() == 2 + 3);
}

TEST_CASE("sums: a rational form surfaces the singular term as exit 2") {
  const RunResult r = run("sums --config " + kConfigs + "/sums_rational.cfg", "singular");
  REQUIRE(r.exit_code == 2);
}

TEST_CASE("khintchine: report rows and determinism across workers") {
  const std::string cfg = kConfigs + "/khintchine_golden.cfg";
  const RunResult a = run("khintchine --config " + cfg + " --threads 1", "kh1");
  const RunResult b = run("khintchine --config " + cfg + " --threads 8", "kh8");
  REQUIRE(a.exit_code == 0);
  REQUIRE(a.out == b.out);
  const auto lines = lines_of(a.out);
  check_preamble(lines.at(0));
  REQUIRE(lines.at(1) == "Q_or_q,delta,lhs,main_term,remainder,fitted_constant,status");
  REQUIRE(lines.size() == 2 + 2 * 2);  // delta x Q grid
  for (std::size_t i = 2; i < lines.size(); ++i)
    CHECK(lines[i].substr(lines[i].rfind(',') + 1) == "ok");
}

TEST_CASE("khintchine: delta at 1/2 is rejected with exit 1") {
  const RunResult r =
      run("khintchine --config " + kConfigs + "/khintchine_bad_delta.cfg", "baddelta");
  REQUIRE(r.exit_code == 1);
}

TEST_CASE("verify: battery passes on the golden config") {
  const RunResult a = run("verify --config " + kConfigs + "/verify_golden.cfg", "verify1");
  REQUIRE(a.exit_code == 0);
  const auto lines = lines_of(a.out);
  check_preamble(lines.at(0));
  REQUIRE(lines.at(1) == "check,status,detail");
  REQUIRE(lines.size() > 6);
  for (std::size_t i = 2; i < lines.size(); ++i) {
    CAPTURE(lines[i]);
    const auto first = lines[i].find(',');
    const auto second = lines[i].find(',', first + 1);
    const std::string status = lines[i].substr(first + 1, second - first - 1);
    CHECK((status == "pass" || status == "skip"));
  }
}

TEST_CASE("verify: byte-identical across repeats and worker counts") {
  const std::string cfg = kConfigs + "/verify_golden.cfg";
  const RunResult a = run("verify --config " + cfg + " --threads 1", "vdet1");
  const RunResult b = run("verify --config " + cfg + " --threads 8", "vdet8");
  const RunResult c = run("verify --config " + cfg + " --threads 1", "vdet1b");
  REQUIRE(a.exit_code == 0);
  REQUIRE(a.out == b.out);
  REQUIRE(a.out == c.out);
}

TEST_CASE("bad invocations exit 1") {
  CHECK(run("count --config /nonexistent/path.cfg", "badpath").exit_code == 1);
  CHECK(run("bogus-subcommand", "badsub").exit_code == 1);
  CHECK(run("count", "noconfig").exit_code == 1);

  const std::string cfg = temp_path("missing_matrix.cfg");
  {
    std::ofstream out(cfg);
    out << "matrix = /nonexistent/matrix.txt\neps = 1/8\nT = 2\nQ = 10\n";
  }
  CHECK(run("count --config " + cfg, "badmatrix").exit_code == 1);
  std::remove(cfg.c_str());
}

TEST_CASE("unknown config key is a parse failure") {
  const std::string cfg = temp_path("unknown_key.cfg");
  {
    std::ofstream out(cfg);
    out << "matrix = " << kConfigs << "/golden.txt\nwibble = 3\n";
  }
  CHECK(run("count --config " + cfg, "unknownkey").exit_code == 1);
  std::remove(cfg.c_str());
}
